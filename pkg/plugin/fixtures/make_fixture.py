#!/usr/bin/env python3
"""Regenerate the conformance fixture from the harness's protocol driver.

Run from the repository root after the plugin is built:

    python3 plugin/fixtures/make_fixture.py

Writes conformance_input.jsonl (the exact driver byte stream for a fixed
small instance) and conformance_expected.jsonl (the built plugin's reply,
frozen thereafter; conformance tests compare byte-for-byte).
"""

import subprocess
import sys
from pathlib import Path

from tgbench.detectors import TrainingView
from tgbench.detectors.plugin import protocol_messages, render_transcript
from tgbench.evaluation import temporal_split
from tgbench.generator import BurstSpec, GeneratorConfig, generate
from tgbench.graph import bin_events
from tgbench.labeling import RuleParams, label_graph

HERE = Path(__file__).parent


def build_transcript() -> str:
    cfg = GeneratorConfig(
        num_nodes=12,
        duration=24 * 900,
        base_rate=0.8,
        rng_seed=20240811,
        bursts=(BurstSpec(start=12 * 900, duration=2 * 900, intensity=10.0, center_node=4),),
    )
    snap = bin_events(generate(cfg), 900, time_span=(0, 24 * 900 - 1))
    labels = label_graph(snap, RuleParams(z=2))
    split = temporal_split(snap.num_bins, 2, 0.8)
    view = TrainingView(labels=labels, train_bins=split.train_bins)
    msgs = protocol_messages(snap, view, lag=1, test_bins=split.test_bins)
    return render_transcript(msgs)


def main():
    transcript = build_transcript()
    (HERE / "conformance_input.jsonl").write_text(transcript)
    dist = HERE.parent / "dist" / "main.js"
    if not dist.exists():
        print("plugin not built; wrote input only", file=sys.stderr)
        return
    proc = subprocess.run(
        ["node", str(dist)], input=transcript, capture_output=True, text=True, timeout=120
    )
    if proc.returncode != 0:
        print(proc.stderr, file=sys.stderr)
        raise SystemExit("plugin failed on the fixture transcript")
    (HERE / "conformance_expected.jsonl").write_text(proc.stdout)
    verdicts = proc.stdout.count('"verdict"')
    print(f"fixture written: {len(transcript.splitlines())} input lines, {verdicts} verdicts")


if __name__ == "__main__":
    main()
