"""Subprocess driver for external detector plugins.

Wire protocol, line-delimited JSON over the plugin's stdin/stdout:

1. -> {"type": "init", "z": int, "lag": int, "node_count": int, "num_bins": int}
2. -> {"type": "event", "bin": int, "source": int, "target": int, "count": int}
   one per nonzero (bin, edge), bins ascending, edges sorted within a bin
3. -> {"type": "label", "node": int, "bin": int}
   one per positive training label
4. -> {"type": "predict", "bins": [int, ...]}
5. <- {"type": "verdict", "node": int, "bin": int, "anomalous": bool}
   one per (node, requested bin), then {"type": "done"}

Node ids on the wire are row indices 0..node_count-1 in the snapshot's
canonical node order. Any deviation from the message shapes, coverage
gaps, duplicate or unrequested verdicts, or a nonzero exit code after
``done`` is reported as a structured error. A wall-clock budget bounds
the whole exchange.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
import time

import numpy as np

from ..errors import PluginCrashError, PluginTimeoutError, ProtocolViolationError
from ..graph import bin_arrays
from .base import (
    PRED_ABSTAIN,
    PRED_ANOMALOUS,
    PRED_NORMAL,
    PredictionSeries,
    TrainingView,
    register_detector,
)

DEFAULT_TIMEOUT_S = 600.0


def protocol_messages(snap, train: TrainingView, lag: int, test_bins) -> list:
    """The exact message sequence the driver sends, as dicts."""
    msgs = [
        {
            "type": "init",
            "z": train.labels.z,
            "lag": lag,
            "node_count": snap.node_count,
            "num_bins": snap.num_bins,
        }
    ]
    for b, (src, dst, cnt) in enumerate(bin_arrays(snap)):
        for s, d, c in zip(src.tolist(), dst.tolist(), cnt.tolist()):
            msgs.append({"type": "event", "bin": b, "source": s, "target": d, "count": c})
    for node, b in train.positive_cells():
        msgs.append({"type": "label", "node": node, "bin": b})
    msgs.append({"type": "predict", "bins": [int(b) for b in test_bins]})
    return msgs


def render_transcript(msgs) -> str:
    """Serialize driver messages the way they go over the wire."""
    return "".join(json.dumps(m, sort_keys=True) + "\n" for m in msgs)


def _reader(stream, sink):
    for line in stream:
        sink.append(line)
    stream.close()


def run_plugin(snap, train: TrainingView, spec, lag: int = 1, test_bins=None) -> PredictionSeries:
    """Spawn the plugin, drive the protocol, validate full coverage."""
    if test_bins is None:
        raise ValueError("plugin detectors need explicit test_bins")
    test_bins = [int(b) for b in test_bins]
    command = spec.hp("command", None)
    args = spec.hp("args", [])
    timeout_s = float(spec.hp("timeout_s", DEFAULT_TIMEOUT_S))
    argv = shlex.split(command) + [str(a) for a in args]

    msgs = protocol_messages(snap, train, lag, test_bins)
    payload = render_transcript(msgs)

    proc = subprocess.Popen(
        argv,
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    out_lines: list = []
    err_lines: list = []
    t_out = threading.Thread(target=_reader, args=(proc.stdout, out_lines), daemon=True)
    t_err = threading.Thread(target=_reader, args=(proc.stderr, err_lines), daemon=True)
    t_out.start()
    t_err.start()

    def _writer():
        try:
            proc.stdin.write(payload)
            proc.stdin.close()
        except (BrokenPipeError, OSError):
            pass  # plugin died early; surfaced via exit code below

    t_in = threading.Thread(target=_writer, daemon=True)
    t_in.start()

    deadline = time.monotonic() + timeout_s
    while proc.poll() is None:
        if time.monotonic() > deadline:
            proc.kill()
            proc.wait()
            raise PluginTimeoutError(timeout_s)
        time.sleep(0.01)
    t_out.join(timeout=5)
    t_err.join(timeout=5)
    stderr = "".join(err_lines)

    n, T = snap.node_count, snap.num_bins
    verdicts = np.full((n, T), PRED_ABSTAIN, dtype=np.int8)
    requested = {(v, b) for b in test_bins for v in range(n)}
    seen = set()
    done = False
    for raw in out_lines:
        line = raw.strip()
        if not line:
            continue
        if done:
            raise ProtocolViolationError(f"output after done: {line!r}")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolViolationError(f"unparseable line: {line!r}")
        kind = msg.get("type")
        if kind == "done":
            done = True
            continue
        if kind == "error":
            raise ProtocolViolationError(f"plugin reported error: {msg.get('message')!r}")
        if kind != "verdict":
            raise ProtocolViolationError(f"unexpected message type {kind!r} in {line!r}")
        try:
            node = int(msg["node"])
            b = int(msg["bin"])
            anomalous = bool(msg["anomalous"])
        except (KeyError, TypeError, ValueError):
            raise ProtocolViolationError(f"malformed verdict: {line!r}")
        cell = (node, b)
        if cell not in requested:
            raise ProtocolViolationError(f"verdict for unrequested cell {cell}")
        if cell in seen:
            raise ProtocolViolationError(f"duplicate verdict for cell {cell}")
        seen.add(cell)
        verdicts[node, b] = PRED_ANOMALOUS if anomalous else PRED_NORMAL

    if proc.returncode != 0:
        raise PluginCrashError(proc.returncode, stderr=stderr)
    if not done:
        raise ProtocolViolationError("plugin exited without sending done")
    missing = requested - seen
    if missing:
        raise ProtocolViolationError(
            f"{len(missing)} requested cells without verdicts "
            f"(first: {sorted(missing)[:5]})"
        )
    return PredictionSeries(
        verdicts=verdicts, lag=lag, meta={"command": command, "args": list(args)}
    )


register_detector("plugin", run_plugin)
