"""Command-line surface composing the whole pipeline.

Verbs: generate, ingest, label, bench, sense, report. A single config
file drives everything; a few flags override individual keys. Errors
exit non-zero with a machine-readable JSON record on stderr.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import __version__
from .config import ExperimentConfig, config_hash, load_config
from .errors import BenchmarkError, SequenceTooShortError
from .evaluation import BenchParams, benchmark
from .generator import generate
from .graph import bin_events
from .labeling import label_graph
from .sampling import sample_instances
from .sensitivity import run_sensitivity
from .storage import (
    atomic_write_text,
    read_events,
    read_report_header,
    read_report_records,
    write_bench_report,
    write_events,
    write_labels,
    write_sensitivity_report,
)


def _fail(exc: BaseException, code: int = 1):
    record = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(record, sort_keys=True), err=True)
    sys.exit(code)


def _load(config_path, seed, out, labels_mode) -> ExperimentConfig:
    cfg = load_config(config_path)
    if seed is not None:
        if cfg.generator is not None:
            cfg = replace(cfg, generator=replace(cfg.generator, rng_seed=seed))
        cfg = replace(cfg, sampling=replace(cfg.sampling, rng_seed=seed))
    if out is not None:
        cfg = replace(cfg, output_dir=out)
    if labels_mode is not None:
        cfg = replace(cfg, labels_mode=labels_mode)
    return cfg


def _base_graph(cfg: ExperimentConfig):
    if cfg.generator is not None:
        return generate(cfg.generator)
    return read_events(cfg.ingest_path)


def _instances(cfg: ExperimentConfig, base_graph):
    graphs = sample_instances(
        base_graph,
        cfg.sampling.instances,
        cfg.sampling.target_size,
        rng_seed=cfg.sampling.rng_seed,
    )
    return [bin_events(g, cfg.bin_width) for g in graphs]


def _bench_params(cfg: ExperimentConfig, jobs: int) -> BenchParams:
    return BenchParams(
        rule_params=cfg.labeling,
        train_fraction=cfg.evaluation.train_fraction,
        lag=cfg.evaluation.lag,
        grid_search=cfg.evaluation.grid_search,
        jobs=jobs,
    )


config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(exists=True), help="experiment config file")
seed_option = click.option("--seed", type=int, default=None,
                           help="override generator/sampling seeds")
out_option = click.option("--out", type=str, default=None, help="override output directory")
labels_option = click.option("--labels", "labels_mode",
                             type=click.Choice(["frozen", "recomputed"]), default=None,
                             help="ground truth for perturbed graphs")
jobs_option = click.option("--jobs", type=int, default=1, help="parallel workers")


@click.group()
@click.version_option(version=__version__)
def main():
    """Anomaly-emergence benchmarking on temporal interaction graphs."""


@main.command(name="generate")
@config_option
@seed_option
@out_option
def generate_cmd(config_path, seed, out):
    """Generate a synthetic events file from the config's generator section."""
    try:
        cfg = _load(config_path, seed, out, None)
        if cfg.generator is None:
            raise BenchmarkError("config has no generator section")
        graph = generate(cfg.generator)
        out_dir = Path(cfg.output_dir)
        write_events(out_dir / "events.csv", graph, config_digest=config_hash(cfg))
        click.echo(f"wrote {len(graph.events)} events to {out_dir / 'events.csv'}")
    except BenchmarkError as exc:
        _fail(exc)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@out_option
def ingest(path, out):
    """Validate an events file and write its canonical form."""
    try:
        graph = read_events(path)
        target = Path(out or ".") / "events.csv"
        write_events(target, graph)
        click.echo(
            f"ingested {len(graph.events)} events over {graph.node_count} nodes -> {target}"
        )
    except BenchmarkError as exc:
        _fail(exc)


@main.command()
@config_option
@seed_option
@out_option
def label(config_path, seed, out):
    """Label the whole input graph and write the labels file."""
    try:
        cfg = _load(config_path, seed, out, None)
        digest = config_hash(cfg)
        graph = _base_graph(cfg)
        if not graph.events:
            raise SequenceTooShortError(0, cfg.labeling.z)
        snap = bin_events(graph, cfg.bin_width)
        labels = label_graph(snap, cfg.labeling)
        out_dir = Path(cfg.output_dir)
        write_labels(out_dir / "labels.csv", labels, digest)
        positives = len(labels.positives())
        click.echo(f"wrote {positives} positive labels to {out_dir / 'labels.csv'}")
    except BenchmarkError as exc:
        _fail(exc)


@main.command()
@config_option
@seed_option
@out_option
@jobs_option
def bench(config_path, seed, out, jobs):
    """Run the benchmark over sampled instances and write reports."""
    try:
        cfg = _load(config_path, seed, out, None)
        digest = config_hash(cfg)
        base = _base_graph(cfg)
        snaps = _instances(cfg, base)
        params = _bench_params(cfg, jobs)
        report = benchmark(snaps, list(cfg.detectors), params)
        write_bench_report(cfg.output_dir, report, digest)
        click.echo(report.to_table(), nl=False)
    except BenchmarkError as exc:
        _fail(exc)


@main.command()
@config_option
@seed_option
@out_option
@labels_option
@jobs_option
def sense(config_path, seed, out, labels_mode, jobs):
    """Run the sensitivity suite and write reports."""
    try:
        cfg = _load(config_path, seed, out, labels_mode)
        digest = config_hash(cfg)
        base = _base_graph(cfg)
        snaps = _instances(cfg, base)
        params = _bench_params(cfg, jobs)
        report = run_sensitivity(
            list(cfg.sensitivity),
            list(cfg.detectors),
            snaps,
            params,
            base_graph=base,
            n_instances=cfg.sampling.instances,
            bin_width=cfg.bin_width,
            labels_mode=cfg.labels_mode,
        )
        write_sensitivity_report(cfg.output_dir, report, digest)
        click.echo(report.to_table(), nl=False)
    except BenchmarkError as exc:
        _fail(exc)


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def report(directory):
    """Merge report files in DIRECTORY into one summary (hashes must match)."""
    try:
        directory = Path(directory)
        paths = sorted(directory.glob("*_report.jsonl"))
        if not paths:
            raise BenchmarkError(f"no report files found under {directory}")
        digests = {}
        for p in paths:
            digests[str(p)] = read_report_header(p).get("config_hash")
        if len(set(digests.values())) > 1:
            detail = ", ".join(f"{k}={v}" for k, v in sorted(digests.items()))
            raise BenchmarkError(f"refusing to merge mismatched config hashes: {detail}")
        lines = [f"merged report (config_hash={next(iter(digests.values()))})"]
        for p in paths:
            lines.append(f"-- {p.name}")
            for rec in read_report_records(p):
                if rec.get("type") == "detector":
                    lines.append(
                        f"{rec['detector']:<24}{rec['mean_f1']:>8.3f} +- {rec['std_f1']:.3f}"
                        f"  (n={rec['n']})"
                    )
                elif rec.get("type") == "entry":
                    delta = rec.get("delta_f1")
                    delta_s = f"{delta:+.3f}" if delta is not None else "n/a"
                    lines.append(f"{rec['test']:<12}{rec['detector']:<24}{delta_s:>10}")
        text = "\n".join(lines) + "\n"
        atomic_write_text(directory / "merged_report.txt", text)
        click.echo(text, nl=False)
    except BenchmarkError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
