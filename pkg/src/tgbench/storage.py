"""Flat-file persistence for events, labels, and reports.

Events files are line-delimited and self-describing per line: either
CSV ``source,target,timestamp,action`` or a JSON object with the same
fields; the reader accepts both (even mixed) and rejects malformed
lines with their line number. All writes are atomic
(write-temp-then-rename) and embed the config hash and tool version.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from . import __version__
from .errors import BenchmarkError, InvalidConfigError
from .graph import Action, InteractionEvent, TemporalGraph, build_graph
from .labeling import LabelMatrix


class MalformedLineError(BenchmarkError):
    def __init__(self, path, line_number: int, reason: str):
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{path}:{line_number}: {reason}")


def atomic_write_text(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_events(path: str | Path, graph: TemporalGraph, fmt: str = "csv",
                 config_digest: str | None = None):
    """Persist the event stream; isolated nodes are kept in a header record."""
    buf = io.StringIO()
    header = {
        "type": "header",
        "version": __version__,
        "config_hash": config_digest,
        "node_count": graph.node_count,
        "nodes": list(graph.node_list()),
        "events": len(graph.events),
    }
    buf.write("#" + json.dumps(header, sort_keys=True) + "\n")
    if fmt == "csv":
        for e in graph.events:
            buf.write(f"{e.source},{e.target},{e.timestamp},{e.action.value}\n")
    elif fmt == "jsonl":
        for e in graph.events:
            buf.write(
                json.dumps(
                    {
                        "source": e.source,
                        "target": e.target,
                        "timestamp": e.timestamp,
                        "action": e.action.value,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    else:
        raise InvalidConfigError("format", f"unknown events format '{fmt}'")
    atomic_write_text(path, buf.getvalue())


def _parse_event_line(path, lineno: int, line: str) -> InteractionEvent:
    if line.lstrip().startswith("{"):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLineError(path, lineno, f"bad JSON: {exc.msg}")
        try:
            return InteractionEvent(
                source=int(obj["source"]),
                target=int(obj["target"]),
                timestamp=int(obj["timestamp"]),
                action=Action(obj["action"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedLineError(path, lineno, f"bad event object: {exc}")
    parts = line.split(",")
    if len(parts) != 4:
        raise MalformedLineError(path, lineno, f"expected 4 CSV fields, got {len(parts)}")
    try:
        return InteractionEvent(
            source=int(parts[0]),
            target=int(parts[1]),
            timestamp=int(parts[2]),
            action=Action(parts[3].strip()),
        )
    except ValueError as exc:
        raise MalformedLineError(path, lineno, str(exc))


def read_events(path: str | Path) -> TemporalGraph:
    """Read an events file (CSV, JSONL, or mixed) into a TemporalGraph."""
    path = Path(path)
    events = []
    universe: set = set()
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                try:
                    header = json.loads(line[1:])
                    universe.update(int(v) for v in header.get("nodes", []))
                except (json.JSONDecodeError, TypeError, ValueError):
                    raise MalformedLineError(path, lineno, "bad header record")
                continue
            events.append(_parse_event_line(path, lineno, line))
    if not events and not universe:
        raise MalformedLineError(path, 0, "file contains no events and no node universe")
    return build_graph(events, node_universe=universe or None)


def write_labels(path: str | Path, labels: LabelMatrix, config_digest: str):
    """Positive labels only: ``node,bin,rule_mask`` lines after a JSON header."""
    buf = io.StringIO()
    header = {
        "type": "header",
        "version": __version__,
        "config_hash": config_digest,
        "z": labels.z,
        "num_bins": labels.num_bins,
        "node_count": labels.node_count,
        "defined_range": [labels.defined_lo, labels.defined_hi],
    }
    buf.write("#" + json.dumps(header, sort_keys=True) + "\n")
    for node, b, mask in labels.positives():
        buf.write(f"{node},{b},{mask}\n")
    atomic_write_text(path, buf.getvalue())


def read_labels(path: str | Path) -> tuple:
    """Return (header dict, list of (node, bin, mask))."""
    path = Path(path)
    header = None
    rows = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                header = json.loads(line[1:])
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise MalformedLineError(path, lineno, "expected node,bin,rule_mask")
            rows.append((int(parts[0]), int(parts[1]), int(parts[2])))
    if header is None:
        raise MalformedLineError(path, 0, "missing header record")
    return header, rows


def _stamp(config_digest: str) -> dict:
    return {"version": __version__, "config_hash": config_digest}


def write_bench_report(out_dir: str | Path, report, config_digest: str):
    out_dir = Path(out_dir)
    lines = [json.dumps({"type": "header", **_stamp(config_digest),
                         "n": report.num_instances, "z": report.z,
                         "lag": report.lag,
                         "train_fraction": report.train_fraction},
                        sort_keys=True)]
    for d in report.to_dicts():
        lines.append(json.dumps({"type": "detector", **d}, sort_keys=True))
    atomic_write_text(out_dir / "bench_report.jsonl", "\n".join(lines) + "\n")
    atomic_write_text(out_dir / "bench_report.txt", report.to_table())

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["detector", "instance", "f1"])
    for name, instance, f1 in report.to_plot_rows():
        writer.writerow([name, instance, repr(f1)])
    atomic_write_text(out_dir / "bench_points.csv", buf.getvalue())


def write_sensitivity_report(out_dir: str | Path, report, config_digest: str):
    out_dir = Path(out_dir)
    lines = [json.dumps({"type": "header", **_stamp(config_digest), "z": report.z},
                        sort_keys=True)]
    for d in report.to_dicts():
        lines.append(json.dumps({"type": "entry", **d}, sort_keys=True))
    atomic_write_text(out_dir / "sense_report.jsonl", "\n".join(lines) + "\n")
    atomic_write_text(out_dir / "sense_report.txt", report.to_table())


def read_report_header(path: str | Path) -> dict:
    with Path(path).open() as fh:
        first = fh.readline().strip()
    obj = json.loads(first)
    if obj.get("type") != "header":
        raise BenchmarkError(f"{path}: first record is not a header")
    return obj


def read_report_records(path: str | Path) -> list:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
