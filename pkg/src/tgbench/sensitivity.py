"""Robustness sweeps: prediction lag, concept drift, spatial size, density.

Each test reruns the benchmark along one parameter grid and reports, per
detector, the mean change in weighted F1 relative to the unperturbed
baseline. Perturbations are pure (input sequences are never modified)
and deterministic per (seed, grid point, instance). Detector windows are
fixed to the values the baseline's grid search chose, so sweeps measure
robustness of a tuned detector rather than re-tuning at every point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BenchmarkError, DegenerateGraphError
from .evaluation import BenchParams, BenchReport, benchmark
from .graph import SnapshotSequence, bin_events
from .labeling import label_graph
from .sampling import sample_instances

SENSITIVITY_TESTS = ("lag", "drift", "size", "density")


@dataclass(frozen=True)
class SensitivitySpec:
    """One sweep: which test and which parameter grid."""

    test: str
    grid: tuple
    rng_seed: int = 0

    def validate(self):
        if self.test not in SENSITIVITY_TESTS:
            raise ValueError(f"unknown sensitivity test '{self.test}'")
        if len(self.grid) == 0:
            raise ValueError("grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")


def default_suite(z: int, base_size: int, size_step: int = 10, rng_seed: int = 0) -> list:
    """The canonical four tests: lag 1..z, drift 0..0.01 in 0.001 steps,
    11 sizes in an arithmetic progression, density factors 1..10."""
    return [
        SensitivitySpec("lag", tuple(range(1, z + 1)), rng_seed),
        SensitivitySpec("drift", tuple(round(0.001 * i, 3) for i in range(11)), rng_seed),
        SensitivitySpec("size", tuple(base_size + size_step * i for i in range(11)), rng_seed),
        SensitivitySpec("density", tuple(range(1, 11)), rng_seed),
    ]


def perturb_concept_drift(snap: SnapshotSequence, p: float, rng_seed: int) -> SnapshotSequence:
    """Remove, per (node, bin) hit with probability p, every edge incident
    to the node in that bin.

    Returns a new sequence; ``meta`` records how many of the hits landed
    on (node, bin) pairs that actually had incident edges, so removal
    statistics can be audited.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    n, T = snap.node_count, snap.num_bins
    hits = rng.random((n, T)) < p
    idx = snap.node_index()
    new_bins = []
    hit_incidences = 0
    total_incidences = 0
    for t, b in enumerate(snap.bins):
        incident = set()
        for (s, d) in b:
            incident.add(s)
            incident.add(d)
        total_incidences += len(incident)
        hit_incidences += sum(1 for v in incident if hits[idx[v], t])
        kept = {
            (s, d): c
            for (s, d), c in b.items()
            if not hits[idx[s], t] and not hits[idx[d], t]
        }
        new_bins.append(kept)
    return SnapshotSequence(
        bin_width=snap.bin_width,
        node_ids=snap.node_ids,
        bins=tuple(new_bins),
        meta={
            "drift_p": p,
            "drift_hits": hit_incidences,
            "drift_incidences": total_incidences,
        },
    )


def density_additions(edge_count_bin0: int, t: int, i: int) -> int:
    """Exactly floor(|E_0| * t * i * 1e-5) events are added at bin t."""
    return (edge_count_bin0 * t * i) // 100000


def perturb_spatial_density(snap: SnapshotSequence, i: int, rng_seed: int) -> SnapshotSequence:
    """Add uniform-random events at every bin, scaled by bin index.

    Endpoints are uniform over ordered non-self node pairs; duplicates
    accumulate counts. Fails with DegenerateGraphError when bin 0 is
    empty (the scale factor |E_0| would make the sweep vacuous).
    """
    if i < 1:
        raise ValueError("density factor i must be >= 1")
    if snap.node_count < 2:
        raise DegenerateGraphError("need at least 2 nodes to add edges")
    e0 = len(snap.bins[0])
    if e0 == 0:
        raise DegenerateGraphError("bin 0 has no edges; density sweep is vacuous")
    rng = np.random.default_rng(rng_seed)
    n = snap.node_count
    ids = snap.node_ids
    new_bins = []
    added_total = 0
    for t, b in enumerate(snap.bins):
        extra = density_additions(e0, t, i)
        nb = dict(b)
        if extra > 0:
            src = rng.integers(0, n, size=extra)
            # uniform over targets != source: shift draws past the source slot
            tgt = rng.integers(0, n - 1, size=extra)
            tgt = np.where(tgt >= src, tgt + 1, tgt)
            for s_idx, t_idx in zip(src, tgt):
                key = (ids[int(s_idx)], ids[int(t_idx)])
                nb[key] = nb.get(key, 0) + 1
            added_total += extra
        new_bins.append(nb)
    return SnapshotSequence(
        bin_width=snap.bin_width,
        node_ids=snap.node_ids,
        bins=tuple(new_bins),
        meta={"density_i": i, "density_added": added_total},
    )


@dataclass
class SweepPoint:
    parameter: float
    mean_f1: float | None
    error: str | None = None


@dataclass
class SensitivityEntry:
    detector: str
    test: str
    baseline_f1: float
    points: list
    delta_f1: float | None

    def recompute_delta(self) -> float | None:
        vals = [p.mean_f1 for p in self.points if p.mean_f1 is not None]
        if not vals:
            return None
        return float(np.mean([v - self.baseline_f1 for v in vals]))


@dataclass
class SensitivityReport:
    z: int
    entries: list

    def to_dicts(self) -> list:
        return [
            {
                "detector": e.detector,
                "test": e.test,
                "baseline_f1": e.baseline_f1,
                "delta_f1": e.delta_f1,
                "points": [
                    {"parameter": p.parameter, "f1": p.mean_f1, "error": p.error}
                    for p in e.points
                ],
            }
            for e in self.entries
        ]

    def to_table(self) -> str:
        lines = [
            "average change in weighted F1 per sensitivity test",
            f"{'test':<12}{'detector':<24}{'delta F1':>10}",
        ]
        for e in self.entries:
            delta = f"{e.delta_f1:+.3f}" if e.delta_f1 is not None else "n/a"
            lines.append(f"{e.test:<12}{e.detector:<24}{delta:>10}")
        return "\n".join(lines) + "\n"


def _point_seed(base: int, test: str, point_index: int, instance_index: int) -> int:
    return (base * 1000003 + point_index * 1009 + instance_index * 7 +
            sum(ord(c) for c in test)) % (2**63)


def _mean_by_detector(report: BenchReport) -> dict:
    return {d.name: d.mean_f1 for d in report.detectors}


def _lag_point(detector_specs, snaps, labels_list, params, lag, windows) -> dict:
    p = replace(params, lag=int(lag), grid_search=False)
    rep = benchmark(snaps, detector_specs, p, labels_list=labels_list,
                    window_overrides=windows)
    return _mean_by_detector(rep)


def _size_point(detector_specs, base_graph, size, count, params, windows,
                bin_width, seed) -> dict:
    instances = sample_instances(base_graph, count, int(size), rng_seed=seed)
    snaps = [bin_events(g, bin_width) for g in instances]
    p = replace(params, grid_search=False)
    rep = benchmark(snaps, detector_specs, p, window_overrides=windows)
    return _mean_by_detector(rep)


def test_prediction_lag(
    detector_specs, snaps, labels_list, params: BenchParams, grid, windows=None
) -> dict:
    """Per-lag benchmark sweep; returns {lag: {detector: mean F1}}."""
    return {
        lag: _lag_point(detector_specs, snaps, labels_list, params, lag, windows)
        for lag in grid
    }


def test_spatial_size(
    detector_specs, base_graph, sizes, n_instances, params: BenchParams,
    windows=None, bin_width: int = 900, rng_seed: int = 0,
) -> dict:
    """Resample instance populations at each size and rerun the benchmark."""
    return {
        size: _size_point(
            detector_specs, base_graph, size, n_instances, params, windows,
            bin_width, _point_seed(rng_seed, "size", k, 0),
        )
        for k, size in enumerate(sizes)
    }


def run_sensitivity(
    suite,
    detector_specs,
    snaps,
    params: BenchParams,
    baseline: BenchReport | None = None,
    base_graph=None,
    n_instances: int | None = None,
    bin_width: int = 900,
    labels_mode: str = "recomputed",
) -> SensitivityReport:
    """Run every sweep in ``suite`` and assemble the delta-F1 report.

    Baseline is the unperturbed lag-1 benchmark (computed here when not
    supplied). Drift and density sweeps relabel the perturbed sequences
    unless ``labels_mode == "frozen"``, in which case the baseline labels
    are reused; the size sweep needs ``base_graph`` to resample from.
    Per-point failures are recorded in the report, never raised.
    """
    if labels_mode not in ("recomputed", "frozen"):
        raise ValueError("labels_mode must be 'recomputed' or 'frozen'")
    snaps = list(snaps)
    labels_list = [label_graph(s, params.rule_params) for s in snaps]
    if baseline is None:
        baseline = benchmark(snaps, detector_specs, params, labels_list=labels_list)
    windows = dict(baseline.detector_windows)
    base_means = _mean_by_detector(baseline)

    entries = []

    def add_entries(test, per_point):
        for spec in detector_specs:
            name = spec.label
            points = []
            for param, result in per_point:
                if isinstance(result, str):
                    points.append(SweepPoint(parameter=param, mean_f1=None, error=result))
                else:
                    points.append(SweepPoint(parameter=param, mean_f1=result.get(name)))
            entry = SensitivityEntry(
                detector=name,
                test=test,
                baseline_f1=base_means.get(name, 0.0),
                points=points,
                delta_f1=None,
            )
            entry.delta_f1 = entry.recompute_delta()
            entries.append(entry)

    for spec in suite:
        spec.validate()
        per_point = []
        if spec.test == "lag":
            for lag in spec.grid:
                try:
                    per_point.append(
                        (lag, _lag_point(detector_specs, snaps, labels_list,
                                         params, lag, windows))
                    )
                except BenchmarkError as exc:
                    per_point.append((lag, f"{type(exc).__name__}: {exc}"))
        elif spec.test in ("drift", "density"):
            for k, param in enumerate(spec.grid):
                try:
                    perturbed = []
                    for j, s in enumerate(snaps):
                        seed = _point_seed(spec.rng_seed, spec.test, k, j)
                        if spec.test == "drift":
                            perturbed.append(perturb_concept_drift(s, float(param), seed))
                        else:
                            perturbed.append(perturb_spatial_density(s, int(param), seed))
                    if labels_mode == "frozen":
                        point_labels = labels_list
                    else:
                        point_labels = [label_graph(s, params.rule_params) for s in perturbed]
                    p = replace(params, grid_search=False)
                    rep = benchmark(perturbed, detector_specs, p,
                                    labels_list=point_labels, window_overrides=windows)
                    per_point.append((param, _mean_by_detector(rep)))
                except BenchmarkError as exc:
                    per_point.append((param, f"{type(exc).__name__}: {exc}"))
        elif spec.test == "size":
            if base_graph is None:
                raise ValueError("size sweep needs the base graph to resample from")
            count = n_instances if n_instances is not None else len(snaps)
            for k, size in enumerate(spec.grid):
                try:
                    per_point.append(
                        (size, _size_point(
                            detector_specs, base_graph, size, count, params,
                            windows, bin_width,
                            _point_seed(spec.rng_seed, "size", k, 0),
                        ))
                    )
                except BenchmarkError as exc:
                    per_point.append((size, f"{type(exc).__name__}: {exc}"))
        add_entries(spec.test, per_point)

    return SensitivityReport(z=params.z, entries=entries)
