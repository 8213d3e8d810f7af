"""Evaluation protocol: temporal split, weighted F1, window grid search,
and population benchmarking.

Each instance is split temporally (first ``train_fraction`` of bins for
training, the rest for testing, both clipped to the labeler's defined
range); detectors predict one step ahead and are scored with the
support-weighted mean of the two per-class F1 scores. Detector history
windows are tuned by grid search over {1, ..., 2z} on a validation
slice carved from the end of the training region, never on test data.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detectors import (
    PRED_ABSTAIN,
    PRED_ANOMALOUS,
    DetectorSpec,
    PredictionSeries,
    TrainingView,
    run_detector,
)
from .errors import (
    BenchmarkError,
    CoverageGapError,
    EmptyTestRegionError,
    SequenceTooShortError,
)
from .labeling import LabelMatrix, RuleParams, label_graph

GRID_VALIDATION_FRACTION = 0.2


@dataclass(frozen=True)
class SplitSpec:
    """Temporal 80/20 split of one instance's bins.

    ``test_bins`` is already intersected with the labeler's defined
    range; ``raw_test_bins`` keeps the unmasked boundary arithmetic.
    """

    num_bins: int
    z: int
    train_fraction: float
    boundary: int
    train_bins: range
    raw_test_bins: range
    test_bins: tuple

    @property
    def train_end(self) -> int:
        return self.boundary


def temporal_split(num_bins: int, z: int, train_fraction: float = 0.8) -> SplitSpec:
    """Boundary at floor(train_fraction * T); test bins past it."""
    if num_bins < 2 * z + 4:
        raise SequenceTooShortError(num_bins, z)
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError("train_fraction must lie in (0, 1]")
    boundary = math.floor(train_fraction * num_bins)
    raw_test = range(boundary, num_bins)
    if len(raw_test) == 0:
        raise EmptyTestRegionError(num_bins, train_fraction)
    defined_hi = num_bins - z - 2
    defined_lo = z + 1
    test = tuple(b for b in raw_test if defined_lo <= b <= defined_hi)
    return SplitSpec(
        num_bins=num_bins,
        z=z,
        train_fraction=train_fraction,
        boundary=boundary,
        train_bins=range(0, boundary),
        raw_test_bins=raw_test,
        test_bins=test,
    )


@dataclass(frozen=True)
class F1Breakdown:
    weighted_f1: float
    f1_anomalous: float
    f1_normal: float
    support_anomalous: int
    support_normal: int
    abstained: int


def _class_f1(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def weighted_f1_from_arrays(truth: np.ndarray, pred: np.ndarray) -> F1Breakdown:
    """Support-weighted mean of the per-class F1 scores.

    ``truth`` is boolean/0-1; ``pred`` uses the PRED_* encoding and
    abstentions are excluded from both supports.
    """
    truth = np.asarray(truth).astype(bool).ravel()
    pred = np.asarray(pred).ravel()
    valid = pred != PRED_ABSTAIN
    abstained = int((~valid).sum())
    t = truth[valid]
    p = pred[valid] == PRED_ANOMALOUS
    tp1 = int(np.sum(t & p))
    fp1 = int(np.sum(~t & p))
    fn1 = int(np.sum(t & ~p))
    tn1 = int(np.sum(~t & ~p))
    f1_anom = _class_f1(tp1, fp1, fn1)
    # for the normal class the roles swap
    f1_norm = _class_f1(tn1, fn1, fp1)
    support1 = tp1 + fn1
    support0 = tn1 + fp1
    total = support1 + support0
    weighted = (
        (support1 * f1_anom + support0 * f1_norm) / total if total else 0.0
    )
    return F1Breakdown(
        weighted_f1=weighted,
        f1_anomalous=f1_anom,
        f1_normal=f1_norm,
        support_anomalous=support1,
        support_normal=support0,
        abstained=abstained,
    )


def weighted_f1(pred: PredictionSeries, truth: LabelMatrix, cells) -> float:
    """Weighted F1 over an explicit set of (node_index, bin) cells."""
    cells = list(cells)
    if not cells:
        raise ValueError("no cells to evaluate")
    rows = np.fromiter((c[0] for c in cells), dtype=np.int64, count=len(cells))
    cols = np.fromiter((c[1] for c in cells), dtype=np.int64, count=len(cells))
    out_of_range = (
        (rows < 0)
        | (rows >= pred.node_count)
        | (cols < 0)
        | (cols >= pred.num_bins)
    )
    if out_of_range.any():
        bad = [cells[i] for i in np.nonzero(out_of_range)[0][:10]]
        raise CoverageGapError(bad)
    t = truth.combined()[rows, cols]
    p = pred.verdicts[rows, cols]
    return weighted_f1_from_arrays(t, p).weighted_f1


def _cells_for_bins(node_count: int, bins) -> tuple:
    rows = np.repeat(np.arange(node_count), len(bins))
    cols = np.tile(np.asarray(list(bins), dtype=np.int64), node_count)
    return rows, cols


def _breakdown_for_bins(pred: PredictionSeries, truth: LabelMatrix, bins) -> F1Breakdown:
    rows, cols = _cells_for_bins(pred.node_count, bins)
    return weighted_f1_from_arrays(truth.combined()[rows, cols], pred.verdicts[rows, cols])


@dataclass(frozen=True)
class GridSearchResult:
    best_window: int
    best_f1: float
    evaluations: tuple  # ((window, f1 or None, error or None), ...)


def grid_search_window(
    detector_spec: DetectorSpec,
    snap,
    labels: LabelMatrix,
    z: int,
    lag: int = 1,
    train_fraction: float = 0.8,
) -> GridSearchResult:
    """Pick the history window in {1, ..., 2z} by validation F1.

    The validation slice is the last 20% of the training region, held
    out from calibration (detectors see only the remaining training
    bins). Ties break toward the smallest window; windows whose
    detector run fails are recorded and skipped.
    """
    split = temporal_split(snap.num_bins, z, train_fraction=train_fraction)
    train_len = len(split.train_bins)
    val_len = max(1, math.floor(GRID_VALIDATION_FRACTION * train_len))
    cal_end = train_len - val_len
    if cal_end < 1:
        raise SequenceTooShortError(snap.num_bins, z)
    val_bins = [
        b
        for b in range(cal_end, train_len)
        if labels.defined_lo <= b <= labels.defined_hi
    ]
    if not val_bins:
        raise SequenceTooShortError(snap.num_bins, z)
    view = TrainingView(labels=labels, train_bins=range(0, cal_end))

    best_window = None
    best_f1 = -1.0
    evaluations = []
    last_error = None
    for w in range(1, 2 * z + 1):
        spec_w = detector_spec.with_window(w)
        try:
            spec_w.validate()
            pred = run_detector(snap, view, spec_w, lag=lag, test_bins=val_bins)
            f1 = _breakdown_for_bins(pred, labels, val_bins).weighted_f1
        except BenchmarkError as exc:
            evaluations.append((w, None, f"{type(exc).__name__}: {exc}"))
            last_error = (w, exc)
            continue
        evaluations.append((w, f1, None))
        if f1 > best_f1:
            best_f1 = f1
            best_window = w
    if best_window is None:
        w, exc = last_error
        raise BenchmarkError(f"all windows failed; last (w={w}): {exc}") from exc
    return GridSearchResult(
        best_window=best_window, best_f1=best_f1, evaluations=tuple(evaluations)
    )


@dataclass(frozen=True)
class BenchParams:
    """Knobs shared by a whole benchmark run (echoed into reports)."""

    rule_params: RuleParams = field(default_factory=RuleParams)
    train_fraction: float = 0.8
    lag: int = 1
    grid_search: bool = True
    jobs: int = 1

    @property
    def z(self) -> int:
        return self.rule_params.z


@dataclass
class InstanceResult:
    instance: int
    f1: float
    window: int
    f1_anomalous: float
    f1_normal: float
    support_anomalous: int
    support_normal: int
    abstained: int
    threshold: float | None = None


@dataclass
class DetectorReport:
    name: str
    kind: str
    per_instance: list
    failures: list  # (instance, reason)
    mean_f1: float
    std_f1: float
    spec_echo: dict = field(default_factory=dict)

    def recompute_aggregates(self) -> tuple:
        vals = np.array([r.f1 for r in self.per_instance], dtype=float)
        if len(vals) == 0:
            return 0.0, 0.0
        return float(vals.mean()), float(vals.std())


@dataclass
class BenchReport:
    num_instances: int
    z: int
    lag: int
    train_fraction: float
    detectors: list
    detector_windows: dict = field(default_factory=dict)

    def to_dicts(self) -> list:
        out = []
        for d in self.detectors:
            out.append(
                {
                    "detector": d.name,
                    "kind": d.kind,
                    "spec": d.spec_echo,
                    "mean_f1": d.mean_f1,
                    "std_f1": d.std_f1,
                    "n": len(d.per_instance),
                    "per_instance": [
                        {
                            "instance": r.instance,
                            "f1": r.f1,
                            "window": r.window,
                            "f1_anomalous": r.f1_anomalous,
                            "f1_normal": r.f1_normal,
                            "support_anomalous": r.support_anomalous,
                            "support_normal": r.support_normal,
                            "abstained": r.abstained,
                            "threshold": r.threshold,
                        }
                        for r in d.per_instance
                    ],
                    "failures": [
                        {"instance": i, "reason": reason} for i, reason in d.failures
                    ],
                }
            )
        return out

    def to_table(self) -> str:
        lines = [
            f"weighted F1 over n={self.num_instances} instances "
            f"(z={self.z}, lag={self.lag}, train={self.train_fraction})",
            f"{'detector':<24}{'mean':>8}  {'std':>8}  {'n':>4}",
        ]
        for d in self.detectors:
            lines.append(
                f"{d.name:<24}{d.mean_f1:>8.3f}  {d.std_f1:>8.3f}  {len(d.per_instance):>4}"
            )
        return "\n".join(lines) + "\n"

    def to_plot_rows(self) -> list:
        rows = []
        for d in self.detectors:
            for r in d.per_instance:
                rows.append((d.name, r.instance, r.f1))
        return rows


def _labels_for(snap, params: BenchParams, labels_override):
    if labels_override is not None:
        return labels_override
    return label_graph(snap, params.rule_params)


def bench_cell(
    snap,
    labels: LabelMatrix,
    spec: DetectorSpec,
    params: BenchParams,
    window_override: int | None = None,
) -> InstanceResult:
    """Run one (instance, detector) cell: tune, fit, predict, score."""
    split = temporal_split(snap.num_bins, params.z, params.train_fraction)
    if not split.test_bins:
        raise EmptyTestRegionError(snap.num_bins, params.train_fraction)
    if window_override is not None:
        window = window_override
    elif params.grid_search:
        window = grid_search_window(
            spec, snap, labels, params.z, lag=params.lag,
            train_fraction=params.train_fraction,
        ).best_window
    else:
        window = spec.window
    final_spec = spec.with_window(window)
    view = TrainingView(labels=labels, train_bins=split.train_bins)
    pred = run_detector(snap, view, final_spec, lag=params.lag, test_bins=split.test_bins)
    bd = _breakdown_for_bins(pred, labels, split.test_bins)
    thr = pred.meta.get("threshold")
    return InstanceResult(
        instance=-1,
        f1=bd.weighted_f1,
        window=window,
        f1_anomalous=bd.f1_anomalous,
        f1_normal=bd.f1_normal,
        support_anomalous=bd.support_anomalous,
        support_normal=bd.support_normal,
        abstained=bd.abstained,
        threshold=float(thr) if thr is not None else None,
    )


def _bench_task(args):
    snap, labels, spec, params, window_override, instance_index = args
    try:
        res = bench_cell(snap, labels, spec, params, window_override)
        res.instance = instance_index
        return ("ok", instance_index, spec.label, res)
    except BenchmarkError as exc:
        return ("fail", instance_index, spec.label, f"{type(exc).__name__}: {exc}")


def benchmark(
    snaps,
    detector_specs,
    params: BenchParams,
    labels_list=None,
    window_overrides: dict | None = None,
) -> BenchReport:
    """Score every detector on every instance and aggregate.

    Per detector: weighted F1 per instance, population mean/std over
    instances, chosen windows, and per-instance failures (recorded, not
    silently dropped). ``labels_list`` supplies precomputed (or frozen)
    labels; ``window_overrides`` maps detector label -> fixed window and
    bypasses the grid search.
    """
    snaps = list(snaps)
    if labels_list is None:
        labels_list = [label_graph(s, params.rule_params) for s in snaps]
    tasks = []
    for i, (snap, labels) in enumerate(zip(snaps, labels_list)):
        for spec in detector_specs:
            override = (window_overrides or {}).get(spec.label)
            tasks.append((snap, labels, spec, params, override, i))

    if params.jobs > 1:
        with ProcessPoolExecutor(max_workers=params.jobs) as pool:
            outcomes = list(pool.map(_bench_task, tasks))
    else:
        outcomes = [_bench_task(t) for t in tasks]

    by_detector: dict = {spec.label: ([], []) for spec in detector_specs}
    for status, instance, label, payload in outcomes:
        ok_rows, failures = by_detector[label]
        if status == "ok":
            ok_rows.append(payload)
        else:
            failures.append((instance, payload))

    reports = []
    windows: dict = {}
    for spec in detector_specs:
        ok_rows, failures = by_detector[spec.label]
        ok_rows.sort(key=lambda r: r.instance)
        vals = np.array([r.f1 for r in ok_rows], dtype=float)
        mean = float(vals.mean()) if len(vals) else 0.0
        std = float(vals.std()) if len(vals) else 0.0
        reports.append(
            DetectorReport(
                name=spec.label,
                kind=spec.kind,
                per_instance=ok_rows,
                failures=sorted(failures),
                mean_f1=mean,
                std_f1=std,
                spec_echo={
                    "window": spec.window,
                    "rng_seed": spec.rng_seed,
                    "hyperparameters": dict(spec.hyperparameters),
                },
            )
        )
        if ok_rows:
            ws = sorted(r.window for r in ok_rows)
            windows[spec.label] = ws[(len(ws) - 1) // 2]  # lower median
    return BenchReport(
        num_instances=len(snaps),
        z=params.z,
        lag=params.lag,
        train_fraction=params.train_fraction,
        detectors=reports,
        detector_windows=windows,
    )
