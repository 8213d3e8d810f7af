"""Rolling z-score detector over past-only degree windows."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..graph import in_degree_matrix
from .base import (
    PRED_ABSTAIN,
    PRED_ANOMALOUS,
    PRED_NORMAL,
    PredictionSeries,
    register_detector,
)


def detect_rolling_zscore(snap, train, spec, lag: int = 1) -> PredictionSeries:
    """Flag (v, t+lag) when N_t(v) exceeds mean + k*popstd of [t-w, t-1].

    Strictly causal: the window never includes t itself. Zero-variance
    windows degrade to a plain mean test so a flat history followed by
    any increase still flags. Bins earlier than w+lag abstain.
    """
    w = spec.window
    k = float(spec.hp("std_multiplier", 3.0))
    n, T = snap.node_count, snap.num_bins
    D = in_degree_matrix(snap).astype(float)
    verdicts = np.full((n, T), PRED_ABSTAIN, dtype=np.int8)
    if T > w:
        # window ending at t-1 exists for t in [w, T-1]
        win = sliding_window_view(D[:, : T - 1], w, axis=1)  # covers [t-w, t-1]
        mean = win.mean(axis=-1)
        std = win.std(axis=-1)
        current = D[:, w:]  # N_t for t in [w, T-1]
        flagged = np.where(
            std > 0.0,
            current > mean + k * std,
            current > mean,
        )
        # verdict lands at s = t + lag
        s_lo = w + lag
        count = min(T - s_lo, flagged.shape[1])
        if count > 0:
            verdicts[:, s_lo : s_lo + count] = np.where(
                flagged[:, :count], PRED_ANOMALOUS, PRED_NORMAL
            ).astype(np.int8)
    return PredictionSeries(
        verdicts=verdicts, lag=lag, meta={"window": w, "std_multiplier": k}
    )


register_detector("rolling_zscore", detect_rolling_zscore)
