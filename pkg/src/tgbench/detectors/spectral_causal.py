"""Causal ego-spectral detector: past-window analog of the spectral rule."""

from __future__ import annotations

import numpy as np

from ..spectral import ego_radius_past
from .base import (
    PRED_ABSTAIN,
    PRED_ANOMALOUS,
    PRED_NORMAL,
    PredictionSeries,
    register_detector,
)


def detect_spectral_causal(snap, train, spec, lag: int = 1) -> PredictionSeries:
    """Flag (v, t+lag) when the past-window ego radius exceeds a threshold.

    The ego matrix over bins [t-w+1, t] uses the same star construction
    as the spectral labeling rule, normalized by the window length w;
    the default threshold 1 therefore means "more than one interaction
    per bin with a single partner, on average".
    """
    w = spec.window
    threshold = float(spec.hp("eig_threshold", 1.0))
    n, T = snap.node_count, snap.num_bins
    radius = ego_radius_past(snap, w, normalize=True)
    verdicts = np.full((n, T), PRED_ABSTAIN, dtype=np.int8)
    s_lo = w - 1 + lag
    if s_lo < T:
        vals = radius[:, s_lo - lag : T - lag]
        verdicts[:, s_lo:] = np.where(
            vals > threshold, PRED_ANOMALOUS, PRED_NORMAL
        ).astype(np.int8)
    return PredictionSeries(
        verdicts=verdicts, lag=lag, meta={"window": w, "eig_threshold": threshold}
    )


register_detector("spectral_causal", detect_spectral_causal)
