"""Coin-flip baseline calibrated to the training positive rate."""

from __future__ import annotations

import numpy as np

from .base import PRED_ANOMALOUS, PRED_NORMAL, PredictionSeries, register_detector

RATE_FLOOR = 0.001
RATE_CEIL = 0.999


def detect_random(snap, train, spec, lag: int = 1) -> PredictionSeries:
    """Flag each cell independently with the train-region positive rate.

    The rate is clamped to [0.001, 0.999] so degenerate training labels
    still yield a usable baseline; the ``probability`` hyperparameter
    overrides it outright. Needs no history, so nothing abstains.
    """
    p = spec.hp("probability", None)
    if p is None:
        p = min(max(train.positive_rate(), RATE_FLOOR), RATE_CEIL)
    rng = np.random.default_rng(spec.rng_seed)
    draws = rng.random((snap.node_count, snap.num_bins))
    verdicts = np.where(draws < p, PRED_ANOMALOUS, PRED_NORMAL).astype(np.int8)
    return PredictionSeries(verdicts=verdicts, lag=lag, meta={"probability": float(p)})


register_detector("random", detect_random)
