"""Causal anomaly detectors over snapshot sequences.

All native detectors share one contract: given a snapshot sequence, a
training view (ground-truth labels restricted to the training bins) and
a DetectorSpec, produce a PredictionSeries whose verdict at bin ``s``
depends only on bins <= s - lag. External models attach through the
line-delimited JSON plugin protocol in :mod:`tgbench.detectors.plugin`.
"""

from .base import (
    PRED_ABSTAIN,
    PRED_ANOMALOUS,
    PRED_NORMAL,
    NATIVE_KINDS,
    DetectorSpec,
    PredictionSeries,
    TrainingView,
    available_kinds,
    register_detector,
    run_detector,
)
from .features import feature_matrix
from .iforest import IsolationForest, detect_isolation_forest
from .matrix_profile import (
    detect_matrix_profile,
    left_matrix_profile,
    matrix_profile,
)
from .plugin import run_plugin
from .random_rate import detect_random
from .rolling import detect_rolling_zscore
from .spectral_causal import detect_spectral_causal

__all__ = [
    "PRED_ABSTAIN",
    "PRED_ANOMALOUS",
    "PRED_NORMAL",
    "NATIVE_KINDS",
    "DetectorSpec",
    "PredictionSeries",
    "TrainingView",
    "available_kinds",
    "register_detector",
    "run_detector",
    "feature_matrix",
    "IsolationForest",
    "detect_isolation_forest",
    "detect_matrix_profile",
    "left_matrix_profile",
    "matrix_profile",
    "run_plugin",
    "detect_random",
    "detect_rolling_zscore",
    "detect_spectral_causal",
]
