"""Isolation forest scored per (node, bin) feature row.

Classic construction: each tree recursively splits a subsample on a
random feature at a random cut until isolation or the height limit; the
anomaly score is 2^(-E[path length]/c(n)) with the average-path
normalizer c(n) of unsuccessful BST search. Trees are stored as flat
arrays so scoring is vectorized over rows.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from ..errors import InsufficientTrainRowsError
from .base import (
    PRED_ABSTAIN,
    PRED_ANOMALOUS,
    PRED_NORMAL,
    PredictionSeries,
    register_detector,
)
from .features import FEATURE_COUNT, feature_matrix, first_full_bin

EULER_GAMMA = 0.5772156649015329
DEFAULT_QUANTILE = 0.98


def average_path_length(n: int) -> float:
    """c(n): expected path length of unsuccessful search in a BST of n keys."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    h = math.log(n - 1) + EULER_GAMMA
    return 2.0 * h - 2.0 * (n - 1) / n


class _Tree:
    """One isolation tree in flat-array form."""

    __slots__ = ("feature", "threshold", "left", "right", "size", "depth")

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.size = []
        self.depth = []

    def _add(self, feature, threshold, size, depth):
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.size.append(size)
        self.depth.append(depth)
        return len(self.feature) - 1

    def build(self, X: np.ndarray, rng, height_limit: int):
        self._grow(X, np.arange(X.shape[0]), rng, 0, height_limit)
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.size = np.asarray(self.size, dtype=np.int64)
        self.depth = np.asarray(self.depth, dtype=np.int64)
        return self

    def _grow(self, X, idx, rng, depth, height_limit) -> int:
        size = len(idx)
        if depth >= height_limit or size <= 1:
            return self._add(-1, 0.0, size, depth)
        sub = X[idx]
        spread = sub.max(axis=0) - sub.min(axis=0)
        candidates = np.nonzero(spread > 0)[0]
        if len(candidates) == 0:
            return self._add(-1, 0.0, size, depth)
        q = int(candidates[rng.integers(len(candidates))])
        lo = float(sub[:, q].min())
        hi = float(sub[:, q].max())
        p = float(rng.uniform(lo, hi))
        node = self._add(q, p, size, depth)
        mask = sub[:, q] < p
        left = self._grow(X, idx[mask], rng, depth + 1, height_limit)
        right = self._grow(X, idx[~mask], rng, depth + 1, height_limit)
        self.left[node] = left
        self.right[node] = right
        return node

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        """Vectorized per-row path length including the leaf-size credit."""
        out = np.zeros(X.shape[0])
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if len(idx) == 0:
                continue
            if self.feature[node] < 0:
                out[idx] = self.depth[node] + average_path_length(int(self.size[node]))
                continue
            mask = X[idx, self.feature[node]] < self.threshold[node]
            stack.append((int(self.left[node]), idx[mask]))
            stack.append((int(self.right[node]), idx[~mask]))
        return out


class IsolationForest:
    def __init__(self, n_trees: int = 100, subsample: int = 256, rng_seed: int = 0):
        self.n_trees = n_trees
        self.subsample = subsample
        self.rng_seed = rng_seed
        self.trees: list = []
        self._c = 0.0

    def fit(self, X: np.ndarray) -> "IsolationForest":
        n_rows = X.shape[0]
        if n_rows < self.subsample:
            raise InsufficientTrainRowsError(rows=n_rows, required=self.subsample)
        rng = np.random.default_rng(self.rng_seed)
        height_limit = math.ceil(math.log2(self.subsample))
        self.trees = []
        for _ in range(self.n_trees):
            idx = rng.choice(n_rows, size=self.subsample, replace=False)
            self.trees.append(_Tree().build(X[idx], rng, height_limit))
        self._c = average_path_length(self.subsample)
        return self

    def score(self, X: np.ndarray) -> np.ndarray:
        """Anomaly scores in (0, 1]; larger means more isolated."""
        paths = np.zeros(X.shape[0])
        for tree in self.trees:
            paths += tree.path_lengths(X)
        paths /= len(self.trees)
        return np.power(2.0, -paths / self._c)

    def structure_digest(self) -> str:
        """Stable digest of all tree structures (for leak audits)."""
        h = hashlib.sha256()
        for tree in self.trees:
            for arr in (tree.feature, tree.threshold, tree.left, tree.right, tree.size):
                h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def detect_isolation_forest(snap, train, spec, lag: int = 1) -> PredictionSeries:
    """Fit on train-region feature rows, flag test cells above a quantile.

    Rows enter training from the first bin with complete feature
    stencils; the threshold is the train-score ``quantile`` (default
    0.98). Verdicts at s use the feature row of bin s - lag, so bins
    before w + lag abstain.
    """
    w = spec.window
    n_trees = int(spec.hp("n_trees", 100))
    subsample = int(spec.hp("subsample", 256))
    quantile = float(spec.hp("quantile", DEFAULT_QUANTILE))
    n, T = snap.node_count, snap.num_bins

    X = feature_matrix(snap, w)
    t0 = first_full_bin(w)
    train_lo, train_hi = t0, train.train_end  # half-open
    if train_hi <= train_lo:
        raise InsufficientTrainRowsError(rows=0, required=subsample)
    train_rows = X[:, train_lo:train_hi, :].reshape(-1, FEATURE_COUNT)
    forest = IsolationForest(n_trees=n_trees, subsample=subsample, rng_seed=spec.rng_seed)
    forest.fit(train_rows)
    threshold = float(np.quantile(forest.score(train_rows), quantile))

    verdicts = np.full((n, T), PRED_ABSTAIN, dtype=np.int8)
    s_lo = w + lag
    if s_lo < T:
        feat_bins = np.arange(s_lo, T) - lag
        rows = X[:, feat_bins, :].reshape(-1, FEATURE_COUNT)
        scores = forest.score(rows).reshape(n, len(feat_bins))
        verdicts[:, s_lo:] = np.where(
            scores > threshold, PRED_ANOMALOUS, PRED_NORMAL
        ).astype(np.int8)
    return PredictionSeries(
        verdicts=verdicts,
        lag=lag,
        meta={
            "window": w,
            "n_trees": n_trees,
            "subsample": subsample,
            "quantile": quantile,
            "threshold": threshold,
            "forest_digest": forest.structure_digest(),
        },
    )


register_detector("isolation_forest", detect_isolation_forest)
