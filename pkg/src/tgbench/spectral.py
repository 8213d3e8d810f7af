"""Spectral radius of ego interaction matrices.

The ego matrix of a node over a bin window is symmetric and star-shaped:
nonzero entries only between the center and each window-active partner.
Its spectral radius therefore has the closed form sqrt(sum of squared
partner weights), which the fast paths use; ``power_iteration_radius``
is the generic route kept for arbitrary symmetric matrices and used to
cross-check the closed form.
"""

from __future__ import annotations

import numpy as np


def power_iteration_radius(
    matrix: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
) -> float:
    """Spectral radius of a symmetric matrix by power iteration.

    The per-step estimate is ||M x|| for unit x, which converges to the
    radius even when +r and -r are both eigenvalues (star matrices),
    where the Rayleigh quotient would not.
    """
    M = np.asarray(matrix, dtype=float)
    n = M.shape[0]
    if n == 0 or not M.any():
        return 0.0
    if max_iter is None:
        max_iter = 10 * n
    x = np.ones(n) / np.sqrt(n)
    estimate = 0.0
    for _ in range(max_iter):
        y = M @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(norm - estimate) < tol:
            return norm
        estimate = norm
    return estimate


def star_radius(weights) -> float:
    """Closed-form spectral radius of a star-shaped symmetric matrix."""
    w = np.asarray(weights, dtype=float)
    return float(np.sqrt(np.sum(w * w)))


def star_matrix(weights) -> np.ndarray:
    """Dense ego matrix with the center at row 0 (for tests/cross-checks)."""
    w = np.asarray(weights, dtype=float)
    n = len(w) + 1
    M = np.zeros((n, n))
    M[0, 1:] = w
    M[1:, 0] = w
    return M


def undirected_pair_bins(snap) -> list:
    """Per bin: dict mapping unordered pair (a, b), a < b -> event count."""
    out = []
    for b in snap.bins:
        pairs = {}
        for (s, t), c in b.items():
            key = (s, t) if s < t else (t, s)
            pairs[key] = pairs.get(key, 0) + c
        out.append(pairs)
    return out


def windowed_ego_sumsq(snap, window_len: int) -> np.ndarray:
    """Sliding-window sum of squared partner weights, per node.

    Output column ``s`` covers bins [s, s + window_len - 1]; entry
    [v, s] equals sum over partners u of (events between u and v in the
    window)^2, i.e. the squared unnormalized ego spectral radius. Slides
    incrementally: each pair delta updates both endpoints in O(1).
    """
    n, T = snap.node_count, snap.num_bins
    L = window_len
    if L < 1 or L > T:
        raise ValueError(f"window length {L} outside [1, {T}]")
    idx = snap.node_index()
    pair_bins = undirected_pair_bins(snap)
    num_windows = T - L + 1
    out = np.zeros((n, num_windows), dtype=np.int64)
    ss = np.zeros(n, dtype=np.int64)
    weights = {}

    def apply(pairs, sign):
        for (a, b), c in pairs.items():
            old = weights.get((a, b), 0)
            new = old + sign * c
            if new:
                weights[(a, b)] = new
            else:
                weights.pop((a, b), None)
            delta = new * new - old * old
            ss[idx[a]] += delta
            ss[idx[b]] += delta

    for t in range(L):
        apply(pair_bins[t], +1)
    out[:, 0] = ss
    for s in range(1, num_windows):
        apply(pair_bins[s - 1], -1)
        apply(pair_bins[s + L - 1], +1)
        out[:, s] = ss
    return out


def ego_radius_centered(snap, z: int, normalize: bool = True) -> np.ndarray:
    """Ego spectral radius over centered windows [t-z, t+z].

    Entry [v, t] is defined for t in [z, T-1-z] and NaN elsewhere. With
    ``normalize`` the per-partner weights are divided by the window
    length 2z+1, making a fixed threshold mean "more than one interaction
    per bin with a single partner".
    """
    T = snap.num_bins
    L = 2 * z + 1
    ssq = windowed_ego_sumsq(snap, L)
    radius = np.full((snap.node_count, T), np.nan)
    radius[:, z : T - z] = np.sqrt(ssq.astype(float))
    if normalize:
        radius[:, z : T - z] /= L
    return radius


def ego_radius_past(snap, w: int, normalize: bool = True) -> np.ndarray:
    """Ego spectral radius over past windows [t-w+1, t].

    Entry [v, t] is defined for t >= w-1 and NaN before that; weights are
    normalized by the window length w.
    """
    T = snap.num_bins
    ssq = windowed_ego_sumsq(snap, w)
    radius = np.full((snap.node_count, T), np.nan)
    radius[:, w - 1 :] = np.sqrt(ssq.astype(float))
    if normalize:
        radius[:, w - 1 :] /= w
    return radius
