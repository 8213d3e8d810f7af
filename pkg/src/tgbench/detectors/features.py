"""Per-(node, bin) feature rows for the isolation-forest detector.

Five causal features per cell, all computed from bins <= t:
distinct incoming partners, incoming event count, distinct outgoing
partners, first difference of the incoming-partner count, and the
event count touching the node over the last ``w`` bins.
"""

from __future__ import annotations

import numpy as np

from ..graph import (
    in_degree_matrix,
    in_event_count_matrix,
    incident_event_count_matrix,
    out_degree_matrix,
)

FEATURE_COUNT = 5


def feature_matrix(snap, w: int) -> np.ndarray:
    """float64 [node, bin, feature] tensor.

    The trailing-window feature uses truncated windows for t < w-1;
    callers that need full windows restrict rows to t >= w-1. The first
    difference at t=0 treats the preceding bin as empty.
    """
    if w < 1:
        raise ValueError("w must be at least 1")
    n, T = snap.node_count, snap.num_bins
    D_in = in_degree_matrix(snap).astype(float)
    E_in = in_event_count_matrix(snap).astype(float)
    D_out = out_degree_matrix(snap).astype(float)
    delta = np.empty_like(D_in)
    delta[:, 0] = D_in[:, 0]
    delta[:, 1:] = D_in[:, 1:] - D_in[:, :-1]
    incident = incident_event_count_matrix(snap).astype(float)
    csum = np.concatenate([np.zeros((n, 1)), np.cumsum(incident, axis=1)], axis=1)
    lo = np.maximum(np.arange(T) - w + 1, 0)
    ego = csum[:, np.arange(T) + 1] - csum[:, lo]

    X = np.empty((n, T, FEATURE_COUNT))
    X[:, :, 0] = D_in
    X[:, :, 1] = E_in
    X[:, :, 2] = D_out
    X[:, :, 3] = delta
    X[:, :, 4] = ego
    return X


def first_full_bin(w: int) -> int:
    """Earliest bin whose feature row uses complete stencils/windows."""
    return max(w - 1, 1)
