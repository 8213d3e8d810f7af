"""Temporal interaction graphs and their binned snapshot sequences.

An interaction stream is a list of timestamped directed events
(``source`` acts on ``target``'s content). Binning aggregates the stream
into a sequence of sparse directed multigraphs with fixed-width time
bins; all downstream statistics (neighbor sets, degree series) are
defined on that binned representation.

Neighbor semantics: ``neighbor_set(snap, v, t)`` is the set of distinct
*incoming* partners of ``v`` in bin ``t`` (nodes that acted on ``v``),
and the degree series counts those partners, not raw event multiplicity.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import (
    BinOutOfRangeError,
    EmptyGraphError,
    NegativeTimestampError,
    SelfLoopError,
    UnknownNodeError,
)

DEFAULT_BIN_WIDTH = 900  # seconds


class Action(str, Enum):
    LIKE = "like"
    COMMENT = "comment"
    SHARE = "share"


@dataclass(frozen=True)
class InteractionEvent:
    """One directed timestamped action of ``source`` on ``target``."""

    source: int
    target: int
    timestamp: int
    action: Action = Action.LIKE

    def sort_key(self):
        return (self.timestamp, self.source, self.target, self.action.value)


@dataclass(frozen=True)
class TemporalGraph:
    """Immutable event stream plus its node universe.

    ``events`` is totally ordered by (timestamp, source, target, action);
    ``node_state_count`` is carried for callers that model per-node state
    machines but is not interpreted anywhere in this package.
    """

    nodes: frozenset
    events: tuple
    node_state_count: int | None = None

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def node_list(self) -> tuple:
        return tuple(sorted(self.nodes))

    def check_sorted(self) -> bool:
        keys = [e.sort_key() for e in self.events]
        return all(a <= b for a, b in zip(keys, keys[1:]))


@dataclass(frozen=True)
class SnapshotSequence:
    """Binned temporal graph: per bin a sparse map (source, target) -> count.

    Node identity is preserved from the source graph; ``node_ids`` fixes a
    canonical (sorted) ordering used by every matrix produced downstream,
    so row ``i`` always refers to ``node_ids[i]``. Instances are immutable:
    perturbations return new sequences.
    """

    bin_width: int
    node_ids: tuple
    bins: tuple  # tuple[dict[(source, target), int], ...]
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    def node_index(self) -> dict:
        idx = self.meta.get("_node_index")
        if idx is None:
            idx = {v: i for i, v in enumerate(self.node_ids)}
            self.meta["_node_index"] = idx
        return idx

    def total_events(self) -> int:
        return sum(sum(b.values()) for b in self.bins)

    def content_hash(self) -> str:
        """Stable digest of the binned content (ignores meta)."""
        h = hashlib.sha256()
        h.update(f"w={self.bin_width};n={self.node_count};T={self.num_bins};".encode())
        h.update(",".join(str(v) for v in self.node_ids).encode())
        for b in self.bins:
            h.update(";".join(f"{s},{t}:{c}" for (s, t), c in sorted(b.items())).encode())
            h.update(b"|")
        return h.hexdigest()


@dataclass(frozen=True)
class DegreeSeries:
    """Per-bin count of distinct incoming partners for one node."""

    node: int
    values: np.ndarray  # int64, length num_bins


def build_graph(
    events: Iterable[InteractionEvent],
    node_universe: Iterable[int] | None = None,
    node_state_count: int | None = None,
) -> TemporalGraph:
    """Validate, sort and assemble an event stream into a TemporalGraph.

    Self-interactions and negative timestamps are rejected with the index
    of the offending event. The node set is the union of all endpoints
    and the optional explicit universe.
    """
    evs = list(events)
    for i, e in enumerate(evs):
        if e.source == e.target:
            raise SelfLoopError(i)
        if e.timestamp < 0:
            raise NegativeTimestampError(i)
    if not evs and node_universe is None:
        raise EmptyGraphError("no events given and no node universe to fall back on")
    nodes = set(node_universe) if node_universe is not None else set()
    for e in evs:
        nodes.add(e.source)
        nodes.add(e.target)
    evs.sort(key=lambda e: e.sort_key())
    return TemporalGraph(
        nodes=frozenset(nodes),
        events=tuple(evs),
        node_state_count=node_state_count,
    )


def bin_events(
    graph: TemporalGraph,
    bin_width: int = DEFAULT_BIN_WIDTH,
    time_span: tuple | None = None,
) -> SnapshotSequence:
    """Aggregate events into fixed-width bins.

    The bin origin is anchored at floor(ts_min / bin_width) so bin indices
    always start at 0 regardless of absolute epoch. ``time_span`` (lo, hi)
    fixes the covered range explicitly, which is the only way to bin an
    event-free graph.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if time_span is not None:
        lo, hi = time_span
        if lo < 0 or hi < lo:
            raise ValueError(f"bad time span ({lo}, {hi})")
        if graph.events:
            lo = min(lo, graph.events[0].timestamp)
            hi = max(hi, graph.events[-1].timestamp)
    elif graph.events:
        lo = graph.events[0].timestamp
        hi = graph.events[-1].timestamp
    else:
        raise EmptyGraphError()

    origin = lo // bin_width
    num_bins = hi // bin_width - origin + 1
    bins = [dict() for _ in range(num_bins)]
    for e in graph.events:
        b = e.timestamp // bin_width - origin
        d = bins[b]
        key = (e.source, e.target)
        d[key] = d.get(key, 0) + 1
    return SnapshotSequence(
        bin_width=bin_width,
        node_ids=graph.node_list(),
        bins=tuple(bins),
    )


def neighbor_set(snap: SnapshotSequence, v: int, t: int) -> set:
    """Distinct nodes that acted on ``v`` in bin ``t`` (incoming only)."""
    if not 0 <= t < snap.num_bins:
        raise BinOutOfRangeError(t, snap.num_bins)
    if v not in snap.node_index():
        raise UnknownNodeError(v)
    return {src for (src, dst) in snap.bins[t] if dst == v}


def degree_series(snap: SnapshotSequence, v: int) -> DegreeSeries:
    """Length-T vector of |neighbor_set(snap, v, t)| for every bin t."""
    if v not in snap.node_index():
        raise UnknownNodeError(v)
    values = np.zeros(snap.num_bins, dtype=np.int64)
    for t, b in enumerate(snap.bins):
        values[t] = sum(1 for (src, dst) in b if dst == v)
    return DegreeSeries(node=v, values=values)


def bin_arrays(snap: SnapshotSequence):
    """Per-bin (source_idx, target_idx, counts) index arrays.

    Edge order within each bin is sorted by (source, target) so every
    consumer sees an identical deterministic layout.
    """
    idx = snap.node_index()
    out = []
    for b in snap.bins:
        items = sorted(b.items())
        if items:
            src = np.fromiter((idx[s] for (s, t), _ in items), dtype=np.int64, count=len(items))
            dst = np.fromiter((idx[t] for (s, t), _ in items), dtype=np.int64, count=len(items))
            cnt = np.fromiter((c for _, c in items), dtype=np.int64, count=len(items))
        else:
            src = dst = cnt = np.zeros(0, dtype=np.int64)
        out.append((src, dst, cnt))
    return out


def in_degree_matrix(snap: SnapshotSequence) -> np.ndarray:
    """[node, bin] matrix of distinct incoming partner counts."""
    n, T = snap.node_count, snap.num_bins
    D = np.zeros((n, T), dtype=np.int64)
    for t, (src, dst, _) in enumerate(bin_arrays(snap)):
        if len(dst):
            np.add.at(D[:, t], dst, 1)
    return D


def out_degree_matrix(snap: SnapshotSequence) -> np.ndarray:
    """[node, bin] matrix of distinct outgoing partner counts."""
    n, T = snap.node_count, snap.num_bins
    D = np.zeros((n, T), dtype=np.int64)
    for t, (src, dst, _) in enumerate(bin_arrays(snap)):
        if len(src):
            np.add.at(D[:, t], src, 1)
    return D


def in_event_count_matrix(snap: SnapshotSequence) -> np.ndarray:
    """[node, bin] matrix of incoming event counts (multiplicity kept)."""
    n, T = snap.node_count, snap.num_bins
    D = np.zeros((n, T), dtype=np.int64)
    for t, (src, dst, cnt) in enumerate(bin_arrays(snap)):
        if len(dst):
            np.add.at(D[:, t], dst, cnt)
    return D


def incident_event_count_matrix(snap: SnapshotSequence) -> np.ndarray:
    """[node, bin] matrix of events touching the node in either direction."""
    n, T = snap.node_count, snap.num_bins
    D = np.zeros((n, T), dtype=np.int64)
    for t, (src, dst, cnt) in enumerate(bin_arrays(snap)):
        if len(src):
            np.add.at(D[:, t], src, cnt)
            np.add.at(D[:, t], dst, cnt)
    return D
