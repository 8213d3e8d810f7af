"""BFS subgraph sampling for building instance populations.

BFS runs on the static projection of the event stream: timestamps are
dropped, duplicate edges collapse, and (by default) direction is ignored
so that weakly connected regions are not artificially truncated. The
returned instance is the induced temporal subgraph over the collected
node set.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import InsufficientComponentError, SamplingExhaustedError, UnknownNodeError
from .graph import TemporalGraph, build_graph


def static_adjacency(graph: TemporalGraph, respect_direction: bool = False) -> dict:
    """node -> sorted neighbor list of the deduplicated static projection."""
    adj = {v: set() for v in graph.nodes}
    for e in graph.events:
        adj[e.source].add(e.target)
        if not respect_direction:
            adj[e.target].add(e.source)
    return {v: sorted(neigh) for v, neigh in adj.items()}


def _bfs_collect(adjacency: dict, seed_node: int, target_size: int) -> list:
    visited = {seed_node}
    order = [seed_node]
    queue = deque([seed_node])
    while queue and len(order) < target_size:
        u = queue.popleft()
        for w in adjacency[u]:
            if w in visited:
                continue
            visited.add(w)
            order.append(w)
            queue.append(w)
            if len(order) == target_size:
                break
    if len(order) < target_size:
        raise InsufficientComponentError(reached=len(order), requested=target_size)
    return order


def induced_subgraph(graph: TemporalGraph, nodes) -> TemporalGraph:
    """Temporal subgraph over ``nodes``: events with both endpoints inside."""
    keep = set(nodes)
    events = [e for e in graph.events if e.source in keep and e.target in keep]
    return build_graph(events, node_universe=keep, node_state_count=graph.node_state_count)


def bfs_sample(
    graph: TemporalGraph,
    seed_node: int,
    target_size: int,
    respect_direction: bool = False,
    _adjacency: dict | None = None,
) -> TemporalGraph:
    """Collect exactly ``target_size`` nodes by BFS from ``seed_node``.

    FIFO queue, neighbors enqueued in ascending node id, so repeated runs
    are identical. Raises InsufficientComponentError when the component
    runs out first; callers resample a new seed.
    """
    if seed_node not in graph.nodes:
        raise UnknownNodeError(seed_node)
    if target_size < 1:
        raise ValueError("target_size must be positive")
    adjacency = _adjacency if _adjacency is not None else static_adjacency(graph, respect_direction)
    order = _bfs_collect(adjacency, seed_node, target_size)
    return induced_subgraph(graph, order)


def sample_instances(
    graph: TemporalGraph,
    n: int,
    target_size: int,
    rng_seed: int,
    respect_direction: bool = False,
) -> list:
    """Draw ``n`` instances from uniformly random BFS seeds.

    Seeds that land in a too-small component are discarded and redrawn,
    up to 100 * n attempts in total.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(rng_seed)
    node_list = graph.node_list()
    adjacency = static_adjacency(graph, respect_direction)
    instances = []
    max_attempts = 100 * n
    attempts = 0
    while len(instances) < n:
        if attempts >= max_attempts:
            raise SamplingExhaustedError(
                attempts=attempts, collected=len(instances), requested=n
            )
        attempts += 1
        seed_node = node_list[int(rng.integers(len(node_list)))]
        try:
            order = _bfs_collect(adjacency, seed_node, target_size)
        except InsufficientComponentError:
            continue
        instances.append(induced_subgraph(graph, order))
    return instances
