import numpy as np
import pytest

from tgbench.graph import Action, InteractionEvent, bin_events, build_graph

ACTIONS = (Action.LIKE, Action.COMMENT, Action.SHARE)


def random_events(rng, n_nodes, n_events, t_max):
    events = []
    for _ in range(n_events):
        s = int(rng.integers(n_nodes))
        d = int(rng.integers(n_nodes - 1))
        if d >= s:
            d += 1
        events.append(
            InteractionEvent(s, d, int(rng.integers(t_max)), ACTIONS[int(rng.integers(3))])
        )
    return events


def random_graph(rng, n_nodes=10, n_events=200, t_max=30 * 900):
    return build_graph(
        random_events(rng, n_nodes, n_events, t_max), node_universe=range(n_nodes)
    )


def random_snapshot(rng, n_nodes=10, n_events=200, n_bins=30, bin_width=900):
    graph = build_graph(
        random_events(rng, n_nodes, n_events, n_bins * bin_width - 1),
        node_universe=range(n_nodes),
    )
    return bin_events(graph, bin_width, time_span=(0, n_bins * bin_width - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def star_snapshot():
    """Events (1,0), (2,0), (2,0) all in bin 0."""
    events = [
        InteractionEvent(1, 0, 10),
        InteractionEvent(2, 0, 20),
        InteractionEvent(2, 0, 30, Action.COMMENT),
    ]
    graph = build_graph(events, node_universe=range(3))
    return bin_events(graph, 900)
