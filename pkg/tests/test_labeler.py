import numpy as np
import pytest

from tgbench.errors import OutOfDefinedRangeError, SequenceTooShortError
from tgbench.graph import (
    DegreeSeries,
    InteractionEvent,
    bin_events,
    build_graph,
)
from tgbench.labeling import (
    RULE_CURVATURE,
    RULE_DEGREE_SPIKE,
    RULE_SPECTRAL,
    RuleParams,
    label_graph,
    rule_curvature,
    rule_degree_spike,
    rule_spectral,
)
from tgbench.spectral import power_iteration_radius, star_matrix, star_radius

from .conftest import random_snapshot
from .oracles import (
    brute_ego_weights,
    brute_label_masks,
    brute_rule_curvature,
    brute_rule_degree_spike,
    brute_rule_spectral,
    brute_spectral_radius_dense,
)


def series(values):
    return DegreeSeries(node=0, values=np.asarray(values, dtype=np.int64))


class TestRuleDegreeSpike:
    def test_constant_series_never_flags(self):
        assert rule_degree_spike(series([5] * 9), 4, RuleParams(z=4)) is False

    def test_worked_spike_example(self):
        # window mean 15/7, popstd ~2.7994, threshold ~7.7417 < 9
        assert rule_degree_spike(series([1, 1, 1, 9, 1, 1, 1]), 3, RuleParams(z=3)) is True

    def test_worked_small_spike_example(self):
        # threshold ~2.6855 < 3
        assert rule_degree_spike(series([1, 1, 1, 3, 1, 1, 1]), 3, RuleParams(z=3)) is True

    def test_out_of_range(self):
        with pytest.raises(OutOfDefinedRangeError):
            rule_degree_spike(series([1] * 9), 1, RuleParams(z=4))

    def test_shift_invariance(self, rng):
        vals = rng.integers(0, 10, size=21)
        p = RuleParams(z=4)
        for t in range(5, 16):
            base = rule_degree_spike(series(vals), t, p)
            shifted = rule_degree_spike(series(vals + 7), t, p)
            assert base == shifted

    def test_matches_oracle_on_random_series(self, rng):
        for _ in range(50):
            vals = rng.integers(0, 12, size=15)
            t = int(rng.integers(3, 12))
            assert rule_degree_spike(series(vals), t, RuleParams(z=3)) == \
                brute_rule_degree_spike(vals, t, 3)


class TestRuleCurvature:
    def test_constant_degree_series_false(self):
        # same edge repeated every bin: all degree series constant
        events = [InteractionEvent(1, 0, 900 * b + 5) for b in range(12)]
        snap = bin_events(build_graph(events, node_universe=range(3)), 900)
        assert rule_curvature(snap, 0, 5, RuleParams(z=3)) is False

    def test_isolated_node_false(self, rng):
        snap = random_snapshot(rng, n_nodes=6, n_events=60, n_bins=12)
        g = build_graph(
            [InteractionEvent(0, 1, 900 * b) for b in range(12)], node_universe=range(7)
        )
        snap = bin_events(build_graph(list(g.events), node_universe=range(7)), 900)
        assert rule_curvature(snap, 6, 5, RuleParams(z=3)) is False

    def test_matches_oracle_exhaustively(self, rng):
        snap = random_snapshot(rng, n_nodes=10, n_events=400, n_bins=30)
        p = RuleParams(z=3)
        for v in snap.node_ids:
            for t in range(p.z + 1, snap.num_bins - p.z - 1):
                assert rule_curvature(snap, v, t, p) == brute_rule_curvature(snap, v, t, 3)


class TestRuleSpectral:
    def test_no_interactions_false(self):
        g = build_graph([InteractionEvent(0, 1, 0)], node_universe=range(4))
        snap = bin_events(g, 900, time_span=(0, 11 * 900 - 1))
        assert rule_spectral(snap, 3, 5, RuleParams(z=2)) is False

    def test_one_event_per_bin_boundary_not_flagged(self):
        # one neighbor, one event per bin across all 2z+1 bins -> radius exactly 1
        z = 2
        events = [InteractionEvent(1, 0, 900 * b + 3) for b in range(2 * z + 1)]
        snap = bin_events(build_graph(events, node_universe=range(2)), 900)
        assert rule_spectral(snap, 0, z, RuleParams(z=z)) is False

    def test_two_events_per_bin_flagged(self):
        z = 2
        events = []
        for b in range(2 * z + 1):
            events.append(InteractionEvent(1, 0, 900 * b + 3))
            events.append(InteractionEvent(1, 0, 900 * b + 7))
        snap = bin_events(build_graph(events, node_universe=range(2)), 900)
        assert rule_spectral(snap, 0, z, RuleParams(z=z)) is True

    def test_two_neighbors_sqrt_two(self):
        # weights (1, 1): radius sqrt(2) > 1
        z = 1
        events = []
        for b in range(2 * z + 1):
            events.append(InteractionEvent(1, 0, 900 * b + 3))
            events.append(InteractionEvent(2, 0, 900 * b + 7))
        snap = bin_events(build_graph(events, node_universe=range(3)), 900)
        assert rule_spectral(snap, 0, z, RuleParams(z=z)) is True

    def test_matches_integer_oracle_exhaustively(self, rng):
        snap = random_snapshot(rng, n_nodes=8, n_events=500, n_bins=20)
        p = RuleParams(z=2)
        for v in snap.node_ids:
            for t in range(p.z, snap.num_bins - p.z):
                assert rule_spectral(snap, v, t, p) == brute_rule_spectral(snap, v, t, 2)

    def test_closed_form_matches_dense_eigensolver(self, rng):
        snap = random_snapshot(rng, n_nodes=8, n_events=300, n_bins=12)
        for v in snap.node_ids:
            weights = brute_ego_weights(snap, v, 5, 2)
            if not weights:
                continue
            w = np.array(sorted(weights.values()), dtype=float) / 5.0
            assert star_radius(w) == pytest.approx(
                brute_spectral_radius_dense(w), abs=1e-10
            )


class TestPowerIteration:
    def test_zero_matrix(self):
        assert power_iteration_radius(np.zeros((3, 3))) == 0.0

    def test_star_matches_closed_form(self, rng):
        for _ in range(25):
            k = int(rng.integers(1, 8))
            w = rng.uniform(0.1, 5.0, size=k)
            M = star_matrix(w)
            assert abs(power_iteration_radius(M) - star_radius(w)) < 1e-8

    def test_generic_symmetric_matches_eigvalsh(self, rng):
        A = rng.normal(size=(6, 6))
        M = (A + A.T) / 2
        expected = float(np.max(np.abs(np.linalg.eigvalsh(M))))
        assert abs(power_iteration_radius(M, max_iter=5000) - expected) < 1e-6


class TestLabelGraph:
    def test_too_short_sequence(self, rng):
        snap = random_snapshot(rng, n_nodes=5, n_events=40, n_bins=8)
        with pytest.raises(SequenceTooShortError):
            label_graph(snap, RuleParams(z=4))

    def test_empty_graph_all_false(self):
        g = build_graph([], node_universe=range(4))
        snap = bin_events(g, 900, time_span=(0, 14 * 900 - 1))
        labels = label_graph(snap, RuleParams(z=2))
        assert labels.rule_masks.sum() == 0
        assert labels.positives() == []

    def test_defined_range_markers(self, rng):
        snap = random_snapshot(rng, n_nodes=6, n_events=150, n_bins=16)
        labels = label_graph(snap, RuleParams(z=2))
        assert (labels.defined_lo, labels.defined_hi) == (3, 12)
        with pytest.raises(OutOfDefinedRangeError):
            labels.mask_at(0, 2)
        with pytest.raises(OutOfDefinedRangeError):
            labels.mask_at(0, 13)
        assert labels.rule_masks[:, :3].sum() == 0
        assert labels.rule_masks[:, 13:].sum() == 0

    def test_combined_is_or_of_bits(self, rng):
        snap = random_snapshot(rng, n_nodes=10, n_events=400, n_bins=20)
        labels = label_graph(snap, RuleParams(z=2))
        assert (labels.combined() == (labels.rule_masks != 0)).all()

    def test_matches_single_cell_rules(self, rng):
        snap = random_snapshot(rng, n_nodes=8, n_events=300, n_bins=18)
        p = RuleParams(z=2)
        labels = label_graph(snap, p)
        idx = snap.node_index()
        for v in snap.node_ids:
            for t in labels.defined_bins():
                mask = labels.rule_masks[idx[v], t]
                assert bool(mask & RULE_DEGREE_SPIKE) == rule_degree_spike(
                    DegreeSeries(v, np.array([len({s for (s, d) in snap.bins[i] if d == v}) for i in range(snap.num_bins)])),
                    t, p,
                )
                assert bool(mask & RULE_CURVATURE) == rule_curvature(snap, v, t, p)
                assert bool(mask & RULE_SPECTRAL) == rule_spectral(snap, v, t, p)

    def test_matches_brute_oracle(self, rng):
        snap = random_snapshot(rng, n_nodes=12, n_events=500, n_bins=24)
        p = RuleParams(z=2)
        labels = label_graph(snap, p)
        expected = brute_label_masks(snap, z=2)
        assert (labels.rule_masks == expected).all()

    def test_independent_of_node_iteration_order(self, rng):
        # relabeling a reconstructed snapshot with shuffled dict insertion
        snap = random_snapshot(rng, n_nodes=9, n_events=250, n_bins=18)
        shuffled_bins = tuple(
            dict(sorted(b.items(), key=lambda kv: (kv[0][1], kv[0][0]))) for b in snap.bins
        )
        from tgbench.graph import SnapshotSequence

        other = SnapshotSequence(
            bin_width=snap.bin_width, node_ids=snap.node_ids, bins=shuffled_bins
        )
        a = label_graph(snap, RuleParams(z=2))
        b = label_graph(other, RuleParams(z=2))
        assert (a.rule_masks == b.rule_masks).all()
