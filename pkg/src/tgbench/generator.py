"""Synthetic social-interaction stream generator.

Produces TemporalGraph inputs with the heterogeneity the labeling rules
care about: heavy-tailed per-node activity (Pareto), Zipf-like target
popularity, optional diurnal rate modulation, and planted burst episodes
that multiply the incoming event rate of a chosen center node. Entirely
deterministic for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError
from .graph import Action, InteractionEvent, TemporalGraph, build_graph

_ACTION_ORDER = (Action.LIKE, Action.COMMENT, Action.SHARE)
_SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class BurstSpec:
    """A window during which events toward ``center_node`` are multiplied."""

    start: int
    duration: int
    intensity: float
    center_node: int | str = "random"


@dataclass(frozen=True)
class GeneratorConfig:
    num_nodes: int
    duration: int
    base_rate: float  # expected events per node per bin
    activity_exponent: float = 1.5
    target_exponent: float = 1.2
    diurnal_amplitude: float = 0.0
    bursts: tuple = ()
    rng_seed: int = 0
    bin_width: int = 900

    def validate(self):
        if self.num_nodes < 2:
            raise InvalidConfigError("num_nodes", "need at least 2 nodes")
        if self.duration < 0:
            raise InvalidConfigError("duration", "must be non-negative")
        if self.base_rate <= 0:
            raise InvalidConfigError("base_rate", "must be positive")
        if self.activity_exponent <= 0:
            raise InvalidConfigError("activity_exponent", "must be positive")
        if self.target_exponent <= 0:
            raise InvalidConfigError("target_exponent", "must be positive")
        if not 0.0 <= self.diurnal_amplitude <= 1.0:
            raise InvalidConfigError("diurnal_amplitude", "must lie in [0, 1]")
        if self.bin_width <= 0:
            raise InvalidConfigError("bin_width", "must be positive")
        for i, b in enumerate(self.bursts):
            if b.intensity <= 1:
                raise InvalidConfigError(f"bursts[{i}].intensity", "must exceed 1")
            if b.start < 0 or b.duration <= 0:
                raise InvalidConfigError(f"bursts[{i}]", "start/duration must be sane")
            if b.start + b.duration > self.duration:
                raise InvalidConfigError(
                    f"bursts[{i}]", "window extends past the configured duration"
                )
            if b.center_node != "random" and not (
                isinstance(b.center_node, int) and 0 <= b.center_node < self.num_nodes
            ):
                raise InvalidConfigError(f"bursts[{i}].center_node", "unknown node")


def _draw_targets(rng, count, popularity, forbidden):
    """Popularity-weighted target draws with ``forbidden[i] != out[i]``."""
    n = len(popularity)
    targets = rng.choice(n, size=count, p=popularity)
    mask = targets == forbidden
    while mask.any():
        redraw = rng.choice(n, size=int(mask.sum()), p=popularity)
        targets[mask] = redraw
        mask = targets == forbidden
    return targets


def generate(config: GeneratorConfig) -> TemporalGraph:
    """Sample one interaction stream under ``config``.

    Per (node, bin) event counts are Poisson with rate base_rate scaled
    by the node's normalized activity weight and the diurnal modulation;
    targets are popularity-weighted draws excluding the source. Burst
    windows add an extra Poisson stream toward the center node at
    (intensity - 1) times its organic incoming rate.
    """
    config.validate()
    rng = np.random.default_rng(config.rng_seed)
    n = config.num_nodes

    activity = 1.0 + rng.pareto(config.activity_exponent, size=n)
    rates = config.base_rate * activity / activity.mean()
    ranks = np.arange(1, n + 1, dtype=float)
    popularity = ranks ** (-config.target_exponent)
    popularity /= popularity.sum()

    centers = []
    for b in config.bursts:
        if b.center_node == "random":
            centers.append(int(rng.integers(n)))
        else:
            centers.append(int(b.center_node))

    num_bins = math.ceil(config.duration / config.bin_width)
    amp = config.diurnal_amplitude
    node_ids = np.arange(n)

    sources_parts, targets_parts, ts_parts = [], [], []

    def modulation(lo, hi):
        mid = (lo + hi) / 2.0
        return 1.0 + amp * math.sin(2.0 * math.pi * (mid % _SECONDS_PER_DAY) / _SECONDS_PER_DAY)

    for b in range(num_bins):
        lo = b * config.bin_width
        hi = min((b + 1) * config.bin_width, config.duration)
        frac = (hi - lo) / config.bin_width
        mod = modulation(lo, hi)
        counts = rng.poisson(rates * mod * frac)
        total = int(counts.sum())
        if total == 0:
            continue
        src = np.repeat(node_ids, counts)
        ts = rng.integers(lo, hi, size=total)
        tgt = _draw_targets(rng, total, popularity, src)
        sources_parts.append(src)
        targets_parts.append(tgt)
        ts_parts.append(ts)

    for burst, center in zip(config.bursts, centers):
        organic_in = config.base_rate * n * popularity[center]
        extra_rate = (burst.intensity - 1.0) * organic_in
        src_weights = activity.copy()
        src_weights[center] = 0.0
        src_weights /= src_weights.sum()
        first = burst.start // config.bin_width
        last = (burst.start + burst.duration - 1) // config.bin_width
        for b in range(first, last + 1):
            lo = max(b * config.bin_width, burst.start)
            hi = min((b + 1) * config.bin_width, burst.start + burst.duration, config.duration)
            if hi <= lo:
                continue
            frac = (hi - lo) / config.bin_width
            mod = modulation(lo, hi)
            count = int(rng.poisson(extra_rate * mod * frac))
            if count == 0:
                continue
            src = rng.choice(n, size=count, p=src_weights)
            ts = rng.integers(lo, hi, size=count)
            sources_parts.append(src)
            targets_parts.append(np.full(count, center))
            ts_parts.append(ts)

    events = []
    if sources_parts:
        src = np.concatenate(sources_parts)
        tgt = np.concatenate(targets_parts)
        ts = np.concatenate(ts_parts)
        act = rng.integers(0, 3, size=len(src))
        events = [
            InteractionEvent(int(s), int(t), int(w), _ACTION_ORDER[a])
            for s, t, w, a in zip(src, tgt, ts, act)
        ]
    return build_graph(events, node_universe=range(n))
