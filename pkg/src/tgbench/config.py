"""Declarative experiment configuration.

One YAML (or JSON) file drives the whole pipeline; every seed is
explicit so reruns are byte-identical. The canonical hash of the
resolved config is embedded in every output file and checked when
reports are merged.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .detectors import DetectorSpec
from .errors import InvalidConfigError
from .generator import BurstSpec, GeneratorConfig
from .labeling import RuleParams
from .sensitivity import SENSITIVITY_TESTS, SensitivitySpec


@dataclass(frozen=True)
class SamplingConfig:
    instances: int = 10
    target_size: int = 500
    rng_seed: int = 0


@dataclass(frozen=True)
class EvaluationConfig:
    train_fraction: float = 0.8
    lag: int = 1
    grid_search: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorConfig | None
    ingest_path: str | None
    sampling: SamplingConfig
    labeling: RuleParams
    detectors: tuple
    evaluation: EvaluationConfig
    sensitivity: tuple
    bin_width: int = 900
    labels_mode: str = "recomputed"
    output_dir: str = "out"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def validate(self):
        if (self.generator is None) == (self.ingest_path is None):
            raise InvalidConfigError(
                "generator/ingest", "exactly one input source must be configured"
            )
        if self.generator is not None:
            self.generator.validate()
        names = [d.label for d in self.detectors]
        if len(set(names)) != len(names):
            raise InvalidConfigError("detectors", "detector names must be unique")
        for d in self.detectors:
            d.validate()
        for s in self.sensitivity:
            s.validate()
        if self.labels_mode not in ("recomputed", "frozen"):
            raise InvalidConfigError("labels_mode", "must be 'recomputed' or 'frozen'")
        if self.bin_width <= 0:
            raise InvalidConfigError("bin_width", "must be positive")


def _require(mapping: dict, key: str, section: str):
    if key not in mapping:
        raise InvalidConfigError(f"{section}.{key}", "missing required key")
    return mapping[key]


def _parse_generator(raw: dict) -> GeneratorConfig:
    bursts = tuple(
        BurstSpec(
            start=int(_require(b, "start", "burst")),
            duration=int(_require(b, "duration", "burst")),
            intensity=float(_require(b, "intensity", "burst")),
            center_node=b.get("center_node", "random"),
        )
        for b in raw.get("bursts", [])
    )
    return GeneratorConfig(
        num_nodes=int(_require(raw, "num_nodes", "generator")),
        duration=int(_require(raw, "duration", "generator")),
        base_rate=float(_require(raw, "base_rate", "generator")),
        activity_exponent=float(raw.get("activity_exponent", 1.5)),
        target_exponent=float(raw.get("target_exponent", 1.2)),
        diurnal_amplitude=float(raw.get("diurnal_amplitude", 0.0)),
        bursts=bursts,
        rng_seed=int(_require(raw, "rng_seed", "generator")),
        bin_width=int(raw.get("bin_width", 900)),
    )


def _parse_detector(raw: dict) -> DetectorSpec:
    return DetectorSpec(
        kind=str(_require(raw, "kind", "detector")),
        window=int(raw.get("window", 4)),
        hyperparameters=dict(raw.get("hyperparameters", {})),
        rng_seed=int(raw.get("rng_seed", 0)),
        name=raw.get("name"),
    )


def _parse_sensitivity(raw: dict, z: int, base_size: int) -> tuple:
    tests = raw.get("tests", list(SENSITIVITY_TESTS))
    seed = int(raw.get("rng_seed", 0))
    grids = {
        "lag": tuple(raw.get("lag_grid", range(1, z + 1))),
        "drift": tuple(raw.get("drift_grid", [round(0.001 * i, 3) for i in range(11)])),
        "size": tuple(raw.get("size_grid", [base_size + 10 * i for i in range(11)])),
        "density": tuple(raw.get("density_grid", range(1, 11))),
    }
    return tuple(SensitivitySpec(test=t, grid=grids[t], rng_seed=seed) for t in tests)


def parse_config(raw: dict) -> ExperimentConfig:
    sampling_raw = raw.get("sampling", {})
    sampling = SamplingConfig(
        instances=int(sampling_raw.get("instances", 10)),
        target_size=int(sampling_raw.get("target_size", 500)),
        rng_seed=int(sampling_raw.get("rng_seed", 0)),
    )
    labeling_raw = raw.get("labeling", {})
    rule_params = RuleParams(
        z=int(labeling_raw.get("z", 4)),
        std_multiplier=float(labeling_raw.get("std_multiplier", 2.0)),
        eig_threshold=float(labeling_raw.get("eig_threshold", 1.0)),
        normalize_window=bool(labeling_raw.get("normalize_window", True)),
    )
    eval_raw = raw.get("evaluation", {})
    evaluation = EvaluationConfig(
        train_fraction=float(eval_raw.get("train_fraction", 0.8)),
        lag=int(eval_raw.get("lag", 1)),
        grid_search=bool(eval_raw.get("grid_search", True)),
    )
    cfg = ExperimentConfig(
        generator=_parse_generator(raw["generator"]) if "generator" in raw else None,
        ingest_path=raw.get("ingest", {}).get("path") if "ingest" in raw else None,
        sampling=sampling,
        labeling=rule_params,
        detectors=tuple(_parse_detector(d) for d in raw.get("detectors", [])),
        evaluation=evaluation,
        sensitivity=_parse_sensitivity(
            raw.get("sensitivity", {}), rule_params.z, sampling.target_size
        ),
        bin_width=int(raw.get("bin_width", 900)),
        labels_mode=str(raw.get("labels_mode", "recomputed")),
        output_dir=str(raw.get("output_dir", "out")),
        raw=raw,
    )
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        raise InvalidConfigError("config", "top level must be a mapping")
    return parse_config(raw)


def config_hash(config: ExperimentConfig) -> str:
    """Canonical digest of the resolved raw config mapping."""
    canonical = json.dumps(config.raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
