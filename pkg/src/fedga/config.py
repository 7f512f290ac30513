"""Experiment configuration: scenario, GA hyperparameters and penalty weights.

Configuration files are JSON with three optional top-level keys::

    {
      "seed": 42,
      "scenario": {"workers": 10, "deadline": "13 s", "bandwidth": "20 MHz", ...},
      "ga": {"population_size": 120, "penalty": {"mu1": 10.0, "mu2": 1000.0}, ...}
    }

Missing keys take the defaults below. Unknown keys, bad units and out of range
values raise :class:`ConfigError` naming the key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .model import CLASS_DEFAULTS, DEFAULT_CAPACITANCE, HIGH_END, LOW_END, ChannelParams, ModelProfile
from .rng import DEFAULT_SEED
from .units import parse_quantity


class ConfigError(ValueError):
    """Invalid or malformed experiment configuration."""


@dataclass(frozen=True)
class DeviceClass:
    f_max: float
    flops_per_cycle: float
    p_max: float


@dataclass(frozen=True)
class ScenarioConfig:
    worker_count: int = 5
    low_end_fraction: float = 0.2
    distance_range: tuple[float, float] = (10.0, 500.0)
    samples_range: tuple[int, int] = (800, 1200)
    deadline: float = 13.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    profile: ModelProfile = field(default_factory=ModelProfile)
    local_target: float = 0.5
    global_target: float = 0.04
    capacitance: float = DEFAULT_CAPACITANCE
    low_end: DeviceClass = DeviceClass(*CLASS_DEFAULTS[LOW_END])
    high_end: DeviceClass = DeviceClass(*CLASS_DEFAULTS[HIGH_END])
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 1 <= self.worker_count <= 40:
            raise ConfigError(f"scenario.workers: expected an integer in [1, 40], got {self.worker_count}")
        if not 0.0 <= self.low_end_fraction <= 1.0:
            raise ConfigError(f"scenario.low_end_fraction: expected [0, 1], got {self.low_end_fraction}")
        lo, hi = self.distance_range
        if not 0 < lo <= hi:
            raise ConfigError(f"scenario.distance_range: expected 0 < low <= high, got {self.distance_range}")
        lo, hi = self.samples_range
        if not 0 < lo <= hi:
            raise ConfigError(f"scenario.samples_range: expected 0 < low <= high, got {self.samples_range}")
        if not self.deadline > 0:
            raise ConfigError(f"scenario.deadline: expected > 0 s, got {self.deadline}")
        if not self.local_target > 0 or not self.global_target > 0:
            raise ConfigError("scenario.local_target and scenario.global_target must be > 0")
        if not self.capacitance > 0:
            raise ConfigError(f"scenario.capacitance: expected > 0, got {self.capacitance}")


@dataclass(frozen=True)
class PenaltyWeights:
    mu1: float = 10.0  # J per deadline violation
    mu2: float = 1000.0  # J for an idle round

    def __post_init__(self):
        if self.mu1 < 0 or self.mu2 < 0:
            raise ConfigError("ga.penalty: mu1 and mu2 must be >= 0")


# Table of per-size GA defaults, keyed by worker count.
_GA_TABLE = {
    5: dict(population_size=40, elites=10, mutation_rate=0.1, memory_size=15, trigger_threshold=0.4),
    10: dict(population_size=120, elites=20, mutation_rate=0.05, memory_size=35, trigger_threshold=0.3),
    20: dict(population_size=210, elites=30, mutation_rate=0.1, memory_size=55, trigger_threshold=0.25),
    40: dict(population_size=220, elites=60, mutation_rate=0.05, memory_size=85, trigger_threshold=0.2),
}


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 40
    elites: int = 10
    crossover_rate: float = 0.3
    mutation_rate: float = 0.1
    max_generations: int = 5000
    early_stop_patience: int = 100
    hypermutation_factor: float = 1.5
    hypermutation_duration: int = 10
    memory_size: int = 15
    trigger_threshold: float = 0.4
    drop_probability: float = 0.0
    iteration_margin: int = 1
    deadline_guard: float = 0.1
    penalty: PenaltyWeights = field(default_factory=PenaltyWeights)
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("ga.population_size: expected >= 2")
        if not 0 <= self.elites < self.population_size:
            raise ConfigError(
                f"ga.elites: expected 0 <= elites < population_size ({self.population_size}), got {self.elites}"
            )
        for name in ("crossover_rate", "mutation_rate", "drop_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"ga.{name}: expected a probability in [0, 1], got {v}")
        if self.max_generations < 1 or self.early_stop_patience < 1:
            raise ConfigError("ga.max_generations and ga.early_stop_patience must be >= 1")
        if self.hypermutation_factor < 1.0 or self.hypermutation_duration < 0:
            raise ConfigError("ga.hypermutation_factor must be >= 1 and ga.hypermutation_duration >= 0")
        if self.memory_size < 1:
            raise ConfigError("ga.memory_size: expected >= 1")
        if not self.trigger_threshold > 0:
            raise ConfigError("ga.trigger_threshold: expected > 0")
        if self.iteration_margin < 0:
            raise ConfigError("ga.iteration_margin: expected >= 0")
        if not 0.0 <= self.deadline_guard < 1.0:
            raise ConfigError(f"ga.deadline_guard: expected a fraction in [0, 1), got {self.deadline_guard}")

    @classmethod
    def for_workers(cls, worker_count: int, **overrides) -> "GAConfig":
        """Defaults for the smallest tabulated size that fits ``worker_count``."""
        size = next((k for k in sorted(_GA_TABLE) if worker_count <= k), max(_GA_TABLE))
        return cls(**{**_GA_TABLE[size], **overrides})


_SCENARIO_KEYS = {
    "workers": ("worker_count", int),
    "low_end_fraction": ("low_end_fraction", float),
    "distance_range": ("distance_range", "m_range"),
    "samples_range": ("samples_range", "int_range"),
    "deadline": ("deadline", "s"),
    "local_target": ("local_target", float),
    "global_target": ("global_target", float),
    "capacitance": ("capacitance", float),
}
_CHANNEL_KEYS = {
    "noise_density": ("noise_density", "W/Hz"),
    "bandwidth": ("bandwidth", "Hz"),
    "pathloss_intercept": ("pathloss_intercept", float),
    "pathloss_slope": ("pathloss_slope", float),
}
_PROFILE_KEYS = {
    "model_size": ("size_bits", "bit"),
    "complexity": ("complexity", float),
}
_CLASS_KEYS = {"f_max": "Hz", "flops_per_cycle": float, "p_max": "W"}
_GA_KEYS = {
    "population_size": int,
    "elites": int,
    "crossover_rate": float,
    "mutation_rate": float,
    "max_generations": int,
    "early_stop_patience": int,
    "hypermutation_factor": float,
    "hypermutation_duration": int,
    "memory_size": int,
    "trigger_threshold": float,
    "drop_probability": float,
    "iteration_margin": int,
    "deadline_guard": float,
}


def _convert(key: str, raw, kind):
    try:
        if kind is int:
            if isinstance(raw, bool) or not isinstance(raw, int):
                raise ValueError(f"expected an integer, got {raw!r}")
            return raw
        if kind is float:
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise ValueError(f"expected a number, got {raw!r}")
            value = float(raw)
        elif kind == "m_range":
            lo, hi = raw
            return (parse_quantity(lo, "m"), parse_quantity(hi, "m"))
        elif kind == "int_range":
            lo, hi = raw
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in (lo, hi)):
                raise ValueError(f"expected two integers, got {raw!r}")
            return (lo, hi)
        else:
            value = parse_quantity(raw, kind)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {raw!r}")
    return value


def _check_keys(section: str, data: dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")


def _positive(key: str, value: float) -> float:
    if not value > 0:
        raise ConfigError(f"{key}: expected > 0, got {value}")
    return value


def configs_from_dict(data: dict, seed: int | None = None, workers: int | None = None):
    """Build ``(ScenarioConfig, GAConfig)`` from a parsed JSON object."""
    _check_keys("config", data, {"seed", "scenario", "ga"})
    sc = dict(data.get("scenario", {}))
    _check_keys(
        "scenario", sc, set(_SCENARIO_KEYS) | set(_CHANNEL_KEYS) | set(_PROFILE_KEYS) | {"low_end", "high_end"}
    )
    ga = dict(data.get("ga", {}))
    _check_keys("ga", ga, set(_GA_KEYS) | {"penalty"})

    if seed is None:
        seed = data.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed: expected an unsigned 64-bit integer, got {seed!r}")

    scenario_kw = {}
    for key, (attr, kind) in _SCENARIO_KEYS.items():
        if key in sc:
            scenario_kw[attr] = _convert(f"scenario.{key}", sc[key], kind)
    if workers is not None:
        scenario_kw["worker_count"] = workers
    channel_kw = {}
    for key, (attr, kind) in _CHANNEL_KEYS.items():
        if key in sc:
            channel_kw[attr] = _convert(f"scenario.{key}", sc[key], kind)
    for key in ("noise_density", "bandwidth"):
        if key in channel_kw:
            _positive(f"scenario.{key}", channel_kw[key])
    profile_kw = {}
    for key, (attr, kind) in _PROFILE_KEYS.items():
        if key in sc:
            profile_kw[attr] = _positive(f"scenario.{key}", _convert(f"scenario.{key}", sc[key], kind))

    base = ScenarioConfig()
    for cls_key, default in (("low_end", base.low_end), ("high_end", base.high_end)):
        if cls_key in sc:
            block = sc[cls_key]
            _check_keys(f"scenario.{cls_key}", block, _CLASS_KEYS)
            kw = {
                k: _positive(f"scenario.{cls_key}.{k}", _convert(f"scenario.{cls_key}.{k}", v, _CLASS_KEYS[k]))
                for k, v in block.items()
            }
            scenario_kw[cls_key] = replace(default, **kw)

    try:
        scenario_cfg = ScenarioConfig(
            channel=replace(base.channel, **channel_kw),
            profile=replace(base.profile, **profile_kw),
            seed=seed,
            **scenario_kw,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None

    ga_kw = {key: _convert(f"ga.{key}", ga[key], kind) for key, kind in _GA_KEYS.items() if key in ga}
    if "penalty" in ga:
        block = ga["penalty"]
        _check_keys("ga.penalty", block, {"mu1", "mu2"})
        ga_kw["penalty"] = PenaltyWeights(
            **{k: _convert(f"ga.penalty.{k}", v, float) for k, v in block.items()}
        )
    ga_cfg = GAConfig.for_workers(scenario_cfg.worker_count, seed=seed, **ga_kw)
    return scenario_cfg, ga_cfg


def parse_config(source=None, seed: int | None = None, workers: int | None = None):
    """Parse a JSON config from a path, a JSON string, a dict or ``None``.

    ``seed`` and ``workers`` override file values (CLI flags).
    """
    if source is None or (isinstance(source, str) and not source.strip()):
        data = {}
    elif isinstance(source, dict):
        data = source
    else:
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
            path = Path(source)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        if not text.strip():
            data = {}
        else:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return configs_from_dict(data, seed=seed, workers=workers)


def config_to_dict(scenario_cfg: ScenarioConfig, ga_cfg: GAConfig) -> dict:
    """Inverse of :func:`configs_from_dict` in SI units."""
    sc = scenario_cfg
    return {
        "seed": sc.seed,
        "scenario": {
            "workers": sc.worker_count,
            "low_end_fraction": sc.low_end_fraction,
            "distance_range": list(sc.distance_range),
            "samples_range": list(sc.samples_range),
            "deadline": sc.deadline,
            "local_target": sc.local_target,
            "global_target": sc.global_target,
            "capacitance": sc.capacitance,
            "noise_density": sc.channel.noise_density,
            "bandwidth": sc.channel.bandwidth,
            "pathloss_intercept": sc.channel.pathloss_intercept,
            "pathloss_slope": sc.channel.pathloss_slope,
            "model_size": sc.profile.size_bits,
            "complexity": sc.profile.complexity,
            "low_end": {f.name: getattr(sc.low_end, f.name) for f in fields(DeviceClass)},
            "high_end": {f.name: getattr(sc.high_end, f.name) for f in fields(DeviceClass)},
        },
        "ga": {
            **{key: getattr(ga_cfg, key) for key in _GA_KEYS},
            "penalty": {"mu1": ga_cfg.penalty.mu1, "mu2": ga_cfg.penalty.mu2},
        },
    }
