"""Seeded generation of heterogeneous wireless FL scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import ConfigError, ScenarioConfig, parse_config  # noqa: F401  (re-export)
from .model import HIGH_END, LOW_END, ChannelParams, ModelProfile, WorkerSpec, channel_gain
from .rng import stream


@dataclass(frozen=True)
class Scenario:
    workers: tuple[WorkerSpec, ...]
    channel: ChannelParams
    profile: ModelProfile
    deadline: float
    gains: np.ndarray

    def __post_init__(self):
        self.gains.setflags(write=False)

    def __len__(self) -> int:
        return len(self.workers)

    def _column(self, name):
        col = np.array([getattr(w, name) for w in self.workers], dtype=float)
        col.setflags(write=False)
        return col

    @cached_property
    def f_max(self) -> np.ndarray:
        return self._column("f_max")

    @cached_property
    def p_max(self) -> np.ndarray:
        return self._column("p_max")

    @cached_property
    def flops_per_cycle(self) -> np.ndarray:
        return self._column("flops_per_cycle")

    @cached_property
    def capacitance(self) -> np.ndarray:
        return self._column("capacitance")

    @cached_property
    def samples(self) -> np.ndarray:
        return self._column("samples")

    @cached_property
    def heterogeneity(self) -> np.ndarray:
        return self._column("heterogeneity")

    @property
    def low_end_count(self) -> int:
        return sum(w.kind == LOW_END for w in self.workers)

    def with_deadline(self, deadline: float) -> "Scenario":
        return Scenario(self.workers, self.channel, self.profile, deadline, self.gains.copy())


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Draw workers for ``cfg``; identical configs give identical scenarios."""
    rng = stream(cfg.seed, "scenario")
    k = cfg.worker_count
    n_low = math.floor(cfg.low_end_fraction * k + 1e-9)
    order = rng.permutation(k)
    low = set(order[:n_low].tolist())
    distances = rng.uniform(*cfg.distance_range, size=k)
    samples = rng.integers(cfg.samples_range[0], cfg.samples_range[1], size=k, endpoint=True)
    hetero = rng.uniform(0.0, 1.0, size=k)

    workers = []
    for i in range(k):
        kind = LOW_END if i in low else HIGH_END
        cls = cfg.low_end if kind == LOW_END else cfg.high_end
        workers.append(
            WorkerSpec(
                id=i,
                kind=kind,
                f_max=cls.f_max,
                p_max=cls.p_max,
                flops_per_cycle=cls.flops_per_cycle,
                capacitance=cfg.capacitance,
                distance=float(distances[i]),
                samples=int(samples[i]),
                heterogeneity=float(hetero[i]),
            )
        )
    gains = np.asarray(channel_gain(distances, cfg.channel), dtype=float).reshape(k)
    return Scenario(tuple(workers), cfg.channel, cfg.profile, cfg.deadline, gains)
