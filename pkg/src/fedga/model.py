"""Energy, latency and rate model of one synchronized FL round.

Every function is pure and works elementwise on scalars or numpy arrays, so
the same code prices one worker, one chromosome ``(K,)`` or a whole
population ``(P, K)``. Units are SI throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .units import dbm_to_watts

LOW_END = "low-end"
HIGH_END = "high-end"

# Per-class hardware defaults: (f_max Hz, FLOPs/cycle, p_max W).
CLASS_DEFAULTS = {
    LOW_END: (1e9, 4.0, dbm_to_watts(28.0)),
    HIGH_END: (3e9, 2.0, dbm_to_watts(33.0)),
}
DEFAULT_CAPACITANCE = 1e-28


@dataclass(frozen=True)
class WorkerSpec:
    id: int
    kind: str
    f_max: float
    p_max: float
    flops_per_cycle: float
    capacitance: float
    distance: float
    samples: int
    heterogeneity: float

    def __post_init__(self):
        if self.f_max <= 0 or self.p_max <= 0:
            raise ValueError(f"worker {self.id}: f_max and p_max must be positive")
        if self.flops_per_cycle <= 0 or self.capacitance <= 0:
            raise ValueError(f"worker {self.id}: c and capacitance must be positive")
        if self.distance <= 0:
            raise ValueError(f"worker {self.id}: distance must be positive")
        if self.samples <= 0:
            raise ValueError(f"worker {self.id}: samples must be positive")
        if not 0.0 <= self.heterogeneity <= 1.0:
            raise ValueError(f"worker {self.id}: heterogeneity must lie in [0, 1]")


@dataclass(frozen=True)
class ChannelParams:
    noise_density: float = dbm_to_watts(-158.0)  # W/Hz
    bandwidth: float = 2e7  # Hz
    pathloss_intercept: float = 127.0  # dB at 1 km
    pathloss_slope: float = 30.0  # dB per decade of distance

    def __post_init__(self):
        if self.noise_density <= 0 or self.bandwidth <= 0:
            raise ValueError("noise density and bandwidth must be positive")


@dataclass(frozen=True)
class ModelProfile:
    size_bits: float = 2.51e6 * 8
    complexity: float = 1_800_348.0  # FLOPs per sample per local iteration

    def __post_init__(self):
        if self.size_bits <= 0 or self.complexity <= 0:
            raise ValueError("model size and complexity must be positive")


@dataclass(frozen=True)
class ResourceAssignment:
    frequency: float
    power: float


def channel_gain(distance, params: ChannelParams):
    """Linear channel gain from the log-distance pathloss, distance in metres.

    The pathloss is ``intercept + slope * log10(d / 1 km)`` dB.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    loss_db = params.pathloss_intercept + params.pathloss_slope * np.log10(d / 1000.0)
    gain = 10.0 ** (-loss_db / 10.0)
    return float(gain) if gain.ndim == 0 else gain


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def data_rate(power, gain, channel: ChannelParams):
    """Shannon rate in bit/s; zero power gives zero rate."""
    p = np.asarray(power, dtype=float)
    snr = np.asarray(gain, dtype=float) * p / (channel.bandwidth * channel.noise_density)
    return _out(channel.bandwidth * np.log1p(snr) / np.log(2.0))


def transmission_time(size_bits, rate):
    """Upload time ``m / r``; ``inf`` when the rate is zero."""
    r = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore"):
        t = np.where(r > 0, size_bits / np.where(r > 0, r, 1.0), np.inf)
    return _out(t)


def transmission_energy(power, size_bits, gain, channel: ChannelParams):
    """Upload energy ``m p / r(p)``, defined as 0 at ``p = 0``."""
    p = np.asarray(power, dtype=float)
    r = np.asarray(data_rate(p, gain, channel), dtype=float)
    safe = np.where(p > 0, r, 1.0)
    return _out(np.where(p > 0, size_bits * p / safe, 0.0))


def computation_time(frequency, iterations, complexity, samples, flops_per_cycle):
    """Local training time ``I alpha D / (c f)``.

    Zero when no iterations are needed, ``inf`` when work is pending at f = 0.
    """
    f = np.asarray(frequency, dtype=float)
    work = np.asarray(iterations, dtype=float) * complexity * np.asarray(samples, dtype=float)
    denom = np.asarray(flops_per_cycle, dtype=float) * f
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(work == 0, 0.0, np.where(f > 0, work / np.where(f > 0, denom, 1.0), np.inf))
    return _out(t)


def computation_energy(frequency, iterations, complexity, samples, flops_per_cycle, capacitance):
    """Local training energy ``capacitance * I * alpha * D * f^2 / c``."""
    f = np.asarray(frequency, dtype=float)
    e = (
        np.asarray(capacitance, dtype=float)
        * np.asarray(iterations, dtype=float)
        * complexity
        * np.asarray(samples, dtype=float)
        * f
        * f
        / np.asarray(flops_per_cycle, dtype=float)
    )
    return _out(e)


def omega(power):
    """1 where the worker transmits (p > 0), else 0."""
    return _out((np.asarray(power, dtype=float) > 0).astype(float))


@dataclass(frozen=True)
class RoundOutcome:
    """Per-worker and aggregate results of one round.

    Per-worker arrays have shape ``(..., K)``; totals drop the last axis.
    ``computation`` is already gated by participation.
    """

    computation: np.ndarray
    transmission: np.ndarray
    compute_time: np.ndarray
    upload_time: np.ndarray
    participating: np.ndarray
    violated: np.ndarray
    wasted: np.ndarray
    idle: np.ndarray

    @property
    def energy(self) -> np.ndarray:
        return self.computation + self.transmission

    @property
    def round_energy(self):
        return self.energy.sum(axis=-1)

    @property
    def computation_total(self):
        return self.computation.sum(axis=-1)

    @property
    def transmission_total(self):
        return self.transmission.sum(axis=-1)

    @property
    def wasted_total(self):
        return self.wasted.sum(axis=-1)

    @property
    def violations(self):
        return self.violated.sum(axis=-1)

    def wall_time(self, deadline: float):
        """Round duration: slowest participant, clipped at the deadline."""
        t = np.where(self.participating, self.compute_time + self.upload_time, 0.0)
        return np.minimum(t.max(axis=-1), deadline)


def round_outcome(frequency, power, iterations, scenario, deadline: float | None = None) -> RoundOutcome:
    """Price one round of assignments against ``scenario``.

    ``frequency`` and ``power`` are ``(K,)`` or ``(P, K)``; ``iterations`` is
    broadcast against them. A worker participates iff f > 0 and p > 0; a
    participant is violated iff its compute plus upload time reaches the
    deadline, and then its whole energy counts as wasted.
    """
    f = np.asarray(frequency, dtype=float)
    p = np.asarray(power, dtype=float)
    k = len(scenario.workers)
    if f.shape != p.shape or f.shape[-1:] != (k,):
        raise ValueError(f"assignments must have shape (..., {k}); got {f.shape} and {p.shape}")
    it = np.broadcast_to(np.asarray(iterations, dtype=float), f.shape)
    if deadline is None:
        deadline = scenario.deadline

    participating = (f > 0) & (p > 0)
    alpha = scenario.profile.complexity
    # an excluded worker neither trains nor uploads
    gated_it = np.where(participating, it, 0.0)
    comp = computation_energy(f, gated_it, alpha, scenario.samples, scenario.flops_per_cycle, scenario.capacitance)
    comp = np.asarray(comp) * np.asarray(omega(p))
    gated_p = np.where(participating, p, 0.0)
    trans = np.asarray(transmission_energy(gated_p, scenario.profile.size_bits, scenario.gains, scenario.channel))
    tau = np.asarray(computation_time(f, gated_it, alpha, scenario.samples, scenario.flops_per_cycle))
    rate = data_rate(gated_p, scenario.gains, scenario.channel)
    tr = np.asarray(transmission_time(scenario.profile.size_bits, rate))
    tau = np.where(participating, tau, 0.0)
    tr = np.where(participating, tr, 0.0)
    violated = participating & (tau + tr >= deadline)
    wasted = np.where(violated, comp + trans, 0.0)
    idle = np.where(participating, f, 0.0).sum(axis=-1) <= 0
    return RoundOutcome(
        computation=comp,
        transmission=trans,
        compute_time=tau,
        upload_time=tr,
        participating=participating,
        violated=violated,
        wasted=wasted,
        idle=np.asarray(idle),
    )


def assignments_to_arrays(assignments: Sequence[ResourceAssignment]):
    f = np.array([a.frequency for a in assignments], dtype=float)
    p = np.array([a.power for a in assignments], dtype=float)
    return f, p
