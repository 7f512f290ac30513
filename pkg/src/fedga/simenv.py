"""Cheap simulated FL environment, penalty function and chromosome fitness.

Instead of training a model, the simulator derives the per-worker local
iteration counts from each worker's data heterogeneity and the number of
global rounds from their mean:

    I_k = round(2 + 9 h_k)                 clamped to [2, 11]
    N   = round(22 - (12 / 9) (mean I - 2)) clamped to [10, 22]

where the mean runs over participating workers (all workers if none
participate). Rounding is half away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PenaltyWeights
from .model import RoundOutcome, round_outcome
from .rng import stream

LOCAL_RANGE = (2, 11)
GLOBAL_RANGE = (10, 22)

FROZEN = "frozen"
JITTERED = "jittered"


def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


@dataclass(frozen=True)
class SimDraws:
    local_iterations: np.ndarray  # (K,) integers in LOCAL_RANGE
    global_iterations: int

    def rounds_for(self, participating) -> np.ndarray:
        return global_iterations(self.local_iterations, participating)


def global_iterations(local_iterations, participating=None):
    """Round count from the mean local iterations of the participants.

    ``participating`` may be ``(K,)`` or ``(P, K)``; rows with no participant
    fall back to the mean over all workers.
    """
    it = np.asarray(local_iterations, dtype=float)
    if participating is None:
        mean = it.mean()
    else:
        mask = np.asarray(participating, dtype=bool)
        count = mask.sum(axis=-1)
        part_mean = np.where(mask, it, 0.0).sum(axis=-1) / np.maximum(count, 1)
        mean = np.where(count > 0, part_mean, it.mean())
    n = round_half_away(GLOBAL_RANGE[1] - (12.0 / 9.0) * (mean - LOCAL_RANGE[0]))
    n = np.clip(n, *GLOBAL_RANGE).astype(int)
    return int(n) if n.ndim == 0 else n


def draw_sim(scenario, mode: str = FROZEN, seed: int | None = None) -> SimDraws:
    """Local and global iteration counts for one simulated FL process.

    Frozen draws are a deterministic function of the scenario. Jittered
    draws shift every I_k by an independent uniform step in {-1, 0, +1}.
    """
    h = scenario.heterogeneity
    it = round_half_away(LOCAL_RANGE[0] + (LOCAL_RANGE[1] - LOCAL_RANGE[0]) * h)
    if mode == JITTERED:
        if seed is None:
            raise ValueError("jittered draws need a seed")
        rng = stream(seed, "jitter")
        it = it + rng.integers(-1, 1, size=it.shape, endpoint=True)
    elif mode != FROZEN:
        raise ValueError(f"unknown draw mode {mode!r}")
    it = np.clip(it, *LOCAL_RANGE).astype(int)
    it.setflags(write=False)
    return SimDraws(it, global_iterations(it))


def energy_indicator(process_energy, previous):
    """Relative change of the complete-process energy against ``previous``.

    Negative (a bonus) when the process got cheaper, positive otherwise.
    Zero without a reference or when either energy is zero.
    """
    e = np.asarray(process_energy, dtype=float)
    if previous is None or previous <= 0:
        return np.zeros_like(e) if e.ndim else 0.0
    safe_e = np.where(e > 0, e, 1.0)
    out = np.where(e < previous, -(previous - e) / safe_e, (e - previous) / previous)
    out = np.where(e > 0, out, 0.0)
    return float(out) if out.ndim == 0 else out


def penalty(outcome: RoundOutcome, draws: SimDraws, weights: PenaltyWeights, previous_process_energy=None):
    """Penalty ``v`` and complete-process energy ``N * E_round``.

    ``v = sum_k (E^W_k + mu1 P1_k) + mu2 P2 + P3``.
    """
    rounds = draws.rounds_for(outcome.participating)
    process = rounds * outcome.round_energy
    p3 = energy_indicator(process, previous_process_energy)
    v = (
        outcome.wasted_total
        + weights.mu1 * outcome.violations
        + weights.mu2 * outcome.idle.astype(float)
        + p3
    )
    return _scalar(v), _scalar(process)


def _scalar(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


@dataclass(frozen=True)
class FitnessReport:
    """Score of one chromosome.

    ``fitness == -(round_energy + penalty)``. ``steady_fitness`` is the
    fitness the chromosome gets once it is itself the reference process
    (the relative-energy term vanishes), so it depends only on the genes.
    """

    fitness: float
    round_energy: float
    penalty: float
    process_energy: float
    violations: int
    wasted: float
    computation: float
    transmission: float
    energy_indicator: float
    global_iterations: int
    steady_fitness: float


@dataclass(frozen=True)
class PopulationReport:
    """Vectorized :class:`FitnessReport` for ``P`` chromosomes."""

    fitness: np.ndarray
    round_energy: np.ndarray
    penalty: np.ndarray
    process_energy: np.ndarray
    violations: np.ndarray
    wasted: np.ndarray
    computation: np.ndarray
    transmission: np.ndarray
    energy_indicator: np.ndarray
    global_iterations: np.ndarray
    steady_fitness: np.ndarray

    def __len__(self) -> int:
        return len(self.fitness)

    def __getitem__(self, i) -> FitnessReport:
        return FitnessReport(
            fitness=float(self.fitness[i]),
            round_energy=float(self.round_energy[i]),
            penalty=float(self.penalty[i]),
            process_energy=float(self.process_energy[i]),
            violations=int(self.violations[i]),
            wasted=float(self.wasted[i]),
            computation=float(self.computation[i]),
            transmission=float(self.transmission[i]),
            energy_indicator=float(self.energy_indicator[i]),
            global_iterations=int(self.global_iterations[i]),
            steady_fitness=float(self.steady_fitness[i]),
        )


def evaluate_population(
    frequency,
    power,
    scenario,
    weights: PenaltyWeights,
    previous_process_energy=None,
    draws: SimDraws | None = None,
    iteration_margin: int = 0,
) -> PopulationReport:
    """Score a ``(P, K)`` population against frozen simulated draws.

    ``iteration_margin`` prices every worker at ``I_k + margin`` local
    iterations (clamped), i.e. against the slow edge of the online spread.
    The round count still comes from the nominal draws.
    """
    f = np.atleast_2d(np.asarray(frequency, dtype=float))
    p = np.atleast_2d(np.asarray(power, dtype=float))
    if draws is None:
        draws = draw_sim(scenario, FROZEN)
    it = np.clip(draws.local_iterations + iteration_margin, *LOCAL_RANGE)
    out = round_outcome(f, p, it, scenario)
    rounds = draws.rounds_for(out.participating)
    e_round = out.round_energy
    process = rounds * e_round
    p3 = np.asarray(energy_indicator(process, previous_process_energy), dtype=float)
    p1 = out.violations
    p2 = out.idle.astype(int)
    constraint_terms = out.wasted_total + weights.mu1 * p1 + weights.mu2 * p2
    v = constraint_terms + p3
    return PopulationReport(
        fitness=-(e_round + v),
        round_energy=e_round,
        penalty=v,
        process_energy=process,
        violations=p1 + p2,
        wasted=out.wasted_total,
        computation=out.computation_total,
        transmission=out.transmission_total,
        energy_indicator=p3,
        global_iterations=np.asarray(rounds),
        steady_fitness=-(e_round + constraint_terms),
    )


def evaluate_chromosome(
    chromosome,
    scenario,
    weights: PenaltyWeights | None = None,
    previous_process_energy=None,
    seed: int | None = None,
    iteration_margin: int = 0,
) -> FitnessReport:
    """Fitness of one chromosome (anything with ``frequency``/``power`` arrays).

    Frozen draws make this a pure function of its inputs; ``seed`` is
    accepted for interface symmetry and unused.
    """
    del seed
    f = np.asarray(chromosome.frequency, dtype=float)
    p = np.asarray(chromosome.power, dtype=float)
    if f.shape != (len(scenario),) or p.shape != f.shape:
        raise ValueError(f"chromosome has {f.size} genes but the scenario has {len(scenario)} workers")
    report = evaluate_population(
        f[None, :],
        p[None, :],
        scenario,
        weights or PenaltyWeights(),
        previous_process_energy,
        iteration_margin=iteration_margin,
    )
    return report[0]
