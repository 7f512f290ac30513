"""Penalty-guided genetic algorithm over per-worker (frequency, power) genes.

A population is stored as two ``(P, K)`` arrays so that a whole generation is
scored in one vectorized call. Operators:

* rank-based roulette selection (FF is negative, so raw proportional
  selection is undefined),
* uniform crossover that swaps whole (f, p) genes,
* per-gene mutation that either resamples the gene uniformly within the
  worker's bounds or, with ``drop_probability``, switches the worker off,
* elitism,
* a hybrid of triggered hyper-mutation and a fixed-size memory of the best
  chromosomes seen, fired when the best fitness jumps by more than
  ``trigger_threshold`` between generations,
* early stopping after ``early_stop_patience`` generations without
  improvement.

Within a generation chromosomes are ranked by their fitness, which includes
the relative process-energy term against the previous generation's best.
Progress across generations (best-ever, memory, trigger, early stopping) is
measured with the steady fitness, where that term is zero, because only then
are scores from different generations comparable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .config import GAConfig
from .model import ResourceAssignment
from .rng import stream
from .simenv import FitnessReport, PopulationReport, draw_sim, evaluate_population

log = logging.getLogger(__name__)


@dataclass
class Chromosome:
    frequency: np.ndarray
    power: np.ndarray
    report: FitnessReport | None = None

    def __post_init__(self):
        self.frequency = np.asarray(self.frequency, dtype=float)
        self.power = np.asarray(self.power, dtype=float)

    def __len__(self) -> int:
        return len(self.frequency)

    @property
    def genes(self) -> list[ResourceAssignment]:
        return [ResourceAssignment(float(f), float(p)) for f, p in zip(self.frequency, self.power)]

    def copy(self) -> "Chromosome":
        return Chromosome(self.frequency.copy(), self.power.copy(), self.report)

    def key(self) -> bytes:
        return self.frequency.tobytes() + self.power.tobytes()


@dataclass
class Population:
    frequency: np.ndarray  # (P, K)
    power: np.ndarray  # (P, K)

    def __len__(self) -> int:
        return self.frequency.shape[0]

    def __getitem__(self, i) -> Chromosome:
        return Chromosome(self.frequency[i].copy(), self.power[i].copy())


@dataclass(frozen=True)
class GenerationTrace:
    generation: int
    best_ff: float
    mean_ff: float
    best_round_energy: float
    best_computation: float
    best_transmission: float
    best_process_energy: float
    best_violations: int
    hypermutation: bool


def init_population(scenario, cfg: GAConfig, rng: np.random.Generator | None = None) -> Population:
    if rng is None:
        rng = stream(cfg.seed, "ga", "init")
    shape = (cfg.population_size, len(scenario))
    f = rng.uniform(0.0, 1.0, size=shape) * scenario.f_max
    p = rng.uniform(0.0, 1.0, size=shape) * scenario.p_max
    return Population(f, p)


def selection_probabilities(fitness) -> np.ndarray:
    """Rank roulette: the i-th worst gets weight i; ties share their mean rank."""
    ff = np.asarray(fitness, dtype=float)
    if np.any(np.isnan(ff)):
        raise ValueError("cannot select from unevaluated chromosomes")
    ranks = rankdata(ff, method="average")
    return ranks / ranks.sum()


def select_parents(fitness, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` parent index pairs drawn with replacement, shape ``(count, 2)``."""
    if fitness is None:
        raise ValueError("cannot select from unevaluated chromosomes")
    probs = selection_probabilities(fitness)
    return rng.choice(len(probs), size=(count, 2), p=probs)


def crossover_arrays(fa, pa, fb, pb, rate: float, rng: np.random.Generator):
    """Uniform crossover of row-aligned parent arrays ``(n, K)``."""
    n, k = fa.shape
    do = rng.random(n) < rate
    swap = (rng.random((n, k)) < 0.5) & do[:, None]
    ca_f = np.where(swap, fb, fa)
    ca_p = np.where(swap, pb, pa)
    cb_f = np.where(swap, fa, fb)
    cb_p = np.where(swap, pa, pb)
    return ca_f, ca_p, cb_f, cb_p


def crossover(parent_a: Chromosome, parent_b: Chromosome, rate: float, rng: np.random.Generator):
    if len(parent_a) != len(parent_b):
        raise ValueError("parents must have the same number of genes")
    ca_f, ca_p, cb_f, cb_p = crossover_arrays(
        parent_a.frequency[None], parent_a.power[None], parent_b.frequency[None], parent_b.power[None], rate, rng
    )
    return Chromosome(ca_f[0], ca_p[0]), Chromosome(cb_f[0], cb_p[0])


def mutate_arrays(f, p, rate: float, scenario, rng: np.random.Generator, drop_probability: float = 0.0):
    """Mutate each gene with probability ``rate``; returns new arrays."""
    shape = f.shape
    hit = rng.random(shape) < rate
    drop = rng.random(shape) < drop_probability
    new_f = rng.uniform(0.0, 1.0, size=shape) * scenario.f_max
    new_p = rng.uniform(0.0, 1.0, size=shape) * scenario.p_max
    new_f = np.where(drop, 0.0, new_f)
    new_p = np.where(drop, 0.0, new_p)
    return np.where(hit, new_f, f), np.where(hit, new_p, p)


def mutate(
    chromosome: Chromosome, rate: float, scenario, rng: np.random.Generator, drop_probability: float = 0.0
) -> Chromosome:
    f, p = mutate_arrays(chromosome.frequency[None], chromosome.power[None], rate, scenario, rng, drop_probability)
    return Chromosome(f[0], p[0])


def hyper_triggered(previous_best: float, current_best: float, threshold: float) -> bool:
    """Relative jump of the best fitness between consecutive generations."""
    diff = abs(current_best - previous_best)
    if previous_best == 0:
        return diff > threshold
    return diff / abs(previous_best) > threshold


@dataclass
class Memory:
    """Best-so-far archive of unique chromosomes, sorted best first."""

    capacity: int
    entries: list[tuple[float, Chromosome]] = field(default_factory=list)

    def offer(self, candidates: list[tuple[float, Chromosome]]) -> None:
        seen = {c.key() for _, c in self.entries}
        merged = list(self.entries)
        for score, chrom in candidates:
            key = chrom.key()
            if key not in seen:
                seen.add(key)
                merged.append((score, chrom))
        # stable: earlier entries win ties
        merged.sort(key=lambda e: -e[0])
        self.entries = merged[: self.capacity]

    def best(self) -> tuple[float, Chromosome] | None:
        return self.entries[0] if self.entries else None

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class HybridState:
    base_rate: float
    factor: float
    duration: int
    memory: Memory
    remaining: int = 0

    @property
    def mutation_rate(self) -> float:
        if self.remaining > 0:
            return min(1.0, self.base_rate * self.factor)
        return self.base_rate

    @property
    def active(self) -> bool:
        return self.remaining > 0

    def consume(self) -> None:
        if self.remaining > 0:
            self.remaining -= 1


def hybrid_operation(state: HybridState, history: list[float], population: Population, fitness, threshold: float):
    """Fire triggered hyper-mutation and memory replacement if warranted.

    ``history`` holds the best steady fitness of each generation so far.
    Returns ``(triggered, replaced_index)``; the index is ``None`` when the
    memory is empty or nothing fired.
    """
    if len(history) < 2 or not hyper_triggered(history[-2], history[-1], threshold):
        return False, None
    state.remaining = state.duration
    best = state.memory.best()
    if best is None:
        return True, None
    order = np.argsort(np.asarray(fitness), kind="stable")
    worst = int(order[0])
    population.frequency[worst] = best[1].frequency
    population.power[worst] = best[1].power
    return True, worst


@dataclass
class OfflineResult:
    best: Chromosome
    traces: list[GenerationTrace]
    stopped_early: bool
    triggers: int


def _elite_indices(fitness, steady, n: int) -> np.ndarray:
    if n == 0:
        return np.empty(0, dtype=int)
    order = np.argsort(-np.asarray(fitness), kind="stable")
    elite = order[:n].copy()
    incumbent = int(np.argmax(steady))
    if incumbent not in elite:
        elite[-1] = incumbent
    return elite


def run_offline(scenario, cfg: GAConfig, callback=None) -> OfflineResult:
    """Evolve a resource strategy against the frozen simulated environment.

    Chromosomes are scored against ``(1 - deadline_guard) * H`` so that the
    replayed strategy keeps some slack before the real deadline.
    """
    target = scenario.with_deadline(scenario.deadline * (1.0 - cfg.deadline_guard))
    draws = draw_sim(scenario)
    pop = init_population(scenario, cfg)
    state = HybridState(cfg.mutation_rate, cfg.hypermutation_factor, cfg.hypermutation_duration, Memory(cfg.memory_size))
    history: list[float] = []
    traces: list[GenerationTrace] = []
    best: Chromosome | None = None
    best_score = -np.inf
    stale = 0
    reference = None
    stopped_early = False
    triggers = 0

    def evaluate(population) -> PopulationReport:
        return evaluate_population(
            population.frequency,
            population.power,
            target,
            cfg.penalty,
            reference,
            draws,
            cfg.iteration_margin,
        )

    for g in range(cfg.max_generations):
        rep = evaluate(pop)
        steady = rep.steady_fitness
        top = np.argsort(-steady, kind="stable")[: cfg.memory_size]
        state.memory.offer([(float(steady[i]), pop[i]) for i in top])

        history.append(float(steady.max()))
        state.consume()
        fired, replaced = hybrid_operation(state, history, pop, rep.fitness, cfg.trigger_threshold)
        triggers += fired
        if replaced is not None:
            rep = evaluate(pop)
            steady = rep.steady_fitness

        ib = int(np.argmax(steady))
        trace = GenerationTrace(
            generation=g,
            best_ff=float(steady[ib]),
            mean_ff=float(rep.fitness.mean()),
            best_round_energy=float(rep.round_energy[ib]),
            best_computation=float(rep.computation[ib]),
            best_transmission=float(rep.transmission[ib]),
            best_process_energy=float(rep.process_energy[ib]),
            best_violations=int(rep.violations[ib]),
            hypermutation=state.active,
        )
        traces.append(trace)
        if callback is not None:
            callback(trace)

        if steady[ib] > best_score:
            best_score = float(steady[ib])
            best = pop[ib]
            stale = 0
        else:
            stale += 1
        if stale >= cfg.early_stop_patience:
            stopped_early = True
            break
        if g == cfg.max_generations - 1:
            break

        reference = float(rep.process_energy[ib])
        rng = stream(cfg.seed, "ga", g)
        elite = _elite_indices(rep.fitness, steady, cfg.elites)
        n_children = cfg.population_size - len(elite)
        pairs = select_parents(rep.fitness, (n_children + 1) // 2, rng)
        fa, pa = pop.frequency[pairs[:, 0]], pop.power[pairs[:, 0]]
        fb, pb = pop.frequency[pairs[:, 1]], pop.power[pairs[:, 1]]
        ca_f, ca_p, cb_f, cb_p = crossover_arrays(fa, pa, fb, pb, cfg.crossover_rate, rng)
        kid_f = np.empty((2 * len(pairs), len(scenario)))
        kid_p = np.empty_like(kid_f)
        kid_f[0::2], kid_f[1::2] = ca_f, cb_f
        kid_p[0::2], kid_p[1::2] = ca_p, cb_p
        kid_f, kid_p = kid_f[:n_children], kid_p[:n_children]
        kid_f, kid_p = mutate_arrays(kid_f, kid_p, state.mutation_rate, scenario, rng, cfg.drop_probability)
        pop = Population(
            np.concatenate([pop.frequency[elite], kid_f]),
            np.concatenate([pop.power[elite], kid_p]),
        )

    best = best.copy()
    best.report = evaluate_population(
        best.frequency[None], best.power[None], target, cfg.penalty, None, draws, cfg.iteration_margin
    )[0]
    log.info(
        "GA stopped after %d generations (early=%s), best round energy %.4f J",
        len(traces),
        stopped_early,
        best.report.round_energy,
    )
    return OfflineResult(best, traces, stopped_early, triggers)
