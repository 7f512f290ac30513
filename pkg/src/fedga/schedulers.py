"""Online replay of resource strategies: GA best, random and greedy baselines.

Every policy is driven by the same loop. A run draws jittered iteration
counts, plays ``N`` synchronized rounds and accumulates energy, per-round
wall time and deadline violations. Runs are paired across policies: run
``r`` uses the same derived seed, hence the same scenario draws and the same
stream of random candidates, whatever the policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ResourceAssignment, round_outcome
from .rng import derive_seed, stream
from .simenv import FROZEN, JITTERED, draw_sim

RSS = "RSS"
GSS = "GSS"
FIXED = "FixedStrategy"
KINDS = (RSS, GSS, FIXED)

SIM = "sim"
TOY = "toy"


@dataclass
class SchedulerPolicy:
    kind: str
    fixed: object | None = None  # Chromosome-like, with frequency/power arrays
    incumbent: tuple[np.ndarray, np.ndarray] | None = None
    incumbent_energy: float | None = None
    energy_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind == FIXED and self.fixed is None:
            raise ValueError("FixedStrategy needs a chromosome")

    @property
    def name(self) -> str:
        return "GA" if self.kind == FIXED else self.kind

    def reset(self) -> None:
        self.incumbent = None
        self.incumbent_energy = None
        self.energy_history = []

    @classmethod
    def rss(cls) -> "SchedulerPolicy":
        return cls(RSS)

    @classmethod
    def gss(cls) -> "SchedulerPolicy":
        return cls(GSS)

    @classmethod
    def fixed_strategy(cls, chromosome) -> "SchedulerPolicy":
        return cls(FIXED, fixed=chromosome)


def _uniform(scenario, rng):
    k = len(scenario)
    f = rng.uniform(0.0, 1.0, size=k) * scenario.f_max
    p = rng.uniform(0.0, 1.0, size=k) * scenario.p_max
    return f, p


def _round_energy(f, p, scenario) -> float:
    it = draw_sim(scenario, FROZEN).local_iterations
    return float(round_outcome(f, p, it, scenario).round_energy)


def _check_fixed(policy: SchedulerPolicy, scenario):
    f = np.asarray(policy.fixed.frequency, dtype=float)
    p = np.asarray(policy.fixed.power, dtype=float)
    if f.shape != (len(scenario),) or p.shape != f.shape:
        raise ValueError(f"strategy has {f.size} workers but the scenario has {len(scenario)}")
    return f, p


def _next_arrays(policy: SchedulerPolicy, scenario, round_index: int, seed: int):
    if policy.kind == FIXED:
        return _check_fixed(policy, scenario)
    rng = stream(seed, "policy", round_index)
    f, p = _uniform(scenario, rng)
    if policy.kind == RSS:
        return f, p
    # GSS: keep the cheaper of the incumbent and one fresh candidate
    energy = _round_energy(f, p, scenario)
    if policy.incumbent is None or energy < policy.incumbent_energy:
        policy.incumbent = (f, p)
        policy.incumbent_energy = energy
    policy.energy_history.append(policy.incumbent_energy)
    return policy.incumbent


def next_assignment(policy: SchedulerPolicy, scenario, round_index: int, seed: int) -> list[ResourceAssignment]:
    """Assignments for one round; updates the GSS incumbent in place."""
    f, p = _next_arrays(policy, scenario, round_index, seed)
    return [ResourceAssignment(float(a), float(b)) for a, b in zip(f, p)]


@dataclass(frozen=True)
class RunRecord:
    run: int
    total: float
    computation: float
    transmission: float
    time_per_round: float
    global_iterations: int
    violations: int
    violated_rounds: int


METRICS = ("total", "computation", "transmission", "time_per_round", "global_iterations", "violations")


@dataclass(frozen=True)
class OnlineSummary:
    policy: str
    records: tuple[RunRecord, ...]

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.records], dtype=float)

    def mean(self, metric: str) -> float:
        return float(self.values(metric).mean())

    def std(self, metric: str) -> float:
        # population STD: a single run has zero spread
        return float(self.values(metric).std(ddof=0))

    @property
    def safe_fraction(self) -> float:
        """Share of runs in which no round missed the deadline."""
        return float(np.mean([r.violations == 0 for r in self.records]))


def _run_sim(policy, scenario, run_seed):
    draws = draw_sim(scenario, JITTERED, seed=run_seed)
    n = draws.global_iterations
    comp = trans = wall = 0.0
    violations = violated_rounds = 0
    for i in range(n):
        f, p = _next_arrays(policy, scenario, i, run_seed)
        out = round_outcome(f, p, draws.local_iterations, scenario)
        comp += float(out.computation_total)
        trans += float(out.transmission_total)
        wall += float(out.wall_time(scenario.deadline))
        v = int(out.violations)
        violations += v
        violated_rounds += v > 0
    return comp, trans, wall / n, n, violations, violated_rounds


def _run_toy(policy, scenario, run_seed, task_options):
    from .fedtoy import make_task, run_toy_fl

    task = make_task(scenario, seed=run_seed, **(task_options or {}))
    outcome = run_toy_fl(scenario, lambda i: _next_arrays(policy, scenario, i, run_seed), task)
    return (
        outcome.computation,
        outcome.transmission,
        outcome.time_per_round,
        outcome.global_iterations,
        outcome.violations,
        outcome.violated_rounds,
    )


def run_online(
    policy: SchedulerPolicy,
    scenario,
    runs: int = 100,
    seed: int = 42,
    learner: str = SIM,
    task_options: dict | None = None,
) -> OnlineSummary:
    """Replay ``policy`` over ``runs`` independent FL processes."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if learner not in (SIM, TOY):
        raise ValueError(f"unknown learner {learner!r}; expected 'sim' or 'toy'")
    if policy.kind == FIXED:
        _check_fixed(policy, scenario)
    records = []
    for r in range(runs):
        run_seed = derive_seed(seed, "online", r)
        policy.reset()
        if learner == SIM:
            res = _run_sim(policy, scenario, run_seed)
        else:
            res = _run_toy(policy, scenario, run_seed, task_options)
        comp, trans, tpr, n, viol, vrounds = res
        total = comp + trans
        if not math.isfinite(total):
            raise RuntimeError(f"{policy.name}: non-finite energy in run {r}")
        records.append(RunRecord(r, total, comp, trans, tpr, int(n), int(viol), int(vrounds)))
    return OnlineSummary(policy.name, tuple(records))


def reduction(baseline: float, value: float) -> float:
    """Relative energy saving of ``value`` against ``baseline``, in percent."""
    if baseline == 0:
        return 0.0
    return 100.0 * (baseline - value) / baseline
