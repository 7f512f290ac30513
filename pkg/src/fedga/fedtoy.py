"""Minimal synchronized FedAvg on synthetic linear regression.

Each worker holds ``D_k`` samples of ``y = x . w* + noise`` where the feature
covariance is diagonal and decays geometrically from 1 down to
``1 / (1 + conditioning * h_k)``. Heterogeneous workers therefore get
ill-conditioned local problems and need more gradient steps to reach the
same loss reduction, which is the relation the simulated environment
encodes with ``I_k = round(2 + 9 h_k)``.

Local training is full-batch gradient descent on the mean squared error. By
default a worker trains until its local loss drops to ``local_target`` (eta)
times the loss of the broadcast model; the process stops when the
sample-weighted global loss reaches ``global_target`` (eps0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import ResourceAssignment, assignments_to_arrays, round_outcome
from .rng import stream


class TrainingError(RuntimeError):
    """Local training diverged."""


@dataclass(frozen=True)
class ModelVector:
    parameters: np.ndarray

    def __post_init__(self):
        w = np.array(self.parameters, dtype=float)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ValueError("model parameters must be a finite vector")
        w.setflags(write=False)
        object.__setattr__(self, "parameters", w)

    def __len__(self) -> int:
        return len(self.parameters)

    @classmethod
    def zeros(cls, dim: int = 16) -> "ModelVector":
        return cls(np.zeros(dim))


@dataclass(frozen=True)
class ToyTask:
    features: tuple[np.ndarray, ...]  # per worker, (D_k, dim)
    targets: tuple[np.ndarray, ...]  # per worker, (D_k,)
    w_star: np.ndarray
    learning_rate: float = 0.25
    max_local_iterations: int = 200
    max_rounds: int = 50
    local_target: float = 0.5
    global_target: float = 0.04
    relative_local_target: bool = True

    def __post_init__(self):
        if len(self.features) != len(self.targets):
            raise ValueError("features and targets must cover the same workers")
        for x, y in zip(self.features, self.targets):
            if x.shape[0] != y.shape[0]:
                raise ValueError("each worker needs one target per sample")

    @property
    def dim(self) -> int:
        return len(self.w_star)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(y) for y in self.targets], dtype=float)

    def local_loss(self, k: int, w) -> float:
        r = self.features[k] @ np.asarray(w) - self.targets[k]
        return float(np.mean(r * r))

    def global_loss(self, w) -> float:
        losses = np.array([self.local_loss(k, w) for k in range(len(self.targets))])
        return float(np.dot(self.sizes, losses) / self.sizes.sum())


def make_task(
    scenario,
    seed: int,
    dim: int = 16,
    conditioning: float = 30.0,
    signal: float = 60.0,
    noise: float = 0.05,
    **options,
) -> ToyTask:
    """Synthetic regression data sized and shaped by ``scenario``'s workers."""
    rng = stream(seed, "toy", "task")
    w_star = rng.normal(0.0, signal / math.sqrt(dim), size=dim)
    features, targets = [], []
    for w in scenario.workers:
        wr = stream(seed, "toy", "worker", w.id)
        scale = np.geomspace(1.0, 1.0 / (1.0 + conditioning * w.heterogeneity), dim)
        x = wr.normal(size=(w.samples, dim)) * np.sqrt(scale)
        y = x @ w_star + wr.normal(0.0, noise, size=w.samples)
        features.append(x)
        targets.append(y)
    return ToyTask(tuple(features), tuple(targets), w_star, **options)


def local_train(worker: int, model: ModelVector, task: ToyTask, target: float):
    """Gradient descent on worker ``worker`` until its loss is <= ``target``.

    Returns the new model and the number of iterations used (0 if the target
    already holds).
    """
    if not target > 0:
        raise ValueError("local target must be > 0")
    x, y = task.features[worker], task.targets[worker]
    w = np.array(model.parameters, dtype=float)
    scale = 2.0 * task.learning_rate / len(y)
    it = 0
    r = x @ w - y
    loss = float(np.mean(r * r))
    while loss > target and it < task.max_local_iterations:
        with np.errstate(over="ignore", invalid="ignore"):
            w -= scale * (x.T @ r)
            r = x @ w - y
            loss = float(np.mean(r * r))
        it += 1
        if not math.isfinite(loss):
            raise TrainingError(f"worker {worker}: local training diverged after {it} iterations")
    return ModelVector(w), it


@dataclass(frozen=True)
class FLProcessOutcome:
    global_iterations: int
    converged: bool
    computation: float
    transmission: float
    wasted: float
    violations: int
    violated_rounds: int
    time_per_round: float
    final_loss: float
    local_iterations: np.ndarray  # (rounds, K), 0 for workers that sat out
    losses: tuple[float, ...]  # global loss after each round

    @property
    def total(self) -> float:
        return self.computation + self.transmission


Strategy = Sequence[ResourceAssignment] | Callable[[int], tuple]


def _strategy_arrays(strategy, n: int, k: int):
    if callable(strategy):
        f, p = strategy(n)
    else:
        f, p = assignments_to_arrays(strategy)
    f, p = np.asarray(f, dtype=float), np.asarray(p, dtype=float)
    if f.shape != (k,) or p.shape != (k,):
        raise ValueError(f"strategy must assign all {k} workers")
    return f, p


def run_toy_fl(scenario, strategy: Strategy, task: ToyTask, deadline: float | None = None) -> FLProcessOutcome:
    """Run synchronized FedAvg until the global target or the round cap.

    ``strategy`` is a list of per-worker assignments or a callable mapping the
    round index to ``(frequency, power)`` arrays. Updates that miss the
    deadline are discarded; a round without updates keeps the old model.
    """
    k = len(scenario)
    if len(task.targets) != k:
        raise ValueError(f"task has {len(task.targets)} workers but the scenario has {k}")
    if deadline is None:
        deadline = scenario.deadline
    sizes = task.sizes
    model = ModelVector.zeros(task.dim)
    loss = task.global_loss(model.parameters)
    comp = trans = wasted = wall = 0.0
    violations = violated_rounds = 0
    iterations, losses = [], []
    n = 0
    while loss > task.global_target and n < task.max_rounds:
        f, p = _strategy_arrays(strategy, n, k)
        active = (f > 0) & (p > 0)
        updates = [None] * k
        its = np.zeros(k, dtype=int)
        for i in np.flatnonzero(active):
            target = task.local_target
            if task.relative_local_target:
                target *= task.local_loss(i, model.parameters)
            updates[i], its[i] = local_train(i, model, task, target)
        out = round_outcome(f, p, its, scenario, deadline)
        comp += float(out.computation_total)
        trans += float(out.transmission_total)
        wasted += float(out.wasted_total)
        wall += float(out.wall_time(deadline))
        v = int(out.violations)
        violations += v
        violated_rounds += v > 0
        received = active & ~out.violated
        if received.any():
            weights = sizes[received] / sizes[received].sum()
            stacked = np.stack([updates[i].parameters for i in np.flatnonzero(received)])
            model = ModelVector(weights @ stacked)
        loss = task.global_loss(model.parameters)
        iterations.append(its)
        losses.append(loss)
        n += 1
    return FLProcessOutcome(
        global_iterations=n,
        converged=loss <= task.global_target,
        computation=comp,
        transmission=trans,
        wasted=wasted,
        violations=violations,
        violated_rounds=violated_rounds,
        time_per_round=wall / n if n else 0.0,
        final_loss=loss,
        local_iterations=np.array(iterations, dtype=int).reshape(n, k),
        losses=tuple(losses),
    )
