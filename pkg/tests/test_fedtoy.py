import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import binomtest

from fedga.config import ScenarioConfig
from fedga.fedtoy import ModelVector, ToyTask, TrainingError, local_train, make_task, run_toy_fl
from fedga.scenario import generate_scenario

from .test_model import make_scenario

FULL = lambda sc: (lambda n: (np.asarray(sc.f_max), np.asarray(sc.p_max)))  # noqa: E731


def test_model_vector_validation():
    assert len(ModelVector.zeros()) == 16
    with pytest.raises(ValueError):
        ModelVector(np.array([1.0, np.nan]))


def test_target_already_met(scenario5):
    task = make_task(scenario5, seed=0)
    w = ModelVector(task.w_star)
    model, it = local_train(0, w, task, target=1.0)
    assert it == 0 and np.array_equal(model.parameters, w.parameters)


@given(st.integers(0, 2**32))
def test_gradient_descent_is_monotone(seed):
    sc = make_scenario([100.0], samples=200, hetero=0.7)
    task = make_task(sc, seed=seed)
    w = ModelVector.zeros()
    losses = [task.local_loss(0, w.parameters)]
    for _ in range(15):
        w, it = local_train(0, w, task, target=losses[-1] * 0.999)
        losses.append(task.local_loss(0, w.parameters))
        assert it >= 1
    assert all(b <= a for a, b in zip(losses, losses[1:]))


def test_divergence_names_worker(scenario5):
    task = make_task(scenario5, seed=0, learning_rate=50.0)
    with pytest.raises(TrainingError, match="worker 2"):
        local_train(2, ModelVector.zeros(), task, target=1e-6)


def test_bad_target(scenario5):
    with pytest.raises(ValueError):
        local_train(0, ModelVector.zeros(), make_task(scenario5, 0), 0.0)


def _halving_iterations(sc, seed, halvings=8):
    task = make_task(sc, seed=seed)
    w, total = ModelVector.zeros(), 0
    for _ in range(halvings):
        w, it = local_train(0, w, task, 0.5 * task.local_loss(0, w.parameters))
        total += it
    return total


def test_heterogeneity_needs_more_iterations():
    # paired seeds: identical base draws, only the conditioning differs
    lo = make_scenario([100.0], samples=1000, hetero=0.1)
    hi = make_scenario([100.0], samples=1000, hetero=0.9)
    diffs = np.array([_halving_iterations(hi, s) - _halving_iterations(lo, s) for s in range(50)])
    wins, losses = int((diffs > 0).sum()), int((diffs < 0).sum())
    assert binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue < 0.01


def test_single_worker_converges_in_one_round():
    sc = make_scenario([100.0], samples=1000, hetero=0.3)
    task = make_task(
        sc, seed=1, relative_local_target=False, local_target=0.04, global_target=0.04, max_local_iterations=10**5
    )
    out = run_toy_fl(sc, FULL(sc), task, deadline=math.inf)
    assert out.global_iterations == 1 and out.converged and out.violations == 0


def test_starvation_hits_round_cap(scenario5):
    task = make_task(scenario5, seed=2, max_rounds=6)
    out = run_toy_fl(scenario5, FULL(scenario5), task, deadline=1e-3)
    assert out.global_iterations == 6 and not out.converged
    assert out.violations == 6 * 5
    assert out.wasted == pytest.approx(out.total)
    assert all(l == pytest.approx(task.global_loss(np.zeros(16))) for l in out.losses)


def test_no_drops_without_deadline(scenario10):
    task = make_task(scenario10, seed=3)
    out = run_toy_fl(scenario10, FULL(scenario10), task, deadline=math.inf)
    assert out.violations == 0 and out.converged
    assert out.local_iterations.shape == (out.global_iterations, 10)


def test_fedavg_weights(monkeypatch):
    sc = make_scenario([100.0, 200.0], samples=900)
    task = make_task(sc, seed=0, max_rounds=1)
    seen = {}
    import fedga.fedtoy as ft

    real = ft.local_train

    def spy(worker, model, task_, target):
        out = real(worker, model, task_, target)
        seen[worker] = out[0].parameters
        return out

    monkeypatch.setattr(ft, "local_train", spy)
    out = run_toy_fl(sc, FULL(sc), task)
    sizes = task.sizes
    expected = (sizes[0] * seen[0] + sizes[1] * seen[1]) / sizes.sum()
    assert task.global_loss(expected) == pytest.approx(out.final_loss, rel=1e-12)


def test_strategy_list_and_mismatch(scenario5):
    from fedga.model import ResourceAssignment

    task = make_task(scenario5, seed=0, max_rounds=2)
    genes = [ResourceAssignment(f, p) for f, p in zip(scenario5.f_max, scenario5.p_max)]
    assert run_toy_fl(scenario5, genes, task).global_iterations == 2
    with pytest.raises(ValueError):
        run_toy_fl(scenario5, genes[:3], task)
    other = generate_scenario(ScenarioConfig(worker_count=6))
    with pytest.raises(ValueError):
        run_toy_fl(other, genes, task)


def test_task_shapes():
    with pytest.raises(ValueError):
        ToyTask((np.ones((3, 2)),), (np.ones(4),), np.ones(2))
