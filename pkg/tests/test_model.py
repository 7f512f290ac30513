import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fedga.model import (
    CLASS_DEFAULTS,
    HIGH_END,
    LOW_END,
    ChannelParams,
    ModelProfile,
    WorkerSpec,
    channel_gain,
    computation_energy,
    computation_time,
    data_rate,
    omega,
    round_outcome,
    transmission_energy,
    transmission_time,
)
from fedga.scenario import Scenario

from . import oracles as o

CH = ChannelParams()
PROFILE = ModelProfile()


def make_scenario(distances, samples=1000, kind=HIGH_END, deadline=13.0, hetero=0.5):
    f_max, c, p_max = CLASS_DEFAULTS[kind]
    workers = tuple(
        WorkerSpec(i, kind, f_max, p_max, c, 1e-28, float(d), samples, hetero) for i, d in enumerate(distances)
    )
    return Scenario(workers, CH, PROFILE, deadline, np.asarray(channel_gain(np.asarray(distances, float), CH)))


class TestWorkedValues:
    def test_gain_at_100m(self):
        assert channel_gain(100.0, CH) == pytest.approx(1.99526e-10, rel=1e-5)

    def test_gain_at_1km(self):
        assert channel_gain(1000.0, CH) == pytest.approx(10**-12.7, rel=1e-12)

    def test_gain_decreases_with_distance(self):
        assert channel_gain(10.0, CH) > channel_gain(500.0, CH)

    def test_rate_example(self):
        g = channel_gain(100.0, CH)
        assert g * 1.0 / (CH.bandwidth * CH.noise_density) == pytest.approx(62.95, rel=1e-4)
        assert data_rate(1.0, g, CH) == pytest.approx(1.1998e8, rel=1e-4)

    def test_transmission_examples(self):
        g = channel_gain(100.0, CH)
        r = data_rate(1.0, g, CH)
        assert transmission_time(PROFILE.size_bits, r) == pytest.approx(0.1674, rel=1e-3)
        assert transmission_energy(1.0, PROFILE.size_bits, g, CH) == pytest.approx(0.1674, rel=1e-3)

    def test_computation_examples(self):
        assert computation_time(1e9, 5, 1_800_348, 1000, 4) == pytest.approx(2.2504, rel=1e-4)
        assert computation_energy(1e9, 5, 1_800_348, 1000, 4, 1e-28) == pytest.approx(0.22504, rel=1e-4)

    def test_defaults(self):
        assert CH.noise_density == pytest.approx(10**-18.8, rel=1e-12)
        assert PROFILE.size_bits == 2.008e7
        assert CLASS_DEFAULTS[LOW_END][2] == pytest.approx(0.63096, rel=1e-5)


class TestOracle:
    """Agreement with the 50-digit reference formulas."""

    def test_random_inputs(self, rng):
        for _ in range(200):
            d = rng.uniform(10, 500)
            p = rng.uniform(1e-4, 2.0)
            f = rng.uniform(1e6, 3e9)
            it = int(rng.integers(1, 12))
            samples = int(rng.integers(800, 1201))
            c = float(rng.choice([2.0, 4.0]))
            g = channel_gain(d, CH)
            assert o.rel_err(g, o.gain(d)) < 1e-12
            r = data_rate(p, g, CH)
            assert o.rel_err(r, o.rate(p, o.gain(d))) < 1e-9
            assert o.rel_err(transmission_energy(p, PROFILE.size_bits, g, CH), o.tx_energy(p, o.MODEL_BITS, o.gain(d))) < 1e-9
            assert o.rel_err(computation_time(f, it, o.ALPHA, samples, c), o.comp_time(f, it, o.ALPHA, samples, c)) < 1e-12
            e = computation_energy(f, it, o.ALPHA, samples, c, 1e-28)
            assert o.rel_err(e, o.comp_energy(f, it, o.ALPHA, samples, c, o.CAPACITANCE)) < 1e-12


class TestBoundaries:
    def test_zero_power(self):
        assert data_rate(0.0, 1e-10, CH) == 0.0
        assert transmission_energy(0.0, PROFILE.size_bits, 1e-10, CH) == 0.0
        assert transmission_time(PROFILE.size_bits, 0.0) == math.inf
        assert omega(0.0) == 0.0
        assert omega(0.5) == 1.0

    def test_zero_frequency_or_work(self):
        assert computation_time(1e9, 0, 1e6, 1000, 2) == 0.0
        assert computation_time(0.0, 3, 1e6, 1000, 2) == math.inf
        assert computation_energy(0.0, 5, 1e6, 1000, 2, 1e-28) == 0.0

    @pytest.mark.parametrize("d", [0.0, -5.0])
    def test_bad_distance(self, d):
        with pytest.raises(ValueError):
            channel_gain(d, CH)

    def test_worker_validation(self):
        with pytest.raises(ValueError, match="heterogeneity"):
            WorkerSpec(0, HIGH_END, 3e9, 2.0, 2, 1e-28, 100, 1000, 1.5)
        with pytest.raises(ValueError):
            WorkerSpec(0, HIGH_END, 0.0, 2.0, 2, 1e-28, 100, 1000, 0.5)


class TestProperties:
    @given(st.floats(1e-3, 2.0), st.floats(1e-3, 2.0), st.floats(10, 500))
    def test_transmission_monotone_in_power(self, p1, p2, d):
        lo, hi = sorted((p1, p2))
        g = channel_gain(d, CH)
        if hi > lo * (1 + 1e-9):
            assert transmission_energy(lo, PROFILE.size_bits, g, CH) < transmission_energy(hi, PROFILE.size_bits, g, CH)
            r_lo, r_hi = data_rate(lo, g, CH), data_rate(hi, g, CH)
            assert transmission_time(PROFILE.size_bits, r_lo) > transmission_time(PROFILE.size_bits, r_hi)

    @given(st.floats(1e-3, 2.0), st.floats(10, 500))
    def test_energy_is_time_times_power(self, p, d):
        g = channel_gain(d, CH)
        tr = transmission_time(PROFILE.size_bits, data_rate(p, g, CH))
        assert transmission_energy(p, PROFILE.size_bits, g, CH) == pytest.approx(tr * p, rel=1e-12)

    @given(st.floats(1e-3, 2.0), st.floats(10, 500))
    def test_wider_band_is_faster(self, p, d):
        g = channel_gain(d, CH)
        wide = ChannelParams(bandwidth=2 * CH.bandwidth)
        assert data_rate(p, g, wide) > data_rate(p, g, CH)

    @given(st.floats(1e6, 3e9), st.integers(1, 11), st.integers(800, 1200), st.sampled_from([2.0, 4.0]))
    def test_computation_scaling(self, f, it, samples, c):
        e = computation_energy(f, it, 1e6, samples, c, 1e-28)
        assert computation_energy(2 * f, it, 1e6, samples, c, 1e-28) == pytest.approx(4 * e, rel=1e-12)
        assert computation_energy(f, 2 * it, 1e6, samples, c, 1e-28) == pytest.approx(2 * e, rel=1e-12)
        assert computation_energy(f, it, 1e6, samples, 2 * c, 1e-28) == pytest.approx(e / 2, rel=1e-12)
        assert computation_time(f, it, 1e6, samples, c) > computation_time(f * 1.01, it, 1e6, samples, c)


class TestRoundOutcome:
    def test_single_worker_in_time(self):
        sc = make_scenario([100.0], kind=LOW_END)
        out = round_outcome(np.array([1e9]), np.array([0.5]), 5, sc)
        assert out.compute_time[0] == pytest.approx(2.2504, rel=1e-4)
        assert not out.violated[0]
        assert out.wasted_total == 0

    def test_excluded_worker(self):
        sc = make_scenario([100.0])
        out = round_outcome(np.array([0.0]), np.array([0.0]), 5, sc)
        assert not out.participating[0]
        assert out.round_energy == 0
        assert out.idle

    def test_late_worker_is_wasted(self):
        sc = make_scenario([100.0, 200.0], kind=LOW_END)
        # tau = 11 * 1.8e6 * 1000 / (4 f); choose f so tau is about 14 s
        f = 11 * 1_800_348 * 1000 / (4 * 14.0)
        out = round_outcome(np.array([f, 1e9]), np.array([0.5, 0.5]), np.array([11, 2]), sc)
        assert out.violated.tolist() == [True, False]
        assert out.wasted[0] == pytest.approx(out.energy[0])
        assert out.wasted[1] == 0

    def test_power_gate(self, scenario5):
        f = scenario5.f_max.copy()
        p = scenario5.p_max.copy()
        p[2] = 0.0
        out = round_outcome(f, p, 4, scenario5)
        assert out.energy[2] == 0
        assert not out.participating[2]

    def test_shape_mismatch(self, scenario5):
        with pytest.raises(ValueError):
            round_outcome(np.ones(4), np.ones(4), 3, scenario5)

    @given(st.integers(0, 2**32 - 1))
    def test_invariants(self, seed):
        sc = make_scenario([10, 120, 480, 250], samples=900)
        r = np.random.default_rng(seed)
        f = r.uniform(0, 1, (8, 4)) * sc.f_max * (r.random((8, 4)) > 0.1)
        p = r.uniform(0, 1, (8, 4)) * sc.p_max * (r.random((8, 4)) > 0.1)
        it = r.integers(0, 12, size=4)
        out = round_outcome(f, p, it, sc)
        assert np.all(out.computation >= 0) and np.all(out.transmission >= 0)
        assert np.all(np.isfinite(out.energy))
        np.testing.assert_allclose(out.round_energy, out.energy.sum(axis=1), rtol=1e-15)
        total = out.compute_time + out.upload_time
        np.testing.assert_array_equal(out.violated, out.participating & (total >= sc.deadline))
        assert np.all(out.violated[out.wasted > 0])
        assert np.all(out.energy[p == 0] == 0)
        assert np.all(out.wall_time(sc.deadline) <= sc.deadline)
