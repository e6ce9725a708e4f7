import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.stats import binom

from hadof.qubo import CapacityError, DimensionError, IsingModel, QuboProblem, to_ising
from hadof.simulator import (
    AnnealSchedule,
    SampleSet,
    Statevector,
    apply_cost_layer,
    apply_mixer_layer,
    plus_state,
    qubit_expectations,
    run_circuit,
    sample_bitstrings,
    sample_expectations,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0])
I2 = np.eye(2)


def kron_on(op, j, k):
    """Dense operator acting with ``op`` on qubit j of k (qubit 0 least significant)."""
    out = np.eye(1)
    for q in reversed(range(k)):
        out = np.kron(out, op if q == j else I2)
    return out


def dense_hamiltonian(model: IsingModel) -> np.ndarray:
    dim = 2**model.k
    H = model.offset * np.eye(dim)
    for i, hi in enumerate(model.h):
        H = H + hi * kron_on(Z, i, model.k)
    for (i, j), v in model.J.items():
        H = H + v * kron_on(Z, i, model.k) @ kron_on(Z, j, model.k)
    return H


def dense_mixer_sum(k):
    return sum(kron_on(X, j, k) for j in range(k))


def random_state(k, rng):
    v = rng.normal(size=2**k) + 1j * rng.normal(size=2**k)
    return Statevector(k, v / np.linalg.norm(v))


def random_model(k, rng):
    J = {(i, j): float(rng.uniform(-1, 1)) for i in range(k) for j in range(i + 1, k)}
    return IsingModel(k, rng.uniform(-1, 1, size=k), J, float(rng.uniform(-1, 1)))


class TestPlusState:
    def test_k1(self):
        np.testing.assert_allclose(plus_state(1).amps, [2**-0.5, 2**-0.5])

    def test_k5(self):
        s = plus_state(5)
        assert s.amps.shape == (32,)
        np.testing.assert_allclose(s.amps, 2**-2.5)

    @pytest.mark.parametrize("k", [1, 3, 8])
    def test_norm(self, k):
        assert plus_state(k).norm() == pytest.approx(1.0, abs=1e-12)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            plus_state(25)
        with pytest.raises(CapacityError):
            plus_state(0)


class TestCostLayer:
    def test_gamma_zero_identity(self, rng):
        s = random_state(4, rng)
        out = apply_cost_layer(s, random_model(4, rng), 0.0)
        np.testing.assert_allclose(out.amps, s.amps, atol=1e-12)

    def test_single_field_phase(self):
        s = plus_state(1)
        out = apply_cost_layer(s, IsingModel(1, np.array([1.0]), {}), math.pi)
        want = [s.amps[0] * np.exp(-1j * math.pi), s.amps[1] * np.exp(1j * math.pi)]
        np.testing.assert_allclose(out.amps, want, atol=1e-12)

    def test_matches_dense_exponential(self, rng):
        m = random_model(3, rng)
        s = random_state(3, rng)
        want = expm(-1j * 0.7 * dense_hamiltonian(m)) @ s.amps
        np.testing.assert_allclose(apply_cost_layer(s, m, 0.7).amps, want, atol=1e-12)

    def test_norm_preserved(self, rng):
        s = random_state(5, rng)
        out = apply_cost_layer(s, random_model(5, rng), 2.3)
        assert out.norm() == pytest.approx(s.norm(), abs=1e-12)

    def test_layers_commute(self, rng):
        s, m = random_state(4, rng), random_model(4, rng)
        a = apply_cost_layer(apply_cost_layer(s, m, 0.3), m, 1.1)
        b = apply_cost_layer(apply_cost_layer(s, m, 1.1), m, 0.3)
        np.testing.assert_allclose(a.amps, b.amps, atol=1e-12)

    def test_width_mismatch(self, rng):
        with pytest.raises(DimensionError):
            apply_cost_layer(plus_state(3), random_model(2, rng), 0.1)


class TestMixerLayer:
    def test_beta_zero_identity(self, rng):
        s = random_state(4, rng)
        np.testing.assert_allclose(apply_mixer_layer(s, 0.0).amps, s.amps, atol=1e-12)

    def test_half_pi_flips_with_phase(self):
        out = apply_mixer_layer(Statevector.basis([0]), math.pi / 2)
        np.testing.assert_allclose(out.amps, [0, -1j], atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_matches_dense_exponential(self, k, rng):
        s = random_state(k, rng)
        want = expm(-1j * 0.37 * dense_mixer_sum(k)) @ s.amps
        np.testing.assert_allclose(apply_mixer_layer(s, 0.37).amps, want, atol=1e-12)

    def test_norm_preserved(self, rng):
        s = random_state(6, rng)
        assert apply_mixer_layer(s, 1.234).norm() == pytest.approx(1.0, abs=1e-12)


class TestSchedule:
    def test_default_p5(self):
        s = AnnealSchedule.linear(5)
        np.testing.assert_allclose(s.betas, [0.8, 0.6, 0.4, 0.2, 0.0], atol=1e-15)
        np.testing.assert_allclose(s.gammas, [0.2, 0.4, 0.6, 0.8, 1.0], atol=1e-15)

    @given(st.integers(1, 40))
    def test_monotone(self, p):
        s = AnnealSchedule.linear(p)
        assert all(a >= b for a, b in zip(s.betas, s.betas[1:]))
        assert all(a <= b for a, b in zip(s.gammas, s.gammas[1:]))

    def test_invalid(self):
        with pytest.raises(ValueError):
            AnnealSchedule.linear(0)
        with pytest.raises(ValueError):
            AnnealSchedule((0.1,), ())


def oracle_circuit(model: IsingModel, schedule: AnnealSchedule, depth: int) -> np.ndarray:
    """Dense-matrix reference: cost exp(-i g H) then exp(+i b sum X) per layer."""
    H = dense_hamiltonian(model)
    B = dense_mixer_sum(model.k)
    state = np.full(2**model.k, 2 ** (-model.k / 2), dtype=complex)
    for g, b in zip(schedule.gammas[:depth], schedule.betas[:depth]):
        state = expm(1j * b * B) @ (expm(-1j * g * H) @ state)
    return state


class TestRunCircuit:
    def test_matches_dense_oracle(self, rng):
        m = random_model(3, rng)
        sched = AnnealSchedule.linear(4, 1.3)
        np.testing.assert_allclose(run_circuit(m, sched, 4).amps, oracle_circuit(m, sched, 4), atol=1e-10)

    def test_composes_public_layers(self, rng):
        m = random_model(3, rng)
        sched = AnnealSchedule.linear(3)
        s = plus_state(3)
        for g, b in zip(sched.gammas, sched.betas):
            s = apply_mixer_layer(apply_cost_layer(s, m, g), -b)
        np.testing.assert_allclose(run_circuit(m, sched, 3).amps, s.amps, atol=1e-12)

    def test_zero_model_is_plus_state(self):
        out = run_circuit(IsingModel(3, np.zeros(3), {}), AnnealSchedule.linear(5), 5)
        overlap = np.vdot(plus_state(3).amps, out.amps)
        assert abs(overlap) == pytest.approx(1.0, abs=1e-12)

    def test_single_field_prefers_spin_up(self):
        # h = -1: spin +1 (bit 0) has energy -1, the ground state
        m = IsingModel(1, np.array([-1.0]), {})
        out = run_circuit(m, AnnealSchedule.linear(5), 5)
        oracle = np.abs(oracle_circuit(m, AnnealSchedule.linear(5), 5)) ** 2
        assert out.probabilities[0] == pytest.approx(oracle[0], abs=1e-12)
        assert out.probabilities[0] > 0.5

    def test_depths_differ(self, rng):
        m = random_model(3, rng)
        sched = AnnealSchedule.linear(5)
        assert not np.allclose(run_circuit(m, sched, 1).amps, run_circuit(m, sched, 2).amps)

    def test_zero_betas_keep_uniform_probabilities(self, rng):
        m = random_model(4, rng)
        sched = AnnealSchedule((0.0,) * 4, (0.3, 0.6, 0.9, 1.2))
        np.testing.assert_allclose(run_circuit(m, sched, 4).probabilities, 1 / 16, atol=1e-12)

    def test_depth_bounds(self, rng):
        with pytest.raises(ValueError):
            run_circuit(random_model(2, rng), AnnealSchedule.linear(3), 4)

    def test_low_energy_pair_favoured(self):
        q = QuboProblem.from_terms(2, {(0, 0): -1, (1, 1): -1, (0, 1): 5})
        probs = run_circuit(to_ising(q).normalized(), AnnealSchedule.linear(5), 5).probabilities
        # basis index 1 -> x=[1,0], index 2 -> x=[0,1]
        assert int(np.argmax(probs)) in (1, 2)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_norm_after_25_random_layers(self, seed):
        r = np.random.default_rng(seed)
        m = random_model(5, r)
        sched = AnnealSchedule(tuple(r.uniform(-3, 3, 25)), tuple(r.uniform(-3, 3, 25)))
        assert abs(run_circuit(m, sched, 25).norm() - 1) < 1e-10


class TestExpectations:
    def test_plus_state_exact_half(self):
        np.testing.assert_array_equal(qubit_expectations(plus_state(5)), 0.5)

    def test_basis_bit_order(self):
        np.testing.assert_allclose(qubit_expectations(Statevector.basis([1, 0, 1])), [1, 0, 1])

    def test_in_unit_interval(self, rng):
        e = qubit_expectations(random_state(6, rng))
        assert np.all((e >= 0) & (e <= 1))

    def test_binomial_band(self):
        # two-sided tail of Binomial(500, 0.5) outside 0.5 +- 0.12
        lo, hi = int(np.ceil(0.38 * 500)), int(np.floor(0.62 * 500))
        tail = binom.cdf(lo - 1, 500, 0.5) + binom.sf(hi, 500, 0.5)
        assert tail < 1e-3
        e = sample_expectations(plus_state(5), 500, np.random.default_rng(7))
        assert np.all(np.abs(e - 0.5) <= 0.12)

    def test_basis_state_exact_regardless_of_shots(self):
        s = Statevector.basis([1, 1, 0])
        for shots in (1, 13, 500):
            np.testing.assert_array_equal(sample_expectations(s, shots, np.random.default_rng(0)), [1, 1, 0])

    def test_fixed_seed_reproducible(self, rng):
        s = random_state(5, rng)
        a = sample_expectations(s, 300, np.random.default_rng(4))
        b = sample_expectations(s, 300, np.random.default_rng(4))
        np.testing.assert_array_equal(a, b)

    def test_converges_to_exact(self, rng):
        s = random_state(5, rng)
        e = sample_expectations(s, 100_000, np.random.default_rng(11))
        assert np.max(np.abs(e - qubit_expectations(s))) < 0.01


class TestSampling:
    def test_basis_counts(self):
        ss = sample_bitstrings(Statevector.basis([1, 1, 0]), 10, np.random.default_rng(0))
        assert ss.counts == {"011": 10}

    def test_counts_total(self, rng):
        ss = sample_bitstrings(random_state(4, rng), 777, np.random.default_rng(1))
        assert sum(ss.counts.values()) == 777 == ss.shots
        assert all(len(key) == 4 for key in ss.counts)

    def test_bits_columns(self):
        ss = SampleSet(3, np.array([1, 4, 6]))
        np.testing.assert_array_equal(ss.bits(), [[1, 0, 0], [0, 0, 1], [0, 1, 1]])

    def test_full_flip_noise_marginals(self):
        ss = sample_bitstrings(Statevector.basis([0, 0, 0]), 40_000, np.random.default_rng(2), readout_flip=0.5)
        np.testing.assert_allclose(ss.bits().mean(axis=0), 0.5, atol=0.02)

    def test_draw_order_pure(self, rng):
        s = random_state(4, rng)
        a = sample_bitstrings(s, 50, np.random.default_rng(3), 0.1).draws
        b = sample_bitstrings(s, 50, np.random.default_rng(3), 0.1).draws
        np.testing.assert_array_equal(a, b)

    def test_prefix_property(self, rng):
        s = random_state(4, rng)
        short = sample_bitstrings(s, 20, np.random.default_rng(3)).draws
        long = sample_bitstrings(s, 200, np.random.default_rng(3)).draws
        np.testing.assert_array_equal(long[:20], short)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            sample_bitstrings(plus_state(2), 0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            sample_bitstrings(plus_state(2), 5, np.random.default_rng(0), readout_flip=1.0)
