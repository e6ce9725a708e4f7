"""Exact statevector simulation of annealing-schedule QAOA circuits.

Basis state ``b`` stores qubit ``j`` in bit ``j`` of ``b`` (qubit 0 is the
least significant bit).  Bitstring keys in :class:`SampleSet` are printed
most-significant-first, so ``"011"`` means qubits 0 and 1 read 1.

Kernels operate on a (B, 2**k) stack of amplitude rows so independent
circuits of equal width can be evolved together; every operation is
row-local, so a row's result is the same whatever else is in the batch.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .qubo import CapacityError, DimensionError, IsingModel

MAX_QUBITS = 24


@dataclass(eq=False)
class Statevector:
    k: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (2**self.k,):
            raise DimensionError(f"expected {2**self.k} amplitudes, got shape {self.amps.shape}")

    @classmethod
    def basis(cls, bits) -> "Statevector":
        """Computational basis state; ``bits[j]`` is the value of qubit j."""
        bits = list(bits)
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[sum(int(b) << j for j, b in enumerate(bits))] = 1.0
        return cls(len(bits), amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities))


@dataclass(frozen=True)
class AnnealSchedule:
    """Fixed QAOA angles for layers m = 1..p."""

    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.betas) != len(self.gammas) or not self.betas:
            raise ValueError("betas and gammas must be non-empty and of equal length")

    @property
    def p(self) -> int:
        return len(self.betas)

    @classmethod
    def linear(cls, p: int, scale: float = 1.0) -> "AnnealSchedule":
        """``beta_m = 1 - m/p`` and ``gamma_m = scale * m/p`` for m = 1..p."""
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        m = np.arange(1, p + 1)
        return cls(tuple(float(b) for b in 1 - m / p), tuple(float(g) for g in scale * m / p))


@dataclass
class SampleSet:
    """Measurement record; ``draws`` keeps basis indices in draw order."""

    k: int
    draws: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.draws.size)

    @property
    def counts(self) -> dict[str, int]:
        tally = Counter(self.draws.tolist())
        return {format(b, f"0{self.k}b"): c for b, c in sorted(tally.items())}

    def bits(self) -> np.ndarray:
        """(shots, k) array of 0/1 with column j holding qubit j."""
        return ((self.draws[:, None] >> np.arange(self.k)) & 1).astype(np.int8)


def _check_width(k: int) -> None:
    if not 1 <= k <= MAX_QUBITS:
        raise CapacityError(f"register width must be in [1, {MAX_QUBITS}], got {k}")


# -- batched kernels -------------------------------------------------------


def plus_amplitudes(k: int, batch: int = 1) -> np.ndarray:
    _check_width(k)
    return np.full((batch, 2**k), 2 ** (-k / 2), dtype=complex)


def cost_phase(amps: np.ndarray, energies: np.ndarray, gamma: float) -> np.ndarray:
    return amps * np.exp(-1j * gamma * energies)


def mixer(amps: np.ndarray, k: int, beta: float) -> np.ndarray:
    """exp(-i beta X) on every qubit, one 2x2 rotation per qubit."""
    c, s = np.cos(beta), -1j * np.sin(beta)
    out = amps.copy()
    batch = out.shape[0]
    for j in range(k):
        view = out.reshape(batch, 2 ** (k - j - 1), 2, 2**j)
        zero, one = view[:, :, 0, :].copy(), view[:, :, 1, :].copy()
        view[:, :, 0, :] = c * zero + s * one
        view[:, :, 1, :] = s * zero + c * one
    return out


def evolve(energies: np.ndarray, k: int, schedule: AnnealSchedule, depth: int) -> np.ndarray:
    """Run layers 1..depth on a (B, 2**k) stack of basis energies from the plus state.

    The plus state is the ground state of the mixer Hamiltonian ``-sum_j X_j``,
    so each mixer layer is ``exp(+i beta X)`` on every qubit; annealing from
    there toward the cost Hamiltonian concentrates weight on low energies.
    """
    if not 1 <= depth <= schedule.p:
        raise ValueError(f"depth must be in [1, {schedule.p}], got {depth}")
    amps = plus_amplitudes(k, energies.shape[0])
    for gamma, beta in zip(schedule.gammas[:depth], schedule.betas[:depth]):
        amps = mixer(cost_phase(amps, energies, gamma), k, -beta)
    return amps


def draw_basis_states(amps: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of one amplitude row; the first s draws do not depend on ``shots``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(np.abs(amps) ** 2)
    draws = np.searchsorted(cdf, rng.random(shots) * cdf[-1], side="right")
    return np.minimum(draws, amps.size - 1)


def apply_readout_flip(draws: np.ndarray, k: int, flip: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= flip < 1.0:
        raise ValueError(f"readout_flip must lie in [0, 1), got {flip}")
    if flip == 0.0:
        return draws
    flips = rng.random((draws.size, k)) < flip
    masks = (flips.astype(np.int64) << np.arange(k)).sum(axis=1)
    return draws ^ masks


# -- single-register API ---------------------------------------------------


def plus_state(k: int) -> Statevector:
    return Statevector(k, plus_amplitudes(k)[0])


def _energies(state: Statevector, model: IsingModel) -> np.ndarray:
    if model.k != state.k:
        raise DimensionError(f"model has {model.k} spins, state has {state.k} qubits")
    return model.basis_energies()


def apply_cost_layer(state: Statevector, model: IsingModel, gamma: float) -> Statevector:
    """Multiply each amplitude by exp(-i gamma E(b)), offset included."""
    return Statevector(state.k, cost_phase(state.amps, _energies(state, model), gamma))


def apply_mixer_layer(state: Statevector, beta: float) -> Statevector:
    return Statevector(state.k, mixer(state.amps[None, :], state.k, beta)[0])


def run_circuit(model: IsingModel, schedule: AnnealSchedule, depth: int) -> Statevector:
    """Layers 1..depth of cost(gamma_m) followed by ``apply_mixer_layer(-beta_m)``."""
    _check_width(model.k)
    amps = evolve(model.basis_energies()[None, :], model.k, schedule, depth)
    return Statevector(model.k, amps[0])


def marginals(probs: np.ndarray, k: int) -> np.ndarray:
    """Per-qubit probability of reading 1 from a length-2**k probability vector.

    Each marginal is ``P(1) / (P(0) + P(1))`` so rounding in the squared
    amplitudes cannot push a symmetric qubit off exactly one half.
    """
    tensor = probs.reshape((2,) * k)
    out = np.empty(k)
    for j in range(k):
        # axis order of the reshaped tensor is qubit k-1 ... qubit 0
        zero, one = tensor.take(0, axis=k - 1 - j).sum(), tensor.take(1, axis=k - 1 - j).sum()
        out[j] = one / (zero + one)
    return out


def qubit_expectations(state: Statevector) -> np.ndarray:
    """Exact probability that each qubit reads 1."""
    return marginals(state.probabilities, state.k)


def sample_bitstrings(
    state: Statevector, shots: int, rng: np.random.Generator, readout_flip: float = 0.0
) -> SampleSet:
    draws = draw_basis_states(state.amps, shots, rng)
    return SampleSet(state.k, apply_readout_flip(draws, state.k, readout_flip, rng))


def sample_expectations(
    state: Statevector, shots: int, rng: np.random.Generator, readout_flip: float = 0.0
) -> np.ndarray:
    """Empirical per-qubit frequency of reading 1 over ``shots`` full-register draws."""
    return sample_bitstrings(state, shots, rng, readout_flip).bits().mean(axis=0)
