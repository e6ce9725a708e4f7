"""Classical reference solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qubo import QuboProblem, brute_force, evaluate_many

__all__ = ["SaConfig", "simulated_annealing", "reference_objective", "default_betas", "brute_force"]


_SWEEP_BLOCK = 64


@dataclass(frozen=True)
class SaConfig:
    """Single-flip Metropolis annealing; ``None`` betas are derived from the coefficients."""

    sweeps: int = 1000
    reads: int = 100
    beta_initial: float | None = None
    beta_final: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps and reads must be >= 1")
        if self.beta_initial is not None and self.beta_initial <= 0:
            raise ValueError("beta_initial must be > 0")
        if self.beta_initial is not None and self.beta_final is not None and self.beta_final < self.beta_initial:
            raise ValueError("beta_final must be >= beta_initial")


def default_betas(problem: QuboProblem) -> tuple[float, float]:
    """Hot start accepts the largest possible uphill move with probability 1/2;
    cold end accepts the smallest non-zero one with probability 1/1000."""
    sym = problem.symmetric
    magnitudes = np.abs(sym)
    max_delta = float(magnitudes.sum(axis=1).max()) if magnitudes.size else 0.0
    nonzero = magnitudes[magnitudes > 0]
    min_delta = float(nonzero.min()) if nonzero.size else 1.0
    if max_delta == 0.0:
        max_delta = 1.0
    hot = float(np.clip(math.log(2) / max_delta, 1e-3, 1e3))
    cold = float(np.clip(math.log(1000) / min_delta, 1e-3, 1e3))
    return hot, max(hot, cold)


def simulated_annealing(problem: QuboProblem, config: SaConfig = SaConfig()) -> tuple[np.ndarray, float, np.ndarray]:
    """Return the best assignment, its objective, and each read's final objective.

    All reads anneal together as rows of one array.  Each sweep visits the
    variables in index order; a flip is taken when it lowers the objective or,
    for an uphill move, with Metropolis probability ``exp(-beta * delta)``.
    Zero-change moves are rejected.
    """
    hot, cold = default_betas(problem)
    beta_initial = config.beta_initial if config.beta_initial is not None else hot
    beta_final = config.beta_final if config.beta_final is not None else max(cold, beta_initial)
    if config.sweeps == 1:
        betas = np.array([beta_final])
    else:
        betas = np.geomspace(beta_initial, beta_final, config.sweeps)

    n, reads = problem.n, config.reads
    # one stream per read, so read r follows the same trajectory whatever the read count
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(reads)]
    sym = np.array(problem.symmetric)
    diag = np.diag(sym).copy()
    np.fill_diagonal(sym, 0.0)

    x = np.stack([g.integers(0, 2, size=n) for g in streams]).astype(float)
    local = np.einsum("ru,uv->rv", x, sym)  # coupling field acting on each variable
    block = np.empty((reads, 0, n))
    for t, beta in enumerate(betas):
        if t % _SWEEP_BLOCK == 0:
            size = min(_SWEEP_BLOCK, len(betas) - t)
            block = np.stack([g.random((size, n)) for g in streams])
        uniforms = block[:, t % _SWEEP_BLOCK, :]
        for i in range(n):
            delta = (1.0 - 2.0 * x[:, i]) * (diag[i] + local[:, i])
            with np.errstate(over="ignore"):
                accept = (delta < 0) | ((delta > 0) & (uniforms[:, i] < np.exp(-beta * delta)))
            if accept.any():
                step = np.where(accept, 1.0 - 2.0 * x[:, i], 0.0)
                x[:, i] += step
                local += step[:, None] * sym[i][None, :]

    energies = evaluate_many(problem, x)
    best = int(np.argmin(energies))
    return x[best].astype(np.int8), float(energies[best]), energies


_REFERENCE_CACHE: dict[tuple[str, SaConfig], float] = {}


def reference_objective(problem: QuboProblem, config: SaConfig = SaConfig()) -> float:
    """Best annealing objective, memoised per (problem content, config)."""
    key = (problem.fingerprint(), config)
    if key not in _REFERENCE_CACHE:
        _REFERENCE_CACHE[key] = simulated_annealing(problem, config)[1]
    return _REFERENCE_CACHE[key]
