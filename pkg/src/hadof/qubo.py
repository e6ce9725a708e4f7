"""QUBO and Ising problem representations.

A :class:`QuboProblem` stores the upper-triangular coefficients of

    f(x) = offset + sum_{i <= j} Q_ij x_i x_j,    x in {0, 1}^n

sparsely, as a mapping ``(i, j) -> Q_ij`` with ``i <= j``.  The Ising form
uses the substitution ``x = (1 - z) / 2`` so bit 0 maps to spin +1 and bit 1
maps to spin -1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

MAX_ENUMERATION_VARS = 24


class DimensionError(ValueError):
    """Assignment or index does not match the problem size."""


class CapacityError(ValueError):
    """Requested size exceeds an enumeration or simulation cap."""


@dataclass(frozen=True)
class QuboProblem:
    """Sparse upper-triangular QUBO with a constant offset.

    Build instances with :meth:`from_terms` when terms may repeat or arrive in
    lower-triangular order; the constructor itself expects normalised keys.
    """

    n: int
    coeffs: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        for i, j in self.coeffs:
            if not (0 <= i <= j < self.n):
                raise DimensionError(f"coefficient key ({i}, {j}) violates 0 <= i <= j < {self.n}")

    @classmethod
    def from_terms(
        cls,
        n: int,
        terms: Iterable[tuple[int, int, float]] | Mapping[tuple[int, int], float],
        offset: float = 0.0,
    ) -> "QuboProblem":
        """Build from ``(i, j, value)`` triples or a ``{(i, j): value}`` map; duplicates accumulate."""
        if isinstance(terms, Mapping):
            terms = ((i, j, v) for (i, j), v in terms.items())
        coeffs: dict[tuple[int, int], float] = {}
        for i, j, value in terms:
            i, j = int(i), int(j)
            key = (i, j) if i <= j else (j, i)
            coeffs[key] = coeffs.get(key, 0.0) + float(value)
        return cls(n=n, coeffs=coeffs, offset=float(offset))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, offset: float = 0.0) -> "QuboProblem":
        """Build from a square matrix; entries below the diagonal fold upward."""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError("matrix must be square")
        rows, cols = np.nonzero(matrix)
        return cls.from_terms(
            matrix.shape[0], ((r, c, matrix[r, c]) for r, c in zip(rows, cols)), offset
        )

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense upper-triangular coefficient matrix (read-only)."""
        upper = np.zeros((self.n, self.n))
        for (i, j), value in self.coeffs.items():
            upper[i, j] = value
        upper.setflags(write=False)
        return upper

    @cached_property
    def symmetric(self) -> np.ndarray:
        """Matrix with pair coefficient ``Q_ij`` at both (i, j) and (j, i) and ``Q_ii`` on the diagonal."""
        upper = self.matrix
        sym = upper + upper.T - np.diag(np.diag(upper))
        sym.setflags(write=False)
        return sym

    @cached_property
    def couplings(self) -> tuple[np.ndarray, np.ndarray]:
        """(upper, symmetric) pair-coefficient matrices with zero diagonals."""
        upper = self.matrix - np.diag(np.diag(self.matrix))
        sym = upper + upper.T
        upper.setflags(write=False)
        sym.setflags(write=False)
        return upper, sym

    def fingerprint(self) -> str:
        """Stable content hash, used for caching reference solutions."""
        payload = json.dumps(to_dict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Ising energy ``offset + sum_i h_i z_i + sum_{i<j} J_ij z_i z_j``."""

    k: int
    h: np.ndarray
    J: Mapping[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self) -> None:
        if len(self.h) != self.k:
            raise DimensionError(f"h has length {len(self.h)}, expected {self.k}")
        for i, j in self.J:
            if not (0 <= i < j < self.k):
                raise DimensionError(f"coupling key ({i}, {j}) violates 0 <= i < j < {self.k}")

    def basis_energies(self) -> np.ndarray:
        """Energy of every computational basis state, indexed with qubit 0 least significant."""
        return basis_energies(self.k, self.h[None, :], self.coupling_matrix()[None], np.array([self.offset]))[0]

    def normalized(self) -> "IsingModel":
        """Copy divided by the largest field or coupling magnitude (unchanged if all are zero)."""
        scale = max([float(np.max(np.abs(self.h), initial=0.0))] + [abs(v) for v in self.J.values()])
        if scale == 0.0:
            return self
        return IsingModel(self.k, self.h / scale, {key: v / scale for key, v in self.J.items()}, self.offset / scale)

    def coupling_matrix(self) -> np.ndarray:
        couplings = np.zeros((self.k, self.k))
        for (i, j), value in self.J.items():
            couplings[i, j] = value
        return couplings


def basis_energies(k: int, h: np.ndarray, couplings: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Batched Ising energies over all ``2**k`` basis states.

    ``h`` has shape (B, k), ``couplings`` (B, k, k) strictly upper triangular,
    ``offsets`` (B,).  Terms are accumulated elementwise in a fixed order so a
    row's result does not depend on the batch it travels in.
    """
    basis = np.arange(2**k)
    spins = 1.0 - 2.0 * ((basis[None, :] >> np.arange(k)[:, None]) & 1)
    energies = np.repeat(offsets[:, None].astype(float), 2**k, axis=1)
    for i in range(k):
        energies += h[:, i, None] * spins[i][None, :]
    for i in range(k):
        for j in range(i + 1, k):
            if np.any(couplings[:, i, j]):
                energies += couplings[:, i, j, None] * (spins[i] * spins[j])[None, :]
    return energies


def _as_bits(problem: QuboProblem, x) -> np.ndarray:
    bits = np.asarray(x, dtype=float)
    if bits.shape[-1] != problem.n:
        raise DimensionError(f"assignment length {bits.shape[-1]} != n={problem.n}")
    return bits


def evaluate(problem: QuboProblem, x) -> float:
    """Objective value of one binary assignment."""
    bits = _as_bits(problem, x)
    if bits.ndim != 1:
        raise DimensionError("evaluate expects a single assignment; use evaluate_many")
    return float(problem.offset + bits @ problem.matrix @ bits)


def evaluate_many(problem: QuboProblem, xs) -> np.ndarray:
    """Objective values for a (S, n) stack of assignments."""
    bits = np.atleast_2d(_as_bits(problem, xs))
    return problem.offset + np.einsum("si,si->s", bits @ problem.matrix, bits)


def to_ising(problem: QuboProblem) -> IsingModel:
    h = np.zeros(problem.n)
    J: dict[tuple[int, int], float] = {}
    offset = problem.offset
    for (i, j), q in problem.coeffs.items():
        if i == j:
            h[i] -= q / 2
            offset += q / 2
        else:
            h[i] -= q / 4
            h[j] -= q / 4
            J[(i, j)] = J.get((i, j), 0.0) + q / 4
            offset += q / 4
    return IsingModel(k=problem.n, h=h, J=J, offset=offset)


def spins_from_bits(x) -> np.ndarray:
    return 1 - 2 * np.asarray(x, dtype=int)


def ising_energy(model: IsingModel, z) -> float:
    z = np.asarray(z, dtype=float)
    if z.shape != (model.k,):
        raise DimensionError(f"spin vector shape {z.shape} != ({model.k},)")
    energy = model.offset + float(model.h @ z)
    for (i, j), value in model.J.items():
        energy += value * z[i] * z[j]
    return energy


def random_qubo(n: int, lo: float = -10.0, hi: float = 10.0, seed: int | None = None) -> QuboProblem:
    """Dense random QUBO: every (i, j) with i <= j drawn uniformly from [lo, hi]."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo}, hi={hi}")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(n)
    values = rng.uniform(lo, hi, size=rows.size)
    coeffs = {(int(i), int(j)): float(v) for i, j, v in zip(rows, cols, values)}
    return QuboProblem(n=n, coeffs=coeffs)


def enumerate_bits(n: int, start: int, stop: int) -> np.ndarray:
    """Rows are the assignments for integers ``start..stop-1``, bit 0 least significant."""
    ints = np.arange(start, stop, dtype=np.int64)
    return ((ints[:, None] >> np.arange(n)) & 1).astype(np.int8)


def brute_force(problem: QuboProblem, chunk: int = 1 << 16) -> tuple[np.ndarray, float]:
    """Exhaustive minimum; ties go to the smallest integer encoding."""
    n = problem.n
    if n > MAX_ENUMERATION_VARS:
        raise CapacityError(f"brute force limited to n <= {MAX_ENUMERATION_VARS}, got {n}")
    best_value, best_index = np.inf, -1
    for start in range(0, 2**n, chunk):
        stop = min(start + chunk, 2**n)
        values = evaluate_many(problem, enumerate_bits(n, start, stop))
        pos = int(np.argmin(values))
        if values[pos] < best_value:
            best_value, best_index = float(values[pos]), start + pos
    return enumerate_bits(n, best_index, best_index + 1)[0], best_value


# -- JSON file format: {"n": int, "offset": float, "terms": [[i, j, value], ...]}


def to_dict(problem: QuboProblem) -> dict:
    terms = [[i, j, float(v)] for (i, j), v in sorted(problem.coeffs.items())]
    return {"n": problem.n, "offset": float(problem.offset), "terms": terms}


def from_dict(data: Mapping) -> QuboProblem:
    try:
        n = int(data["n"])
        terms = data.get("terms", [])
        offset = float(data.get("offset", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed QUBO document: {exc}") from exc
    for term in terms:
        if len(term) != 3 or int(term[0]) > int(term[1]):
            raise ValueError(f"malformed term {term!r}; expected [i, j, value] with i <= j")
    return QuboProblem.from_terms(n, ((t[0], t[1], t[2]) for t in terms), offset)


def save_qubo(problem: QuboProblem, path) -> None:
    Path(path).write_text(json.dumps(to_dict(problem)) + "\n")


def load_qubo(path) -> QuboProblem:
    return from_dict(json.loads(Path(path).read_text()))
