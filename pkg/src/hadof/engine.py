"""Iterative QUBO decomposition with expected-value clamping.

Each variable carries a probability ``P(x_i = 1)``.  A sub-problem over a
subset S keeps the couplings inside S exactly and replaces every variable
outside S by its probability.  Sub-problems are solved with annealing-style
QAOA circuits whose depth grows by one layer per sweep, and the measured
per-qubit frequencies become the new probabilities.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .qubo import CapacityError, DimensionError, QuboProblem, evaluate_many, to_ising
from .scheduler import CircuitJob, LocalExecutor
from .simulator import AnnealSchedule

FULL_QAOA_MAX_QUBITS = 20

PHASE_EXPECTATION = 0
PHASE_SAMPLE = 1


@dataclass(frozen=True)
class Partition:
    subsets: tuple[tuple[int, ...], ...]
    k: int

    def __len__(self) -> int:
        return len(self.subsets)


@dataclass(frozen=True)
class SubProblem:
    subset: tuple[int, ...]
    qubo: QuboProblem

    def to_global(self, local: int) -> int:
        return self.subset[local]


@dataclass(frozen=True)
class HadofConfig:
    k: int = 5
    p: int = 5
    shots_expectation: int = 500
    shots_final: int = 5000
    mode: Literal["sequential", "parallel"] = "sequential"
    seed: int = 0
    readout_flip: float = 0.0
    schedule_scale: float = 1.0
    normalize: bool = True
    exact_expectations: bool = False

    def __post_init__(self) -> None:
        if self.k < 1 or self.p < 1:
            raise ValueError("k and p must be >= 1")
        if self.shots_expectation < 1 or self.shots_final < 1:
            raise ValueError("shot counts must be >= 1")
        if self.mode not in ("sequential", "parallel"):
            raise ValueError(f"mode must be 'sequential' or 'parallel', got {self.mode!r}")
        if not 0.0 <= self.readout_flip < 1.0:
            raise ValueError("readout_flip must lie in [0, 1)")

    def schedule(self) -> AnnealSchedule:
        return AnnealSchedule.linear(self.p, self.schedule_scale)


@dataclass
class SolveReport:
    solver: str
    best_assignment: np.ndarray
    best_objective: float
    sample_objectives: np.ndarray
    final_expectations: np.ndarray
    wall_clock_s: float = 0.0
    modelled_qpu_s: float = 0.0
    modelled_makespan_s: float = 0.0
    jobs_executed: int = 0
    trace: list[np.ndarray] = field(default_factory=list)
    samples: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self, include_wall_clock: bool = True) -> dict:
        data = {
            "solver": self.solver,
            "best_assignment": [int(b) for b in self.best_assignment],
            "best_objective": float(self.best_objective),
            "sample_objectives": [float(v) for v in self.sample_objectives],
            "final_expectations": [float(v) for v in self.final_expectations],
            "modelled_qpu_s": float(self.modelled_qpu_s),
            "modelled_makespan_s": float(self.modelled_makespan_s),
            "jobs_executed": int(self.jobs_executed),
            "trace": [[float(v) for v in snap] for snap in self.trace],
        }
        if include_wall_clock:
            data["wall_clock_s"] = float(self.wall_clock_s)
        return data

    def to_json(self, include_wall_clock: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_clock), sort_keys=True)


def make_partition(n: int, k: int) -> Partition:
    """Contiguous blocks of size k; the last block takes the remainder."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    return Partition(tuple(tuple(range(s, min(s + k, n))) for s in range(0, n, k)), k)


def build_subproblems(problem: QuboProblem, subsets: Sequence[Sequence[int]], expectations) -> list[SubProblem]:
    """Clamp the complement of each subset to ``expectations``, all from one snapshot.

    Inside a subset the coefficients are copied; each local diagonal gains the
    field ``sum_u q(s, u) P_u`` from clamped neighbours, and the offset
    collects the clamped-only linear and pair terms.
    """
    n = problem.n
    probs = np.asarray(expectations, dtype=float)
    if probs.shape != (n,):
        raise DimensionError(f"expectations shape {probs.shape} != ({n},)")
    subsets = [tuple(int(s) for s in subset) for subset in subsets]
    for subset in subsets:
        if len(set(subset)) != len(subset):
            raise ValueError("subset indices must be distinct")
        if any(not 0 <= s < n for s in subset):
            raise DimensionError(f"subset index out of range for n={n}")

    sym = problem.symmetric
    diag = np.diag(problem.matrix)
    upper_off, sym_off = problem.couplings
    outside = np.tile(probs, (len(subsets), 1))
    for row, subset in enumerate(subsets):
        outside[row, list(subset)] = 0.0
    fields = outside @ sym_off
    offsets = problem.offset + outside @ diag + np.einsum("mu,mu->m", outside @ upper_off.T, outside)

    out = []
    for row, subset in enumerate(subsets):
        terms = []
        for a, s in enumerate(subset):
            terms.append((a, a, diag[s] + fields[row, s]))
            for b in range(a + 1, len(subset)):
                value = sym[s, subset[b]]
                if value != 0.0:
                    terms.append((a, b, value))
        out.append(SubProblem(subset, QuboProblem.from_terms(len(subset), terms, float(offsets[row]))))
    return out


def build_subproblem(problem: QuboProblem, subset: Sequence[int], expectations) -> SubProblem:
    """Sub-QUBO over ``subset`` with every other variable clamped to its expected value."""
    return build_subproblems(problem, [subset], expectations)[0]


def accuracy(objective: float, reference: float) -> float:
    """Score of ``objective`` relative to a reference solution scored as 1.

    Both negative gives ``objective / reference``; both positive gives
    ``reference / objective``.  Anything else is not comparable and scores 0
    (see :func:`comparable`).
    """
    if reference == 0:
        raise ValueError("reference objective must be non-zero")
    if objective < 0 and reference < 0:
        return objective / reference
    if objective > 0 and reference > 0:
        return reference / objective
    return 0.0


def comparable(objective: float, reference: float) -> bool:
    return (objective < 0 and reference < 0) or (objective > 0 and reference > 0)


def accuracy_stats(report: SolveReport, reference: float) -> dict:
    """Best accuracy, mean accuracy over all samples and the count of mixed-sign samples."""
    scores = [accuracy(v, reference) for v in report.sample_objectives]
    flagged = sum(not comparable(v, reference) for v in report.sample_objectives)
    return {
        "best_acc": accuracy(report.best_objective, reference),
        "avg_acc": float(np.mean(scores)),
        "flagged": int(flagged),
    }


def _job(
    sub: SubProblem, config: HadofConfig, schedule: AnnealSchedule, depth: int, kind: str, iteration: int, subset: int
) -> CircuitJob:
    phase = PHASE_SAMPLE if kind == "sample" else PHASE_EXPECTATION
    model = to_ising(sub.qubo)
    return CircuitJob(
        job_id=f"{'final' if kind == 'sample' else f'L{iteration}'}-s{subset}",
        model=model.normalized() if config.normalize else model,
        schedule=schedule,
        depth=depth,
        shots=config.shots_final if kind == "sample" else config.shots_expectation,
        seed_key=(config.seed, phase, iteration, subset),
        kind=kind,
        subset=subset,
        iteration=iteration,
        readout_flip=config.readout_flip,
        exact=config.exact_expectations,
    )


def hadof_solve(problem: QuboProblem, config: HadofConfig, executor: LocalExecutor | None = None) -> SolveReport:
    """Solve ``problem`` by iterative decomposition into k-variable sub-circuits.

    Sequential mode commits each subset's new probabilities immediately, so
    later subsets in the same sweep see them.  Parallel mode builds every
    sub-problem of a sweep from the previous sweep's snapshot, runs them as
    one batch and commits at the barrier.  The final sweep runs every
    sub-circuit at full depth; global sample s concatenates the s-th draw of
    each subset.
    """
    if problem.n < config.k:
        raise ValueError(f"need n >= k, got n={problem.n}, k={config.k}")
    own_executor = executor is None
    if own_executor:
        executor = LocalExecutor(workers=1)
    start_jobs = executor.jobs_executed
    start_qpu = executor.ledger.modelled_qpu_s
    start_end = executor.ledger.end_s

    t0 = time.perf_counter()
    partition = make_partition(problem.n, config.k)
    schedule = config.schedule()
    probs = np.full(problem.n, 0.5)
    trace = []
    try:
        for layer in range(1, config.p + 1):
            if config.mode == "sequential":
                for i, subset in enumerate(partition.subsets):
                    sub = build_subproblem(problem, subset, probs)
                    (result,) = executor.run([_job(sub, config, schedule, layer, "expectation", layer, i)])
                    probs[list(subset)] = result.expectations
            else:
                subs = build_subproblems(problem, partition.subsets, probs)
                jobs = [
                    _job(sub, config, schedule, layer, "expectation", layer, i) for i, sub in enumerate(subs)
                ]
                for subset, result in zip(partition.subsets, executor.run(jobs)):
                    probs[list(subset)] = result.expectations
            trace.append(probs.copy())

        final_jobs = [
            _job(sub, config, schedule, config.p, "sample", config.p + 1, i)
            for i, sub in enumerate(build_subproblems(problem, partition.subsets, probs))
        ]
        if config.mode == "sequential":
            results = [r for job in final_jobs for r in executor.run([job])]
        else:
            results = executor.run(final_jobs)
    finally:
        if own_executor:
            executor.close()

    samples = np.zeros((config.shots_final, problem.n), dtype=np.int8)
    for subset, result in zip(partition.subsets, results):
        samples[:, list(subset)] = result.samples.bits()
    objectives = evaluate_many(problem, samples)
    best = int(np.argmin(objectives))
    wall = time.perf_counter() - t0

    return SolveReport(
        solver=f"hadof-{config.mode}",
        best_assignment=samples[best].copy(),
        best_objective=float(objectives[best]),
        sample_objectives=objectives,
        final_expectations=probs.copy(),
        wall_clock_s=wall,
        modelled_qpu_s=executor.ledger.modelled_qpu_s - start_qpu,
        modelled_makespan_s=executor.ledger.end_s - start_end,
        jobs_executed=executor.jobs_executed - start_jobs,
        trace=trace,
        samples=samples,
    )


def full_qaoa_solve(problem: QuboProblem, config: HadofConfig, executor: LocalExecutor | None = None) -> SolveReport:
    """One n-qubit circuit at full depth, sampled ``shots_final`` times."""
    if problem.n > FULL_QAOA_MAX_QUBITS:
        raise CapacityError(f"full-circuit QAOA limited to n <= {FULL_QAOA_MAX_QUBITS}, got {problem.n}")
    own_executor = executor is None
    if own_executor:
        executor = LocalExecutor(workers=1)
    start_jobs, start_qpu, start_end = executor.jobs_executed, executor.ledger.modelled_qpu_s, executor.ledger.end_s
    t0 = time.perf_counter()
    sub = SubProblem(tuple(range(problem.n)), problem)
    try:
        (result,) = executor.run([_job(sub, config, config.schedule(), config.p, "sample", config.p + 1, 0)])
    finally:
        if own_executor:
            executor.close()
    samples = result.samples.bits()
    objectives = evaluate_many(problem, samples)
    best = int(np.argmin(objectives))
    return SolveReport(
        solver="full-qaoa",
        best_assignment=samples[best].copy(),
        best_objective=float(objectives[best]),
        sample_objectives=objectives,
        final_expectations=samples.mean(axis=0),
        wall_clock_s=time.perf_counter() - t0,
        modelled_qpu_s=executor.ledger.modelled_qpu_s - start_qpu,
        modelled_makespan_s=executor.ledger.end_s - start_end,
        jobs_executed=executor.jobs_executed - start_jobs,
        samples=samples,
    )
