"""Circuit job execution and the virtual-QPU timing model.

Jobs run for real on local simulator workers.  Independently of that, every
batch is replayed through a small discrete-event model of one or more QPU
backends, so makespan and QPU-usage figures are reproducible and never depend
on host speed or sleeping.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .qubo import IsingModel, basis_energies
from .simulator import AnnealSchedule, SampleSet, apply_readout_flip, draw_basis_states, evolve, marginals

Policy = Literal["sequential", "parallel-one-backend", "parallel-multi-backend"]
POLICIES: tuple[str, ...] = ("sequential", "parallel-one-backend", "parallel-multi-backend")


class JobError(RuntimeError):
    def __init__(self, job_id: str, cause: BaseException):
        super().__init__(f"job {job_id} failed: {cause!r}")
        self.job_id = job_id
        self.cause = cause


@dataclass(frozen=True, eq=False)
class CircuitJob:
    """One sub-circuit evaluation.

    ``kind="expectation"`` returns per-qubit frequencies of reading 1 (exact
    probabilities when ``exact`` is set); ``kind="sample"`` returns ordered
    bitstring draws.  The job's generator is seeded from ``seed_key`` alone.
    """

    job_id: str
    model: IsingModel
    schedule: AnnealSchedule
    depth: int
    shots: int
    seed_key: tuple[int, ...]
    kind: Literal["expectation", "sample"] = "expectation"
    subset: int = 0
    iteration: int = 0
    readout_flip: float = 0.0
    exact: bool = False

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(list(self.seed_key)))


@dataclass
class JobResult:
    job_id: str
    expectations: np.ndarray | None = None
    samples: SampleSet | None = None


@dataclass(frozen=True)
class BackendSpec:
    name: str = "qpu0"
    kind: Literal["local-exact", "local-noisy"] = "local-exact"
    service_time_s: float = 3.0
    queue_delay_s: float = 0.0
    worker_slots: int = 1

    def __post_init__(self) -> None:
        if self.service_time_s < 0:
            raise ValueError("service_time_s must be >= 0")
        if self.queue_delay_s < 0:
            raise ValueError("queue_delay_s must be >= 0")
        if self.worker_slots < 1:
            raise ValueError("worker_slots must be >= 1")


@dataclass(frozen=True)
class LedgerEntry:
    job_id: str
    backend: str
    submit_s: float
    start_s: float
    finish_s: float


@dataclass
class TimingLedger:
    entries: list[LedgerEntry] = field(default_factory=list)
    service_s: list[float] = field(default_factory=list)
    measured_wall_clock_s: float = 0.0
    _end_s: float = field(default=0.0, repr=False)

    def __post_init__(self) -> None:
        self._end_s = max((e.finish_s for e in self.entries), default=0.0)

    @property
    def modelled_qpu_s(self) -> float:
        return float(sum(self.service_s))

    @property
    def modelled_makespan_s(self) -> float:
        if not self.entries:
            return 0.0
        return max(e.finish_s for e in self.entries) - min(e.submit_s for e in self.entries)

    @property
    def end_s(self) -> float:
        """Latest modelled finish tick."""
        return self._end_s

    def add(self, entry: LedgerEntry, service_s: float) -> None:
        self.entries.append(entry)
        self.service_s.append(service_s)
        self._end_s = max(self._end_s, entry.finish_s)

    def extend(self, other: "TimingLedger", shift_s: float = 0.0) -> None:
        """Append ``other`` with every tick moved by ``shift_s``."""
        for e, service in zip(other.entries, other.service_s):
            self.add(
                LedgerEntry(e.job_id, e.backend, e.submit_s + shift_s, e.start_s + shift_s, e.finish_s + shift_s),
                service,
            )
        self.measured_wall_clock_s += other.measured_wall_clock_s

    def totals(self) -> dict:
        return {
            "jobs": len(self.entries),
            "modelled_qpu_s": self.modelled_qpu_s,
            "modelled_makespan_s": self.modelled_makespan_s,
            "measured_wall_clock_s": self.measured_wall_clock_s,
        }

    def write(self, csv_path, totals_path=None) -> None:
        """CSV of per-job ticks plus a JSON footer file with the totals."""
        csv_path = Path(csv_path)
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["job_id", "backend", "submit_s", "start_s", "finish_s"])
            for e in self.entries:
                writer.writerow([e.job_id, e.backend, e.submit_s, e.start_s, e.finish_s])
        totals_path = Path(totals_path) if totals_path else csv_path.with_suffix(".totals.json")
        totals_path.write_text(json.dumps(self.totals(), indent=2) + "\n")


# -- discrete-event model ----------------------------------------------------


def model_batch(n_jobs: int, job_ids: Sequence[str], backends: Sequence[BackendSpec], policy: str) -> TimingLedger:
    """Modelled ticks for a batch of independent jobs all submitted at t=0."""
    if not backends:
        raise ValueError("at least one backend is required")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; choose from {POLICIES}")
    ledger = TimingLedger()
    if policy == "sequential":
        assignment = [0] * n_jobs
        slots = {0: [backends[0].queue_delay_s]}
    elif policy == "parallel-one-backend":
        assignment = [0] * n_jobs
        slots = {0: [backends[0].queue_delay_s] * backends[0].worker_slots}
    else:
        assignment = [i % len(backends) for i in range(n_jobs)]
        slots = {b: [spec.queue_delay_s] * spec.worker_slots for b, spec in enumerate(backends)}
    for job_id, b in zip(job_ids, assignment):
        spec = backends[b]
        free = slots[b]
        slot = int(np.argmin(free))
        start = free[slot]
        finish = start + spec.service_time_s
        free[slot] = finish
        ledger.add(LedgerEntry(job_id, spec.name, 0.0, start, finish), spec.service_time_s)
    return ledger


def qpu_usage_model(n: int, k: int, p: int, service_time_s: float = 3.0, include_final_sweep: bool = True) -> float:
    """Predicted QPU seconds for one HADOF run.

    Counts ``p`` expectation sweeps plus the final sampling sweep of
    ``ceil(n/k)`` circuits each; ``include_final_sweep=False`` counts the expectation sweeps only.
    """
    if n < 1 or k < 1 or p < 1:
        raise ValueError("n, k and p must be positive")
    if service_time_s < 0:
        raise ValueError("service_time_s must be >= 0")
    circuits = math.ceil(n / k)
    sweeps = p + 1 if include_final_sweep else p
    return sweeps * circuits * service_time_s


# -- actual execution ----------------------------------------------------------


def run_jobs(jobs: Sequence[CircuitJob]) -> list[JobResult]:
    """Simulate jobs, evolving equal-width, equal-depth circuits as one stacked batch."""
    groups: dict[tuple, list[int]] = {}
    for idx, job in enumerate(jobs):
        groups.setdefault((job.model.k, job.depth, job.schedule), []).append(idx)
    results: list[JobResult | None] = [None] * len(jobs)
    for (k, depth, schedule), members in groups.items():
        try:
            models = [jobs[i].model for i in members]
            energies = basis_energies(
                k,
                np.stack([m.h for m in models]),
                np.stack([m.coupling_matrix() for m in models]),
                np.array([m.offset for m in models]),
            )
            amps = evolve(energies, k, schedule, depth)
        except Exception as exc:
            raise JobError(jobs[members[0]].job_id, exc) from exc
        for row, i in enumerate(members):
            try:
                results[i] = _measure(jobs[i], amps[row])
            except Exception as exc:
                raise JobError(jobs[i].job_id, exc) from exc
    return results  # type: ignore[return-value]


def _measure(job: CircuitJob, amps: np.ndarray) -> JobResult:
    k = job.model.k
    if job.kind == "expectation" and job.exact:
        return JobResult(job.job_id, expectations=marginals(np.abs(amps) ** 2, k))
    rng = job.rng()
    draws = apply_readout_flip(draw_basis_states(amps, job.shots, rng), k, job.readout_flip, rng)
    samples = SampleSet(k, draws)
    if job.kind == "sample":
        return JobResult(job.job_id, samples=samples)
    return JobResult(job.job_id, expectations=samples.bits().mean(axis=0))


def _chunks(n: int, width: int) -> list[range]:
    width = max(1, min(width, n))
    bounds = np.linspace(0, n, width + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def execute_batch(
    jobs: Sequence[CircuitJob],
    backends: Sequence[BackendSpec],
    policy: str = "parallel-one-backend",
    workers: int = 1,
    pool: Executor | None = None,
) -> tuple[list[JobResult], TimingLedger]:
    """Run a batch of independent jobs and model its QPU timing.

    The sequential policy runs jobs one at a time in submission order.  The
    parallel policies split the batch into ``workers`` contiguous chunks that
    run concurrently on ``pool`` (a temporary thread pool when omitted).
    """
    ledger = model_batch(len(jobs), [j.job_id for j in jobs], backends, policy)
    t0 = time.perf_counter()
    if policy == "sequential":
        results = [r for job in jobs for r in run_jobs([job])]
    else:
        parts = [[jobs[i] for i in rng_] for rng_ in _chunks(len(jobs), workers)]
        if len(parts) <= 1:
            results = run_jobs(parts[0]) if parts else []
        elif pool is not None:
            results = [r for part in pool.map(run_jobs, parts) for r in part]
        else:
            with ThreadPoolExecutor(max_workers=len(parts)) as tmp:
                results = [r for part in tmp.map(run_jobs, parts) for r in part]
    ledger.measured_wall_clock_s = time.perf_counter() - t0
    return results, ledger


class LocalExecutor:
    """Worker pool plus cumulative timing ledger across successive batches.

    Batches are separated by barriers, so each batch's modelled ticks start
    where the previous batch ended.
    """

    def __init__(
        self,
        workers: int = 1,
        backends: Sequence[BackendSpec] | None = None,
        policy: str = "parallel-one-backend",
        pool: Literal["thread", "process"] = "thread",
    ):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}; choose from {POLICIES}")
        self.workers = workers
        self.backends = list(backends) if backends else [BackendSpec()]
        self.policy = policy
        self.ledger = TimingLedger()
        self.jobs_executed = 0
        self._pool: Executor | None = None
        if workers > 1 and policy != "sequential":
            self._pool = ProcessPoolExecutor(workers) if pool == "process" else ThreadPoolExecutor(workers)

    def run(self, jobs: Sequence[CircuitJob]) -> list[JobResult]:
        results, batch = execute_batch(jobs, self.backends, self.policy, self.workers, self._pool)
        self.ledger.extend(batch, shift_s=self.ledger.end_s)
        self.jobs_executed += len(jobs)
        return results

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self) -> "LocalExecutor":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
