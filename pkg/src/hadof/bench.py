"""Declarative experiment sweeps and their CSV / JSON outputs.

Aggregate CSV columns, in order::

    solver, n, rep, best_acc, avg_acc, wall_s, modelled_qpu_s, makespan_s,
    best_obj, ref_obj, flagged, error

``flagged`` counts samples whose sign differs from the reference (scored 0);
``error`` is empty unless the solver raised.  Each repetition also gets one
``reference`` row holding the annealing reference objective.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import genome
from .baselines import SaConfig, reference_objective, simulated_annealing
from .engine import HadofConfig, SolveReport, accuracy_stats, full_qaoa_solve, hadof_solve
from .qubo import QuboProblem, brute_force, load_qubo, random_qubo
from .scheduler import POLICIES, BackendSpec, LocalExecutor

log = logging.getLogger(__name__)

SOLVERS = ("hadof-sequential", "hadof-parallel", "full-qaoa", "sa", "brute")
CSV_COLUMNS = [
    "solver", "n", "rep", "best_acc", "avg_acc", "wall_s", "modelled_qpu_s", "makespan_s",
    "best_obj", "ref_obj", "flagged", "error",
]
SERIES = ("best_acc", "avg_acc", "wall_s", "modelled_qpu_s")


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    problem: dict
    solvers: list[str]
    seed: int = 0
    repetitions: int = 1
    hadof: dict = field(default_factory=dict)
    sa: dict = field(default_factory=dict)
    backends: list[dict] = field(default_factory=list)
    policy: str = "parallel-one-backend"
    workers: int = 1
    output_dir: str = "results"
    measure_wall_clock: bool = True
    store_samples: bool = False
    concurrent_repetitions: bool = False

    def __post_init__(self) -> None:
        if not self.solvers:
            raise SpecError("at least one solver is required")
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise SpecError(f"unknown solvers {sorted(unknown)}; choose from {SOLVERS}")
        if self.repetitions < 1:
            raise SpecError("repetitions must be >= 1")
        if self.problem.get("type") not in ("random", "qubo", "fasta"):
            raise SpecError("problem.type must be one of random, qubo, fasta")
        if self.problem["type"] == "random" and "n" not in self.problem:
            raise SpecError("random problems need n")
        if self.policy not in POLICIES:
            raise SpecError(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        try:
            SaConfig(**self.sa)
            HadofConfig(**self.hadof)
            self.backend_specs()
        except (TypeError, ValueError) as exc:
            raise SpecError(f"invalid solver settings: {exc}") from exc

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        try:
            return cls(**data)
        except TypeError as exc:
            raise SpecError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from exc

    def hadof_config(self, mode: str, seed: int) -> HadofConfig:
        try:
            return HadofConfig(**{**self.hadof, "mode": mode, "seed": seed})
        except (TypeError, ValueError) as exc:
            raise SpecError(f"hadof overrides: {exc}") from exc

    def backend_specs(self) -> list[BackendSpec]:
        return [BackendSpec(**b) for b in self.backends] or [BackendSpec()]


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def problems(spec: ExperimentSpec, rep: int) -> list[tuple[int, QuboProblem, dict]]:
    """Problems for one repetition as ``(size label, qubo, extra metadata)``."""
    src = spec.problem
    if src["type"] == "random":
        sizes = src["n"] if isinstance(src["n"], list) else [src["n"]]
        return [
            (n, random_qubo(n, src.get("lo", -10.0), src.get("hi", 10.0), derive_seed(spec.seed, n, rep)), {})
            for n in sizes
        ]
    if src["type"] == "qubo":
        qubo = load_qubo(src["path"])
        return [(qubo.n, qubo, {})]
    reads = genome.read_fasta(src["path"])
    graph = genome.compute_overlaps(reads, src.get("min_overlap", 3), src.get("transitive_reduction", False))
    A = src.get("A", 1.0)
    encode = genome.encode_permutation_qubo if src.get("encoding", "edge") == "permutation" else genome.encode_edge_qubo
    qubo, ctx = encode(graph, A)
    meta = {"path_energy": genome.path_energy(ctx, A), "_ctx": ctx, "_reads": reads, "_graph": graph}
    return [(qubo.n, qubo, meta)]


def _report_from_samples(solver: str, samples: np.ndarray, objectives: np.ndarray, wall: float) -> SolveReport:
    best = int(np.argmin(objectives))
    return SolveReport(
        solver=solver,
        best_assignment=np.asarray(samples[best], dtype=np.int8),
        best_objective=float(objectives[best]),
        sample_objectives=np.asarray(objectives, dtype=float),
        final_expectations=np.asarray(samples, dtype=float).mean(axis=0),
        wall_clock_s=wall,
    )


def solve(solver: str, qubo: QuboProblem, spec: ExperimentSpec, seed: int) -> SolveReport:
    if solver.startswith("hadof-"):
        config = spec.hadof_config(solver.removeprefix("hadof-"), seed)
        if qubo.n < config.k:
            config = replace(config, k=qubo.n)
        with LocalExecutor(spec.workers, spec.backend_specs(), spec.policy) as ex:
            return hadof_solve(qubo, config, ex)
    if solver == "full-qaoa":
        with LocalExecutor(1, spec.backend_specs(), spec.policy) as ex:
            return full_qaoa_solve(qubo, spec.hadof_config("sequential", seed), ex)
    t0 = time.perf_counter()
    if solver == "sa":
        x, _, energies = simulated_annealing(qubo, SaConfig(**{**spec.sa, "seed": seed}))
        wall = time.perf_counter() - t0
        report = _report_from_samples("sa", np.atleast_2d(x), np.array([energies.min()]), wall)
        report.sample_objectives = energies
        return report
    if solver == "brute":
        x, value = brute_force(qubo)
        return _report_from_samples("brute", x[None, :], np.array([value]), time.perf_counter() - t0)
    raise SpecError(f"unknown solver {solver!r}")


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(round(value, 12))
    return str(value)


def run_experiment(spec: ExperimentSpec, progress: Callable[[str], None] | None = None) -> dict[str, Path]:
    """Run every (repetition, problem, solver) cell and write the result files.

    Returns the paths of the aggregate CSV, the run directory and each series file.
    """
    out = Path(spec.output_dir)
    runs = out / "runs"
    runs.mkdir(parents=True, exist_ok=True)
    reps = range(spec.repetitions)
    if spec.concurrent_repetitions and spec.repetitions > 1:
        with ThreadPoolExecutor(max_workers=spec.repetitions) as pool:
            per_rep = list(pool.map(lambda r: _run_repetition(spec, r, runs, progress), reps))
    else:
        per_rep = [_run_repetition(spec, r, runs, progress) for r in reps]
    rows = [row for chunk in per_rep for row in chunk]

    paths = {"csv": out / "results.csv", "runs": runs}
    with paths["csv"].open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    for column in SERIES:
        paths[f"series_{column}"] = _write_series(rows, column, out / f"series_{column}.csv")
    return paths


def _run_repetition(spec: ExperimentSpec, rep: int, runs: Path, progress) -> list[dict]:
    rows: list[dict] = []
    for n, qubo, meta in problems(spec, rep):
        ref_seed = derive_seed(spec.seed, n, rep, 1)
        t0 = time.perf_counter()
        if meta.get("path_energy"):
            # a valid assembly path has a known energy, which is the exact optimum
            ref = float(meta["path_energy"])
        else:
            ref = reference_objective(qubo, SaConfig(**{**spec.sa, "seed": ref_seed}))
        ref_wall = time.perf_counter() - t0 if spec.measure_wall_clock else 0.0
        public = {k: v for k, v in meta.items() if not k.startswith("_")}
        rows.append(_row("reference", n, rep, 1.0, 1.0, ref_wall, 0.0, 0.0, ref, ref, 0, ""))
        for solver in spec.solvers:
            seed = derive_seed(spec.seed, n, rep, 2)
            if progress:
                progress(f"rep {rep} n={n} {solver}")
            try:
                report = solve(solver, qubo, spec, seed)
            except SpecError:
                raise
            except Exception as exc:  # recorded per row; the sweep continues
                log.warning("solver %s failed on n=%s rep=%s: %s", solver, n, rep, exc)
                rows.append(_row(solver, n, rep, "", "", "", "", "", "", ref, "", f"{type(exc).__name__}: {exc}"))
                continue
            stats = accuracy_stats(report, ref)
            wall = report.wall_clock_s if spec.measure_wall_clock else 0.0
            rows.append(
                _row(solver, n, rep, stats["best_acc"], stats["avg_acc"], wall, report.modelled_qpu_s,
                     report.modelled_makespan_s, report.best_objective, ref, stats["flagged"], "")
            )
            record = report.to_dict(include_wall_clock=spec.measure_wall_clock)
            if not spec.store_samples:
                record.pop("sample_objectives")
                record.pop("trace")
            record.update({"n": n, "rep": rep, "reference_objective": ref, **stats, **public})
            if "_ctx" in meta:
                record["assembly"] = _assemble(report, meta, runs / f"{solver}_n{n}_rep{rep}.fa")
            (runs / f"{solver}_n{n}_rep{rep}.json").write_text(json.dumps(record, sort_keys=True) + "\n")
    return rows


def _assemble(report: SolveReport, meta: dict, fasta_path: Path) -> dict:
    path = genome.decode_path(report.best_assignment, meta["_ctx"])
    out = {"valid": path.valid, "covers_all": path.covers_all, "diagnostic": path.diagnostic, "order": path.order}
    if path.valid:
        contig = genome.merge_sequence(path, meta["_reads"], meta["_graph"])
        fasta_path.write_text(genome.format_fasta([("contig", contig)]))
        out["fasta"] = fasta_path.name
    return out


def _row(solver, n, rep, best_acc, avg_acc, wall, qpu, makespan, best_obj, ref, flagged, error) -> dict:
    return dict(zip(CSV_COLUMNS, [solver, n, rep, best_acc, avg_acc, wall, qpu, makespan, best_obj, ref, flagged, error]))


def _write_series(rows: list[dict], column: str, path: Path) -> Path:
    """Mean of ``column`` per problem size (rows) and solver (columns)."""
    solvers = [s for s in dict.fromkeys(r["solver"] for r in rows) if s != "reference"]
    sizes = sorted({r["n"] for r in rows})
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", *solvers])
        for n in sizes:
            line = [n]
            for s in solvers:
                vals = [r[column] for r in rows if r["n"] == n and r["solver"] == s and r[column] != ""]
                line.append(_fmt(float(np.mean(vals))) if vals else "")
            writer.writerow(line)
    return path


def report_summary(csv_path) -> str:
    """Per (solver, n) mean and standard deviation of the accuracy and timing columns."""
    text = Path(csv_path).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return ""
    missing = {"solver", "n", "best_acc", "avg_acc", "wall_s", "modelled_qpu_s"} - set(reader.fieldnames)
    if missing:
        raise ValueError(f"{csv_path}: missing columns {sorted(missing)}")
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in reader:
        groups.setdefault((row["solver"], row["n"]), []).append(row)
    if not groups:
        return ""

    def stat(rows: list[dict], col: str) -> str:
        vals = [float(r[col]) for r in rows if r.get(col, "") != ""]
        if not vals:
            return "-"
        sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
        return f"{statistics.fmean(vals):.4f}±{sd:.4f}"

    header = ["solver", "n", "runs", "best_acc", "avg_acc", "wall_s", "modelled_qpu_s", "flags"]
    lines = [header]
    for (solver, n), rows in groups.items():
        flags = sum(1 for r in rows if r.get("flagged") not in ("", "0", None) or r.get("error"))
        lines.append([solver, n, str(len(rows)), *(stat(rows, c) for c in header[3:7]), str(flags)])
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in lines)
