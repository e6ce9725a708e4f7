"""Command-line entry point: ``hadof {solve,bench,assemble,gen,report}``.

Exit codes: 0 success, 2 bad spec or arguments, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import genome
from .bench import SOLVERS, ExperimentSpec, SpecError, report_summary, run_experiment, solve
from .engine import accuracy_stats
from .baselines import SaConfig, reference_objective
from .qubo import CapacityError, load_qubo, random_qubo, save_qubo
from .scheduler import POLICIES

EXIT_SPEC = 2
EXIT_SOLVER = 3


def _add_hadof_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="sub-problem size")
    p.add_argument("--p", type=int, help="annealing layers")
    p.add_argument("--shots-expectation", type=int)
    p.add_argument("--shots-final", type=int)
    p.add_argument("--readout-flip", type=float)
    p.add_argument("--schedule-scale", type=float)
    p.add_argument("--no-normalize", action="store_true", help="keep raw Ising coefficients in the phase layer")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--policy", choices=POLICIES, default="parallel-one-backend")


def _hadof_overrides(args) -> dict:
    keys = ("k", "p", "shots_expectation", "shots_final", "readout_flip", "schedule_scale")
    out = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "no_normalize", False):
        out["normalize"] = False
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hadof", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem with one solver")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--qubo", type=Path, help="QUBO JSON file")
    src.add_argument("--n", type=int, help="random instance size")
    p.add_argument("--lo", type=float, default=-10.0)
    p.add_argument("--hi", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--solver", choices=SOLVERS, default="hadof-sequential")
    p.add_argument("--out", type=Path, help="write the report JSON here")
    _add_hadof_flags(p)

    p = sub.add_parser("bench", help="run a JSON experiment spec")
    p.add_argument("spec", type=Path)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, help="override output_dir")
    p.add_argument("--reps", type=int, help="override repetitions")
    p.add_argument("--solvers", nargs="+", choices=SOLVERS)
    p.add_argument("--workers", type=int)
    p.add_argument("--policy", choices=POLICIES)
    p.add_argument("--concurrent-reps", action="store_true", help="run repetitions concurrently (accuracy-only sweeps)")
    p.add_argument("--no-wall-clock", action="store_true", help="write 0 for wall-clock columns (reproducible output)")

    p = sub.add_parser("assemble", help="assemble reads from FASTA into one contig")
    p.add_argument("fasta", type=Path)
    p.add_argument("--out", type=Path, required=True, help="assembled FASTA output")
    p.add_argument("--encoding", choices=("edge", "permutation"), default="edge")
    p.add_argument("--solver", choices=SOLVERS, default="hadof-parallel")
    p.add_argument("--min-overlap", type=int, default=3)
    p.add_argument("--transitive-reduction", action="store_true")
    p.add_argument("--penalty", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--graph-csv", type=Path)
    p.add_argument("--qubo-json", type=Path)
    _add_hadof_flags(p)

    p = sub.add_parser("gen", help="generate a random QUBO or synthetic reads")
    gen = p.add_subparsers(dest="kind", required=True)
    g = gen.add_parser("qubo")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--lo", type=float, default=-10.0)
    g.add_argument("--hi", type=float, default=10.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)
    g = gen.add_parser("reads")
    g.add_argument("--genome-length", type=int, default=600)
    g.add_argument("--read-length", type=int, default=100)
    g.add_argument("--stride", type=int, default=50)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--shuffle", action="store_true")
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--genome-out", type=Path)

    p = sub.add_parser("report", help="summarise a results CSV")
    p.add_argument("csv", type=Path)
    return parser


def _spec_for_solve(args, problem: dict) -> ExperimentSpec:
    return ExperimentSpec(
        problem=problem,
        solvers=[args.solver],
        seed=args.seed,
        hadof=_hadof_overrides(args),
        policy=args.policy,
        workers=args.workers,
    )


def cmd_solve(args) -> int:
    qubo = load_qubo(args.qubo) if args.qubo else random_qubo(args.n, args.lo, args.hi, args.seed)
    spec = _spec_for_solve(args, {"type": "qubo"})
    report = solve(args.solver, qubo, spec, args.seed)
    ref = reference_objective(qubo, SaConfig(seed=args.seed))
    stats = accuracy_stats(report, ref)
    print(f"{args.solver}: best={report.best_objective:.6g} reference={ref:.6g} "
          f"best_acc={stats['best_acc']:.4f} avg_acc={stats['avg_acc']:.4f} "
          f"wall={report.wall_clock_s:.3f}s qpu={report.modelled_qpu_s:g}s")
    if args.out:
        args.out.write_text(json.dumps({**report.to_dict(), "reference_objective": ref, **stats}) + "\n")
    return 0


def cmd_bench(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    spec = replace(
        spec,
        seed=args.seed,
        output_dir=str(args.out) if args.out else spec.output_dir,
        repetitions=args.reps or spec.repetitions,
        solvers=args.solvers or spec.solvers,
        workers=args.workers or spec.workers,
        policy=args.policy or spec.policy,
        concurrent_repetitions=args.concurrent_reps or spec.concurrent_repetitions,
        measure_wall_clock=spec.measure_wall_clock and not args.no_wall_clock,
    )
    paths = run_experiment(spec, progress=lambda msg: logging.info(msg))
    print(report_summary(paths["csv"]))
    print(f"results written to {paths['csv'].parent}")
    return 0


def cmd_assemble(args) -> int:
    reads = genome.read_fasta(args.fasta)
    if len(reads) == 1:
        args.out.write_text(genome.format_fasta([("contig", reads.sequences[0])]))
        return 0
    graph = genome.compute_overlaps(reads, args.min_overlap, args.transitive_reduction)
    if args.graph_csv:
        genome.write_edge_csv(graph, args.graph_csv)
    encode = genome.encode_edge_qubo if args.encoding == "edge" else genome.encode_permutation_qubo
    qubo, ctx = encode(graph, args.penalty)
    if args.qubo_json:
        save_qubo(qubo, args.qubo_json)
    spec = _spec_for_solve(args, {"type": "qubo"})
    report = solve(args.solver, qubo, spec, args.seed)
    path = genome.decode_path(report.best_assignment, ctx)
    oracle = genome.path_energy(ctx, args.penalty)
    print(f"{args.solver}: energy={report.best_objective:g} path-energy={oracle:g} "
          f"valid={path.valid} covers_all={path.covers_all} {path.diagnostic}".rstrip())
    if not path.valid:
        return EXIT_SOLVER
    contig = genome.merge_sequence(path, reads, graph)
    args.out.write_text(genome.format_fasta([(f"contig length={len(contig)} reads={len(path.order)}", contig)]))
    return 0


def cmd_gen(args) -> int:
    if args.kind == "qubo":
        save_qubo(random_qubo(args.n, args.lo, args.hi, args.seed), args.out)
        return 0
    seq = genome.random_genome(args.genome_length, args.seed)
    reads = genome.synthesize_reads(seq, args.read_length, args.stride, args.seed if args.shuffle else None)
    args.out.write_text(genome.format_fasta(reads.reads))
    if args.genome_out:
        args.genome_out.write_text(genome.format_fasta([("genome", seq)]))
    return 0


def cmd_report(args) -> int:
    table = report_summary(args.csv)
    if table:
        print(table)
    return 0


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "assemble": cmd_assemble, "gen": cmd_gen, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (SpecError, genome.FastaError, genome.CyclicGraphError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except Exception as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
