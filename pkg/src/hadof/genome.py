"""Overlap-graph genome assembly as a QUBO.

Reads become nodes, exact suffix-prefix overlaps become weighted directed
edges, and a Hamiltonian path through the graph gives the read order.  Two
encodings are provided:

* edge form: one binary variable per edge, penalising every node whose
  selected out-degree or in-degree differs from one;
* permutation form: ``x[v, j] = 1`` when read v sits at position j, with
  one-hot rows and columns and a penalty on consecutive non-edges.
"""

from __future__ import annotations

import csv
import itertools
import re
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Sequence

import numpy as np

from .qubo import DimensionError, QuboProblem

_ALPHABET = re.compile(r"^[ACGT]+$")


class FastaError(ValueError):
    pass


class CyclicGraphError(ValueError):
    def __init__(self, cycle: Sequence[int]):
        super().__init__(f"overlap graph has a cycle: {' -> '.join(map(str, cycle))}")
        self.cycle = list(cycle)


@dataclass(frozen=True)
class ReadSet:
    reads: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        ids = [rid for rid, _ in self.reads]
        if len(set(ids)) != len(ids):
            raise FastaError("read ids must be unique")
        for rid, seq in self.reads:
            if not _ALPHABET.match(seq):
                raise FastaError(f"read {rid!r} must be a non-empty string over ACGT")

    def __len__(self) -> int:
        return len(self.reads)

    @property
    def ids(self) -> list[str]:
        return [rid for rid, _ in self.reads]

    @property
    def sequences(self) -> list[str]:
        return [seq for _, seq in self.reads]


@dataclass(frozen=True)
class OverlapGraph:
    n_nodes: int
    edges: tuple[tuple[int, int, int], ...]  # (tail, head, overlap length), sorted by (tail, head)
    min_overlap: int
    acyclic: bool

    @property
    def weights(self) -> dict[tuple[int, int], int]:
        return {(u, v): w for u, v, w in self.edges}

    def find_cycle(self) -> list[int] | None:
        sorter = TopologicalSorter({v: set() for v in range(self.n_nodes)})
        for u, v, _ in self.edges:
            sorter.add(v, u)
        try:
            tuple(sorter.static_order())
        except CycleError as exc:
            return list(exc.args[1])
        return None


@dataclass
class PathSolution:
    order: list[int]
    edges: list[tuple[int, int]]
    valid: bool
    diagnostic: str = ""
    covers_all: bool = False


@dataclass(frozen=True)
class EdgeEncoding:
    graph: OverlapGraph
    edge_order: tuple[tuple[int, int], ...]

    @property
    def n_vars(self) -> int:
        return len(self.edge_order)


@dataclass(frozen=True)
class PermutationEncoding:
    graph: OverlapGraph

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def n_vars(self) -> int:
        return self.n_nodes**2

    def index(self, v: int, step: int) -> int:
        return v * self.n_nodes + step


# -- reads ---------------------------------------------------------------------


def parse_fasta(text: str) -> ReadSet:
    reads: list[tuple[str, str]] = []
    rid, chunks = None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            if rid is not None:
                reads.append((rid, "".join(chunks)))
            rid = line[1:].split()[0] if line[1:].strip() else ""
            if not rid:
                raise FastaError(f"line {lineno}: empty FASTA header")
            chunks = []
        else:
            if rid is None:
                raise FastaError(f"line {lineno}: sequence data before the first header")
            seq = line.upper()
            bad = set(seq) - set("ACGT")
            if bad:
                raise FastaError(f"line {lineno}: illegal characters {''.join(sorted(bad))!r}")
            chunks.append(seq)
    if rid is not None:
        reads.append((rid, "".join(chunks)))
    return ReadSet(tuple(reads))


def read_fasta(path) -> ReadSet:
    return parse_fasta(Path(path).read_text())


def format_fasta(records: Sequence[tuple[str, str]], width: int = 70) -> str:
    lines = []
    for rid, seq in records:
        lines.append(f">{rid}")
        lines.extend(seq[i : i + width] for i in range(0, len(seq), width))
    return "\n".join(lines) + "\n"


def random_genome(length: int, seed: int | None = None) -> str:
    rng = np.random.default_rng(seed)
    return "".join(np.array(list("ACGT"))[rng.integers(0, 4, size=length)])


def synthesize_reads(genome: str, read_length: int, stride: int, seed: int | None = None) -> ReadSet:
    """Error-free sliding-window reads; consecutive reads overlap by ``read_length - stride``.

    With a ``seed`` the read order is shuffled (ids keep their genome position).
    """
    if not 1 <= read_length <= len(genome):
        raise ValueError(f"read_length must be in [1, {len(genome)}]")
    if not 1 <= stride <= read_length:
        raise ValueError("stride must be in [1, read_length]")
    starts = range(0, len(genome) - read_length + 1, stride)
    reads = [(f"read{i}", genome[s : s + read_length]) for i, s in enumerate(starts)]
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(reads))
        reads = [reads[i] for i in order]
    return ReadSet(tuple(reads))


# -- overlap graph -------------------------------------------------------------


def longest_overlap(a: str, b: str) -> int:
    """Longest proper suffix of ``a`` that is also a prefix of ``b``."""
    for w in range(min(len(a), len(b)) - 1, 0, -1):
        if a.endswith(b[:w]):
            return w
    return 0


def compute_overlaps(reads: ReadSet, min_overlap: int = 3, transitive_reduction: bool = False) -> OverlapGraph:
    if min_overlap < 1:
        raise ValueError("min_overlap must be >= 1")
    seqs = reads.sequences
    edges = []
    for u, v in itertools.permutations(range(len(seqs)), 2):
        w = longest_overlap(seqs[u], seqs[v])
        if w >= min_overlap:
            edges.append((u, v, w))
    edges.sort()
    graph = OverlapGraph(len(seqs), tuple(edges), min_overlap, acyclic=True)
    acyclic = graph.find_cycle() is None
    graph = OverlapGraph(len(seqs), tuple(edges), min_overlap, acyclic)
    if transitive_reduction:
        graph = reduce_transitive(graph)
    return graph


def reduce_transitive(graph: OverlapGraph) -> OverlapGraph:
    """Drop (u, v) whenever v is reachable from u through another successor."""
    cycle = graph.find_cycle()
    if cycle is not None:
        raise CyclicGraphError(cycle)
    succ: dict[int, set[int]] = {v: set() for v in range(graph.n_nodes)}
    for u, v, _ in graph.edges:
        succ[u].add(v)
    reach: dict[int, set[int]] = {}

    def reachable(u: int) -> set[int]:
        if u not in reach:
            out: set[int] = set()
            for v in succ[u]:
                out |= {v} | reachable(v)
            reach[u] = out
        return reach[u]

    kept = tuple(
        (u, v, w) for u, v, w in graph.edges if not any(v in reachable(x) for x in succ[u] if x != v)
    )
    return OverlapGraph(graph.n_nodes, kept, graph.min_overlap, True)


def write_edge_csv(graph: OverlapGraph, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tail", "head", "weight"])
        writer.writerows(graph.edges)


# -- encodings -----------------------------------------------------------------


def encode_edge_qubo(graph: OverlapGraph, A: float = 1.0) -> tuple[QuboProblem, EdgeEncoding]:
    """QUBO over one variable per edge: A * sum_u (1 - out(u))^2 + A * sum_v (1 - in(v))^2.

    Expanding each square with x^2 = x gives, per node, a constant A, a
    linear -A on each incident edge and +2A on each pair of incident edges.
    """
    if A <= 0:
        raise ValueError("penalty A must be positive")
    cycle = graph.find_cycle()
    if cycle is not None:
        raise CyclicGraphError(cycle)
    order = tuple((u, v) for u, v, _ in graph.edges)
    if not order:
        raise ValueError("overlap graph has no edges to encode")
    index = {e: i for i, e in enumerate(order)}
    outgoing: dict[int, list[int]] = {v: [] for v in range(graph.n_nodes)}
    incoming: dict[int, list[int]] = {v: [] for v in range(graph.n_nodes)}
    for (u, v), i in index.items():
        outgoing[u].append(i)
        incoming[v].append(i)

    terms = []
    for group in itertools.chain(outgoing.values(), incoming.values()):
        terms.extend((i, i, -A) for i in group)
        terms.extend((i, j, 2 * A) for i, j in itertools.combinations(group, 2))
    qubo = QuboProblem.from_terms(len(order), terms, offset=2 * graph.n_nodes * A)
    return qubo, EdgeEncoding(graph, order)


def encode_permutation_qubo(graph: OverlapGraph, A: float = 1.0) -> tuple[QuboProblem, PermutationEncoding]:
    """QUBO over N^2 position variables with one-hot rows/columns and non-edge transition penalties."""
    if A <= 0:
        raise ValueError("penalty A must be positive")
    enc = PermutationEncoding(graph)
    N = graph.n_nodes
    terms = []
    lines = [[enc.index(v, j) for j in range(N)] for v in range(N)]
    lines += [[enc.index(v, j) for v in range(N)] for j in range(N)]
    for line in lines:
        terms.extend((i, i, -A) for i in line)
        terms.extend((i, j, 2 * A) for i, j in itertools.combinations(line, 2))
    edges = {(u, v) for u, v, _ in graph.edges}
    for u, v in itertools.permutations(range(N), 2):
        if (u, v) not in edges:
            terms.extend((enc.index(u, j), enc.index(v, j + 1), A) for j in range(N - 1))
    return QuboProblem.from_terms(N * N, terms, offset=2 * N * A), enc


def path_energy(encoding: EdgeEncoding | PermutationEncoding, A: float = 1.0) -> float:
    """Energy of any valid Hamiltonian path under the chosen encoding."""
    return 2 * A if isinstance(encoding, EdgeEncoding) else 0.0


# -- decoding ------------------------------------------------------------------


def decode_path(solution, context: EdgeEncoding | PermutationEncoding) -> PathSolution:
    bits = np.asarray(solution).astype(int)
    if bits.shape != (context.n_vars,):
        raise DimensionError(f"solution length {bits.size} != {context.n_vars}")
    if isinstance(context, EdgeEncoding):
        return _decode_edges(bits, context)
    return _decode_permutation(bits, context)


def _decode_edges(bits: np.ndarray, enc: EdgeEncoding) -> PathSolution:
    chosen = [e for e, b in zip(enc.edge_order, bits) if b]
    if not chosen:
        return PathSolution([], [], False, "no edges selected")
    nxt: dict[int, int] = {}
    prev: dict[int, int] = {}
    for u, v in chosen:
        if u in nxt:
            return PathSolution([], chosen, False, f"node {u} has out-degree 2")
        if v in prev:
            return PathSolution([], chosen, False, f"node {v} has in-degree 2")
        nxt[u], prev[v] = v, u
    heads = [u for u in nxt if u not in prev]
    if len(heads) != 1:
        return PathSolution([], chosen, False, f"selection forms {len(heads)} chains")
    order = [heads[0]]
    while order[-1] in nxt:
        order.append(nxt[order[-1]])
    if len(order) != len(chosen) + 1:
        return PathSolution([], chosen, False, "selection is not a single chain")
    return PathSolution(order, chosen, True, covers_all=len(order) == enc.graph.n_nodes)


def _decode_permutation(bits: np.ndarray, enc: PermutationEncoding) -> PathSolution:
    N = enc.n_nodes
    grid = bits.reshape(N, N)
    for v in range(N):
        if grid[v].sum() != 1:
            return PathSolution([], [], False, f"node {v} occupies {grid[v].sum()} positions")
    for j in range(N):
        if grid[:, j].sum() != 1:
            return PathSolution([], [], False, f"position {j} holds {grid[:, j].sum()} nodes")
    order = [int(np.argmax(grid[:, j])) for j in range(N)]
    edges = set(enc.graph.weights)
    steps = list(zip(order, order[1:]))
    for u, v in steps:
        if (u, v) not in edges:
            return PathSolution(order, [], False, f"no edge {u} -> {v}")
    return PathSolution(order, steps, True, covers_all=True)


def merge_sequence(path: PathSolution, reads: ReadSet, graph: OverlapGraph) -> str:
    """Concatenate reads along the path, dropping each overlap prefix."""
    if not path.valid or not path.order:
        raise ValueError(f"cannot merge an invalid path ({path.diagnostic or 'empty'})")
    seqs, weights = reads.sequences, graph.weights
    out = [seqs[path.order[0]]]
    for u, v in zip(path.order, path.order[1:]):
        out.append(seqs[v][weights[(u, v)] :])
    return "".join(out)


def single_read_path(node: int) -> PathSolution:
    return PathSolution([node], [], True, covers_all=True)
