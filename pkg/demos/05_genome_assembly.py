"""From sequencing reads to an assembled contig through a QUBO."""

# %%
from hadof import HadofConfig, accuracy, brute_force, hadof_solve
from hadof import genome

reference = genome.random_genome(600, seed=1)
reads = genome.synthesize_reads(reference, read_length=100, stride=50, seed=1)
print(len(reads), "reads, first ids:", reads.ids[:4])

# %%
# Exact suffix-prefix overlaps become weighted edges.  A high threshold keeps
# chance matches between unrelated reads out of the graph.
graph = genome.compute_overlaps(reads, min_overlap=20)
print(len(graph.edges), "edges, acyclic:", graph.acyclic)

# %%
# Edge encoding: one variable per edge; any Hamiltonian path scores 2A.
qubo, enc = genome.encode_edge_qubo(graph, A=1.0)
x, energy = brute_force(qubo)
print("ground energy", energy, "path energy", genome.path_energy(enc))

path = genome.decode_path(x, enc)
contig = genome.merge_sequence(path, reads, graph)
print("valid:", path.valid, "covers all:", path.covers_all, "exact:", contig == reference)

# %%
report = hadof_solve(qubo, HadofConfig(mode="parallel", seed=1))
print("decomposed solver accuracy vs path energy:", accuracy(report.best_objective, genome.path_energy(enc)))

# %%
# The permutation encoding needs N^2 variables, so it only suits tiny graphs.
small = genome.compute_overlaps(genome.parse_fasta(">a\nACGTT\n>b\nGTTCA\n>c\nTCAGG\n"), min_overlap=2)
pq, penc = genome.encode_permutation_qubo(small)
px, pe = brute_force(pq)
print("permutation form:", pq.n, "variables, order", genome.decode_path(px, penc).order, "energy", pe)
