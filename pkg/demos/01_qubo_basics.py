"""QUBO objects, the Ising form, and exhaustive search on a tiny instance."""

# %%
import numpy as np

from hadof import QuboProblem, brute_force, evaluate, random_qubo, to_ising
from hadof.qubo import ising_energy, spins_from_bits

# A two-variable problem that rewards setting exactly one bit.
q = QuboProblem.from_terms(2, {(0, 0): -1, (1, 1): -1, (0, 1): 3})
for x in ([0, 0], [1, 0], [0, 1], [1, 1]):
    print(x, evaluate(q, x))

# %%
# Bit 0 maps to spin +1 and bit 1 to spin -1.  The offset is kept, so
# energies match the QUBO objective exactly.
m = to_ising(q)
print("h =", m.h, "J =", m.J, "offset =", m.offset)
print("Ising energy of [1, 0]:", ising_energy(m, spins_from_bits([1, 0])))

# %%
# Ties go to the assignment with the smallest integer value (bit 0 is the low bit).
x, value = brute_force(q)
print("minimiser", x, "value", value)

# %%
# Random benchmark instances fill the upper triangle uniformly.
big = random_qubo(12, lo=-10, hi=10, seed=0)
x, value = brute_force(big)
print(f"n=12 optimum {value:.3f} with {x.sum()} bits set")
print("coefficient range:", min(big.coeffs.values()), max(big.coeffs.values()))
