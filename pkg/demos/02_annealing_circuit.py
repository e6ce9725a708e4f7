"""One annealing-schedule QAOA circuit on the statevector simulator."""

# %%
import numpy as np

from hadof import AnnealSchedule, QuboProblem, plus_state, qubit_expectations, run_circuit, sample_bitstrings, to_ising

schedule = AnnealSchedule.linear(5)
print("betas ", schedule.betas)
print("gammas", schedule.gammas)

# %%
# Three variables: the optimum is x = [1, 0, 1].
q = QuboProblem.from_terms(3, {(0, 0): -2, (1, 1): 1, (2, 2): -2, (0, 1): 1, (1, 2): 1, (0, 2): 1})
model = to_ising(q).normalized()

for depth in range(1, schedule.p + 1):
    state = run_circuit(model, schedule, depth)
    print(f"depth {depth}: P(x_i = 1) =", np.round(qubit_expectations(state), 3))

# %%
# Shots come back in draw order; keys print qubit 0 as the rightmost character.
samples = sample_bitstrings(state, 1000, np.random.default_rng(0))
print(sorted(samples.counts.items(), key=lambda kv: -kv[1])[:4])

# %%
print("plus state expectations:", qubit_expectations(plus_state(3)))
