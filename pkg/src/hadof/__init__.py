"""Decomposed QAOA for large QUBO problems.

A global QUBO is split into fixed-size sub-problems whose outside variables
are clamped to their current expected values; each sub-problem is solved
with an annealing-schedule QAOA circuit on an exact statevector simulator,
sequentially or as parallel batches.
"""

from .baselines import SaConfig, reference_objective, simulated_annealing
from .engine import (
    HadofConfig,
    Partition,
    SolveReport,
    SubProblem,
    accuracy,
    accuracy_stats,
    build_subproblem,
    build_subproblems,
    full_qaoa_solve,
    hadof_solve,
    make_partition,
)
from .qubo import (
    CapacityError,
    DimensionError,
    IsingModel,
    QuboProblem,
    brute_force,
    evaluate,
    evaluate_many,
    ising_energy,
    load_qubo,
    random_qubo,
    save_qubo,
    to_ising,
)
from .scheduler import BackendSpec, CircuitJob, LocalExecutor, TimingLedger, execute_batch, qpu_usage_model
from .simulator import (
    AnnealSchedule,
    SampleSet,
    Statevector,
    apply_cost_layer,
    apply_mixer_layer,
    plus_state,
    qubit_expectations,
    run_circuit,
    sample_bitstrings,
    sample_expectations,
)

__version__ = "0.1.0"
