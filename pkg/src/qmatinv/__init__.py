"""Simulated amplitude-amplification solver for integer linear systems on a grid."""

from .analysis import (
    classical_cost,
    crossover,
    lemma1_check,
    lemma2_check,
    monte_carlo_success,
    quantum_cost,
    success_lower_bound,
)
from .classical import classical_solve
from .core import (
    GridPoint,
    LinearSystem,
    Mode,
    brute_force_solutions,
    check_complete_intersection,
    generate_instance,
    residual,
)
from .pipeline import RegisterLedger, compute_row, prepare_initial, uncompute_garbage
from .search import SearchStats, StagePolicy, bbht_search, dimred_solve, grover_known_t, iterations_known_t, naive_solve
from .statevector import (
    Predicate,
    SearchState,
    init_uniform,
    measure_flag,
    oracle_phase_flip,
    reflect_about,
    sample_point,
    success_probability,
)

__version__ = "0.1.0"
