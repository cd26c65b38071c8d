"""Simulator and schedule optimizer for structured (nested) adiabatic search.

Splits an n-qubit database into independently searched blocks, provides the
corresponding interpolating Hamiltonians and their spectral gaps, computes
bound-saturating running times for arbitrary splittings, and verifies the
adiabatic success estimate by direct integration at small n.
"""

from .core import (
    LinearSchedule,
    MarkedState,
    Precision,
    Schedule,
    Splitting,
    TabulatedSchedule,
    equal_splitting,
    linear_schedule,
    make_splitting,
    problem_from_dict,
    problem_to_dict,
    tabulated_schedule,
)
from .dynamics import (
    DegenerateLevelWarning,
    EvolutionReport,
    NormDriftError,
    adiabaticity_lhs,
    degenerate_adiabaticity_lhs,
    evolve,
    instantaneous_ground_overlap,
    rk4_propagate,
)
from .hamiltonian import (
    DENSE_CAP,
    MatrixFreeHamiltonian,
    PauliTermSum,
    build_final,
    build_initial,
    build_overlapping,
    combine,
    final_diagonal,
    locality_weight,
    pauli_expansion,
)
from .runtime import (
    QuadratureError,
    RunTimeResult,
    TimeSchedule,
    closed_form_eps_t,
    max_structured_time,
    optimal_schedule,
    reproduce_table,
    running_time_integral,
    scaling_coefficients,
    table_to_csv,
    table_to_json,
)
from .spectral import (
    GapProfile,
    gap_profile,
    max_structured_degeneracy,
    max_structured_eigenvalue,
    max_structured_matrix_element,
    subsystem_gap,
)

__version__ = "0.1.0"
