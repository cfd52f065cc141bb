"""Laurent-series analysis of quasi-homogeneous polynomial ODE systems.

Pipeline: weights -> balances -> Kowalevski spectrum -> Laurent recursion ->
majorant bound -> first-integral checks -> numerical cross-checks.
"""

__version__ = "0.1.0"

from .balance import Balance, BalanceConfig, balance_equations, balance_residual, solve_balances
from .errors import *  # noqa: F401,F403
from .integrability import (
    DivisorConstraints,
    compare_embedding,
    divisor_constraints,
    embedding_point,
    integral_constancy,
    kowalewski_embedding_functions,
    parameter_census,
    verify_kowalewski_divisor,
)
from .kowalevski import KowalevskiData, Resonance, kowalevski_matrix, resonance_report
from .laurent import (
    LaurentSolution,
    ZSeries,
    compose_series,
    expand,
    recursion_rhs,
    recursion_step,
    series_residual,
)
from .majorant import (
    MajorantBound,
    domination_margin,
    majorant,
    majorant_coeffs,
    majorant_constants,
    radius_lower_bound,
)
from .numeric import (
    ComplexPath,
    TrajectorySample,
    euler_closed_form_check,
    integrate,
    jacobi_elliptic,
    series_vs_integration,
)
from .poly import ParamPoly, PhasePoly, RationalFn, poly_diff, poly_eval
from .system import (
    SystemSpec,
    hamiltonian_to_field,
    load_system,
    parse_system,
    poisson_audit,
    reduce_nth_order,
)
from .weights import WeightVector, check_invariance, delta_determinant, detect_weights
