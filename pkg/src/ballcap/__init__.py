"""Energies, capacities, equilibrium measures, dual certificates and
approach-region maximal statistics for unitarily invariant kernels on the
complex unit ball.
"""

from .backend import BACKEND, USE_NUMBA
from .capacity import (
    CapacityEstimate,
    DualResult,
    EquilibriumResult,
    GramianProblem,
    build_unboundedness_function,
    capacity_sweep,
    polynomial_zero_set_capacity,
    solve_dual,
    solve_equilibrium,
)
from .energy import (
    EnergyReport,
    MonomialPolynomial,
    dyadic_radii,
    energy_limit,
    energy_r,
    energy_series,
    functional_identity_check,
    potential,
    potential_norm_sq,
)
from .kernels import (
    BallPoint,
    CoefficientSequence,
    KernelSpec,
    bounded,
    custom_kernel,
    dirichlet_log,
    drury_arveson,
    eval_gramian,
    eval_kernel,
    hardy_poisson,
    make_kernel,
    weighted_dirichlet,
)
from .maximal import (
    KoranyiRegion,
    comparability_ratio,
    koranyi_distance,
    maximal_sample,
    region_contains,
    triangle_residual,
    weak_type_experiment,
)
from .measures import (
    DiscreteMeasure,
    SetDescription,
    arc,
    arc_of_length,
    finite_points,
    flat_circle,
    moments,
    product_lift,
    product_measure,
    pushforward,
    tangential_circle,
)
from .scenarios import SCENARIOS, run_all, run_scenario

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "USE_NUMBA",
    "BallPoint",
    "CapacityEstimate",
    "CoefficientSequence",
    "DiscreteMeasure",
    "DualResult",
    "EnergyReport",
    "EquilibriumResult",
    "GramianProblem",
    "KernelSpec",
    "KoranyiRegion",
    "MonomialPolynomial",
    "SCENARIOS",
    "SetDescription",
    "arc",
    "arc_of_length",
    "bounded",
    "build_unboundedness_function",
    "capacity_sweep",
    "comparability_ratio",
    "custom_kernel",
    "dirichlet_log",
    "drury_arveson",
    "dyadic_radii",
    "energy_limit",
    "energy_r",
    "energy_series",
    "eval_gramian",
    "eval_kernel",
    "finite_points",
    "flat_circle",
    "functional_identity_check",
    "hardy_poisson",
    "koranyi_distance",
    "make_kernel",
    "maximal_sample",
    "moments",
    "polynomial_zero_set_capacity",
    "potential",
    "potential_norm_sq",
    "product_lift",
    "product_measure",
    "pushforward",
    "region_contains",
    "run_all",
    "run_scenario",
    "solve_dual",
    "solve_equilibrium",
    "tangential_circle",
    "triangle_residual",
    "weak_type_experiment",
    "weighted_dirichlet",
]
