"""fracrd: solver and verification lab for two-component nonlinear
time-fractional diffusion systems with Neumann boundary conditions."""

from .blowup import BlowupConfig, BlowupReport, certify_blowup, lower_solution, t_star
from .evolution import KernelConfig, apply_K, apply_S, verify_norm_estimates
from .frac_ops import (
    Signal,
    TimeGrid,
    adjoint_caputo,
    caputo_derivative,
    rl_integral,
    solve_fractional_ivp,
)
from .linear_solver import (
    LinearProblem,
    SolutionHistory,
    check_nonnegativity,
    solve_mild,
    solve_with_coefficient,
)
from .mittag_leffler import MlParams, ml, ml_kernel_pair
from .spectral import (
    DomainSpec,
    Field,
    ModeBasis,
    apply_frac_power,
    build_basis,
    field_from_coeffs,
    field_from_grid,
    interval,
    rectangle,
    to_coeffs,
    to_grid,
)
from .system_solver import (
    NonlinearSystem,
    SystemSolution,
    TruncationCutoff,
    check_apriori_bounds,
    check_mass_identity,
    preset_system,
    solve_system,
    truncation_independence,
    validate_system,
    weak_residual,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupConfig", "BlowupReport", "certify_blowup", "lower_solution", "t_star",
    "KernelConfig", "apply_K", "apply_S", "verify_norm_estimates",
    "Signal", "TimeGrid", "adjoint_caputo", "caputo_derivative", "rl_integral",
    "solve_fractional_ivp",
    "LinearProblem", "SolutionHistory", "check_nonnegativity", "solve_mild",
    "solve_with_coefficient",
    "MlParams", "ml", "ml_kernel_pair",
    "DomainSpec", "Field", "ModeBasis", "apply_frac_power", "build_basis",
    "field_from_coeffs", "field_from_grid", "interval", "rectangle", "to_coeffs", "to_grid",
    "NonlinearSystem", "SystemSolution", "TruncationCutoff", "check_apriori_bounds",
    "check_mass_identity", "preset_system", "solve_system", "truncation_independence",
    "validate_system", "weak_residual",
]
