"""Monotone finite-difference schemes for nonlocal degenerate diffusion.

The package discretizes equations of the form du/dt = L[phi(u)], where L is
the generator of a symmetric pure-jump process and phi is a merely continuous
nondecreasing nonlinearity. The small jumps are truncated, the remaining
measure is bound to grid offsets, and the resulting finite difference scheme
is stepped explicitly under a monotonicity restriction. Alongside the solver
the package carries the quadratic forms, companion nonlinearities, and
comparison functionals needed to check the scheme's structural estimates
numerically: mass conservation, energy dissipation with an explicit error
enclosure, Lp decay against companion energies, slope-product inequalities,
ordering of increments, and Cauchy-style refinement studies.
"""

from .bump import (
    bump_derivative_weighted_nodes,
    bump_weighted_nodes,
    discrete_bump_kernel,
    smoothstep_down,
    standard_bump,
)
from .cli import ConfigError, ExperimentConfig, load_experiment, main
from .energy import (
    EnergyValue,
    PathFunction,
    bilinear,
    density_approximation,
    energy_value,
    parabolic_bilinear,
    parabolic_seminorm,
    shrink_clamp,
    sobolev_seminorm_direct,
    sobolev_seminorm_fourier,
    spatial_cutoff,
    time_tail,
)
from .grid import Grid, GridFunction, lp_norm, mass, shift
from .measures import (
    AssumptionError,
    AtomMeasure,
    KernelField,
    LevyMeasureSpec,
    annulus_mass,
    comparability_bounds,
    moments,
    normalization_multiplier,
    second_moment_within,
    shift_bound_ratio,
    sphere_area,
    truncate_and_atomize,
)
from .nonlinearity import (
    HoelderCertificate,
    LpCompanion,
    NonlinearitySpec,
    PowerEntropy,
    hoelder_certificate,
    lipschitz_bound,
    lp_companion,
    stroock_varopoulos_gap,
)
from .operators import (
    CompensatedOperator,
    OperatorReport,
    TruncatedOperator,
    apply_compensated,
    apply_truncated,
    fourier_fractional,
    grid_frequencies,
    operator_report,
)
from .solver import (
    ConvergenceReport,
    DiagnosticsReport,
    EnergyBudgetReport,
    LpBudgetReport,
    OleinikReport,
    SolverConfig,
    Trajectory,
    cfl_dt,
    convergence_study,
    energy_budget,
    energy_budget_pair,
    lp_budget,
    oleinik_report,
    read_frames_binary,
    run,
    step,
    write_diagnostics_csv,
    write_frames_binary,
    write_summary_json,
)

__all__ = [
    "AssumptionError",
    "AtomMeasure",
    "CompensatedOperator",
    "ConfigError",
    "ConvergenceReport",
    "DiagnosticsReport",
    "EnergyBudgetReport",
    "EnergyValue",
    "ExperimentConfig",
    "Grid",
    "GridFunction",
    "HoelderCertificate",
    "KernelField",
    "LevyMeasureSpec",
    "LpBudgetReport",
    "LpCompanion",
    "NonlinearitySpec",
    "OleinikReport",
    "OperatorReport",
    "PathFunction",
    "PowerEntropy",
    "SolverConfig",
    "Trajectory",
    "TruncatedOperator",
    "annulus_mass",
    "apply_compensated",
    "apply_truncated",
    "bilinear",
    "bump_derivative_weighted_nodes",
    "bump_weighted_nodes",
    "cfl_dt",
    "comparability_bounds",
    "convergence_study",
    "density_approximation",
    "discrete_bump_kernel",
    "energy_budget",
    "energy_budget_pair",
    "energy_value",
    "fourier_fractional",
    "grid_frequencies",
    "hoelder_certificate",
    "lipschitz_bound",
    "load_experiment",
    "lp_budget",
    "lp_companion",
    "lp_norm",
    "main",
    "mass",
    "moments",
    "normalization_multiplier",
    "oleinik_report",
    "operator_report",
    "parabolic_bilinear",
    "parabolic_seminorm",
    "read_frames_binary",
    "run",
    "second_moment_within",
    "shift",
    "shift_bound_ratio",
    "shrink_clamp",
    "smoothstep_down",
    "sobolev_seminorm_direct",
    "sobolev_seminorm_fourier",
    "spatial_cutoff",
    "sphere_area",
    "standard_bump",
    "step",
    "stroock_varopoulos_gap",
    "time_tail",
    "truncate_and_atomize",
    "write_diagnostics_csv",
    "write_frames_binary",
    "write_summary_json",
]
