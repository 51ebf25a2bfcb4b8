"""Inertial dynamics with Hessian-driven damping and time scaling on
Moreau envelopes of nonsmooth convex objectives."""

from .analysis import (
    ConditionReport,
    RateFit,
    Setting,
    accumulate_decay_integrals,
    check_conditions_grid,
    check_conditions_polynomial,
    energy,
    energy_monotonicity_report,
    fit_rate,
)
from .dynamics import (
    DivergenceError,
    StiffnessError,
    State,
    SystemConfig,
    Trajectory,
    initial_lift,
    integrate,
    ode_residual,
    rhs_beta_positive,
    rhs_beta_zero,
    velocity_reconstruct,
)
from .objectives import (
    Kind,
    MoreauEval,
    ProxFunction,
    ProxSearchError,
    brute_force_prox,
    diag_quadratic,
    elastic_abs,
    l1,
    moreau,
    numeric_separable,
    prox,
    prox_comparison_residual,
    value,
)
from .schedules import PolynomialSchedule, ScheduleEval, default_b0

__version__ = "0.1.0"

__all__ = [
    "ConditionReport", "RateFit", "Setting", "accumulate_decay_integrals",
    "check_conditions_grid", "check_conditions_polynomial", "energy",
    "energy_monotonicity_report", "fit_rate",
    "DivergenceError", "StiffnessError", "State", "SystemConfig", "Trajectory",
    "initial_lift", "integrate", "ode_residual", "rhs_beta_positive",
    "rhs_beta_zero", "velocity_reconstruct",
    "Kind", "MoreauEval", "ProxFunction", "ProxSearchError", "brute_force_prox",
    "diag_quadratic", "elastic_abs", "l1", "moreau", "numeric_separable",
    "prox", "prox_comparison_residual", "value",
    "PolynomialSchedule", "ScheduleEval", "default_b0",
]
