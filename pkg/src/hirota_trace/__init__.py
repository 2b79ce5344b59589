"""Exact N-envelope-soliton solutions of the Hirota equation by the trace
method, with analytic-derivative residual verification, series/closed-form
equivalence checks, exact combinatorial identities, and limit reductions."""

from .calculus import (
    DerivativeBundle,
    Stencil,
    analytic_derivatives,
    analytic_derivatives_grid,
    fd_derivatives,
)
from .core import (
    COND_LIMIT,
    DENOM_TOL,
    DispersionPoly,
    GridSpec,
    Medium,
    Soliton,
    SolitonSet,
    SpaceTimePoint,
    build_B,
    build_Bx,
    build_D,
    dispersion,
    eval_psi_closed,
    eval_psi_series,
    general_dispersion,
    one_soliton_closed,
    one_soliton_envelope_shift,
    phi,
    series_partial_sums,
    spectral_radius_q,
)
from .errors import (
    ConfigError,
    DegeneratePointError,
    EmptyReportError,
    FieldOverflowError,
    ResonanceError,
    SingularDenominatorError,
    SolitonFieldError,
    UnseparatedEnvelopesError,
)
from .identities import (
    GaussianRational,
    IdentityReport,
    identity_cubic,
    identity_quadratic,
    psi3_crosscheck,
    recursion_residual,
    run_identity_suite,
)
from .trace_engine import CompiledSolution, compiled
from .verify import (
    CollisionMetrics,
    EquationKind,
    ResidualReport,
    additivity_instance,
    collision_metrics,
    group_velocity,
    pi_ratio,
    random_admissible_set,
    residual_at,
    residual_report,
    scaling_invariance_check,
)

__version__ = "0.1.0"

__all__ = [
    "COND_LIMIT",
    "DENOM_TOL",
    "CollisionMetrics",
    "CompiledSolution",
    "ConfigError",
    "DegeneratePointError",
    "DerivativeBundle",
    "DispersionPoly",
    "EmptyReportError",
    "EquationKind",
    "FieldOverflowError",
    "GaussianRational",
    "GridSpec",
    "IdentityReport",
    "Medium",
    "ResidualReport",
    "ResonanceError",
    "SingularDenominatorError",
    "Soliton",
    "SolitonFieldError",
    "SolitonSet",
    "SpaceTimePoint",
    "Stencil",
    "UnseparatedEnvelopesError",
    "additivity_instance",
    "analytic_derivatives",
    "analytic_derivatives_grid",
    "build_B",
    "build_Bx",
    "build_D",
    "collision_metrics",
    "compiled",
    "dispersion",
    "eval_psi_closed",
    "eval_psi_series",
    "fd_derivatives",
    "general_dispersion",
    "group_velocity",
    "identity_cubic",
    "identity_quadratic",
    "one_soliton_closed",
    "one_soliton_envelope_shift",
    "phi",
    "pi_ratio",
    "psi3_crosscheck",
    "random_admissible_set",
    "recursion_residual",
    "residual_at",
    "residual_report",
    "run_identity_suite",
    "scaling_invariance_check",
    "series_partial_sums",
    "spectral_radius_q",
]
