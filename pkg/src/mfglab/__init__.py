"""Numerical laboratory for first-order mean field games on the circle."""

from .characteristics import (
    DriftField,
    FlowMap,
    drift_field,
    flow_lipschitz_constant,
    forward_flow,
    inverse_flow,
)
from .coupling import CouplingFunctional, evaluate, monotonicity_defect
from .errors import (
    AmbiguousClassificationError,
    ConfigError,
    DegenerateBacktrackError,
    MassDriftError,
    MFGLabError,
    MomentumCutoffError,
    NotConvergedError,
    NotPeriodicRegimeError,
    VelocityCutoffError,
)
from .explicit_solution import ExplicitInstance, hjb_residual, transport_residual
from .hamiltonians import (
    Mechanical,
    PhasePoint,
    Potential,
    QuadraticDrift,
    TabulatedConvex,
    hamilton_flow,
    lagrangian,
)
from .lax_oleinik import (
    ValueField,
    alpha_function,
    critical_value,
    evolve,
    hopf_lax_step,
    minimal_action,
    weak_kam_solution,
)
from .measures import (
    CircleMeasure,
    TestFunctionBank,
    continuity_residual,
    invariant_density,
    pushforward,
    wasserstein1,
)
from .mfg import (
    MFGSolution,
    PeriodicSolution,
    lipschitz_c_experiment,
    long_time_convergence_experiment,
    periodic_solution,
    solve_finite_horizon,
)

__all__ = [
    "AmbiguousClassificationError",
    "CircleMeasure",
    "ConfigError",
    "CouplingFunctional",
    "DegenerateBacktrackError",
    "DriftField",
    "ExplicitInstance",
    "FlowMap",
    "MassDriftError",
    "Mechanical",
    "MFGLabError",
    "MFGSolution",
    "MomentumCutoffError",
    "NotConvergedError",
    "NotPeriodicRegimeError",
    "PeriodicSolution",
    "PhasePoint",
    "Potential",
    "QuadraticDrift",
    "TabulatedConvex",
    "TestFunctionBank",
    "ValueField",
    "VelocityCutoffError",
    "alpha_function",
    "continuity_residual",
    "critical_value",
    "drift_field",
    "evaluate",
    "evolve",
    "flow_lipschitz_constant",
    "forward_flow",
    "hamilton_flow",
    "hjb_residual",
    "hopf_lax_step",
    "invariant_density",
    "inverse_flow",
    "lagrangian",
    "lipschitz_c_experiment",
    "long_time_convergence_experiment",
    "minimal_action",
    "monotonicity_defect",
    "periodic_solution",
    "pushforward",
    "solve_finite_horizon",
    "transport_residual",
    "wasserstein1",
    "weak_kam_solution",
]
