"""Many-server N-system queue under FCFS-ALIS.

Fluid and diffusion approximations, exact stationary tables, a
truncated-chain oracle for tiny instances, a discrete-event simulator,
and the FCFS matching chain, all backed by the C++ core.
"""

from ._core import (
    CltParams,
    CtmcResult,
    DerivedRatios,
    ErrorBand,
    FluidSolution,
    ImprovedTheta,
    MatchRunResult,
    Moments,
    ShapeSpec,
    SimConfig,
    SimStats,
    StabilityReport,
    SystemParams,
    clt_params,
    ctmc_solve,
    derive,
    exact_log_prob,
    exact_moments,
    fluid_solve,
    improved_theta,
    k_geometric,
    match_run,
    p_i1_zero_closed_form,
    params_from_json,
    params_to_json,
    pooling,
    scale,
    simulate,
    stability,
)

__all__ = [
    "CltParams",
    "CtmcResult",
    "DerivedRatios",
    "ErrorBand",
    "FluidSolution",
    "ImprovedTheta",
    "MatchRunResult",
    "Moments",
    "ShapeSpec",
    "SimConfig",
    "SimStats",
    "StabilityReport",
    "SystemParams",
    "clt_params",
    "ctmc_solve",
    "derive",
    "exact_log_prob",
    "exact_moments",
    "fluid_solve",
    "improved_theta",
    "k_geometric",
    "match_run",
    "p_i1_zero_closed_form",
    "params_from_json",
    "params_to_json",
    "pooling",
    "scale",
    "simulate",
    "stability",
]
