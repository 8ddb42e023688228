"""Optimal finite-size conversion of majorization-based resources.

The package covers entanglement, coherence and thermodynamics, where
single-shot conversions are decided by (thermo-)majorization.  It computes
the fidelity-optimal conversion of many copies exactly through type classes,
locates resource resonance (irreversibility parameter ``nu = 1``) and runs
the heat-engine, mixing and fixed-error rate sweeps.
"""

__version__ = "0.1.0"

from .atoms import AtomDist, from_probvec, iid_power, mixed_power, product
from .dist import (
    ProbVec,
    ResourceTheory,
    asymptotic_rate,
    entropy_variance,
    fidelity,
    gibbs_qubit,
    gibbs_state,
    infidelity,
    irreversibility_parameter,
    relative_entropy,
    relative_entropy_variance,
    shannon_entropy,
)
from .exceptions import (
    ConvergenceError,
    DegenerateTarget,
    DomainError,
    IterationLimit,
    NoFeasibleRate,
    OverflowGuard,
    ResonantError,
    SupportError,
)
from .experiments import (
    FixedError,
    FixedWork,
    HeatEngineSpec,
    heat_engine_sweep,
    lambda_sweep,
    rate_sweep,
)
from .grid import SweepGrid
from .majorization import (
    ConversionResult,
    LorenzCurve,
    lorenz_curve,
    majorizes,
    max_rate,
    optimal_final_state,
    optimality_gap,
    oracle_optimal_fidelity,
)
from .resonance import HeatEngineFamily, ResonanceQuery, contour_crossings, nu_grid, resonant_lambda

__all__ = [
    "AtomDist",
    "ConversionResult",
    "ConvergenceError",
    "DegenerateTarget",
    "DomainError",
    "FixedError",
    "FixedWork",
    "HeatEngineFamily",
    "HeatEngineSpec",
    "IterationLimit",
    "LorenzCurve",
    "NoFeasibleRate",
    "OverflowGuard",
    "ProbVec",
    "ResonanceQuery",
    "ResonantError",
    "ResourceTheory",
    "SupportError",
    "SweepGrid",
    "asymptotic_rate",
    "contour_crossings",
    "entropy_variance",
    "fidelity",
    "from_probvec",
    "gibbs_qubit",
    "gibbs_state",
    "heat_engine_sweep",
    "iid_power",
    "infidelity",
    "irreversibility_parameter",
    "lambda_sweep",
    "lorenz_curve",
    "majorizes",
    "max_rate",
    "mixed_power",
    "nu_grid",
    "optimal_final_state",
    "optimality_gap",
    "oracle_optimal_fidelity",
    "product",
    "rate_sweep",
    "relative_entropy",
    "relative_entropy_variance",
    "resonant_lambda",
    "shannon_entropy",
]
