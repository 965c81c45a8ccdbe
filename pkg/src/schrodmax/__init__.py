"""Numerical laboratory for a dissipative Schrodinger evolution.

The package evaluates the semigroup with complex time on band-limited
data, sweeps maximal-function ratios across frequency scales, and runs
the arithmetic lower-bound experiment that exhibits the sharp Sobolev
threshold for pointwise convergence.
"""

__version__ = "0.1.0"

from .profiles import (
    AnnulusBump,
    Bump1D,
    Case1Product,
    Case3Counterexample,
    CounterexampleParams,
    ModelParams,
    Modulated,
    PlaneWaveSurrogate,
    RadialBump,
    SpectrumDescriptor,
    bump_eval,
    l2_norm,
    radial_bump_eval,
    sobolev_norm,
    spectrum_eval,
)
from .propagator import (
    FactorizedEvaluation,
    SpaceTimePoint,
    TorusCoefficient,
    abel_main_plus_error,
    dissipative_tail_bound,
    evaluate_free,
    evaluate_p_gamma,
    factorized_evaluate,
    torus_coefficient,
)
from .maximal import (
    ScalingReport,
    SpaceGrid,
    TimeGrid,
    exponent_sweep,
    l2_ball_norm,
    lemma1_bound,
    maximal_ratio,
    sup_over_time,
    theoretical_exponent,
)
from .numbertheory import (
    CubeFamily,
    GaussSumParams,
    PreconditionError,
    WeylPhase,
    abel_sum_identity,
    dirichlet_simultaneous,
    gauss_modulus_law,
    gauss_sum,
    totient,
    vitali_scaled_union,
    weyl_bound_rhs,
    weyl_sum,
)
from .counterexample import (
    LowerBoundRecord,
    LowerBoundReport,
    OmegaCell,
    OmegaStarSample,
    RationalAnchor,
    enumerate_anchors,
    error_budget,
    lattice_sum_S,
    lattice_sum_S_tilde,
    lower_bound_experiment,
    omega_measure_lower,
    sample_omega_star,
    select_time,
    v2_measure_lower,
)

__all__ = [name for name in dir() if not name.startswith("_")]
