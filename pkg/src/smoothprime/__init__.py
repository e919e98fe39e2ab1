"""Smooth integral primality filters: kernels, quadrature, P(n) variants and resonance analysis."""

from .integration import IntegralEstimate, IntegrationSpec, NonFiniteIntegrandError, integrate_1d, integrate_3d
from .kernels import Bell, Bump, Kernel, bell_comb_eval, bell_profile_eval, bump_eval, kernel_eval
from .oracle import PrimalityFact, brute_force_p, primality_fact
from .primality import (
    VARIANTS,
    DegenerateLocalizationError,
    EvalResult,
    ParamSchedule,
    SmoothParams,
    classify,
    evaluate,
    p_reduced_1d,
    p_smoothed_1d,
    p_smoothed_integral,
    p_summed_triple,
    p_triple_single,
    resolve_schedule,
)
from .resonance import (
    MomentConstants,
    MomentSpec,
    ResonanceMap,
    detect_composite,
    localized_moment,
    moment_estimate,
    p_reordered,
    resonance_amplitude,
    resonance_map,
)

__version__ = "0.1.0"
