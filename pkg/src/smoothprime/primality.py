"""The smooth primality filter P(n) in its five variants.

``triple-single``
    one triple integral with y(u, v) = 2 + (n - 2) u + delta psi(v)
``summed-triple``
    mean over m = 2..n-1 of triple integrals with y = m + delta psi(v)
``reduced-1d``
    mean over m of one-dimensional integrals along x(t)/y_m(t)
``smoothed-integral`` / ``smoothed-1d``
    the two sums above with the discrete mean over m replaced by an
    integral over m in [2, n) weighted by the bell comb
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .integration import (
    GRID_METHODS,
    IntegralEstimate,
    IntegrationSpec,
    grid_rule,
    integrate_1d,
    integrate_2d,
    integrate_3d,
)
from .kernels import Bell, Bump, Kernel, bell_profile_eval, bump_eval, kernel_eval

VARIANTS = ("triple-single", "summed-triple", "reduced-1d", "smoothed-integral", "smoothed-1d")
DISCRETE_VARIANTS = ("summed-triple", "reduced-1d")
SMOOTHED_VARIANTS = ("smoothed-integral", "smoothed-1d")

DEFAULT_THRESHOLD = 0.985
# normalization integrals below this mean the comb has no mass in [2, n)
MIN_NORMALIZATION = 1e-12
# outer m-grid density floors for the smoothed variants
MIN_NODES_PER_UNIT = 20
MIN_NODES_PER_SIGMA = 10


class DegenerateLocalizationError(ArithmeticError):
    """The bell comb carries (almost) no mass on [2, n)."""


@dataclass(frozen=True)
class SmoothParams:
    """Every tunable of the filter. ``phi`` names the density; only ``uniform`` exists."""

    delta: float = 0.05
    kernel: Kernel = field(default_factory=Kernel)
    bump: Bump = field(default_factory=Bump)
    bell: Bell = field(default_factory=Bell)
    phi: str = "uniform"

    def __post_init__(self):
        # delta = 0 (no perturbation) is allowed for the moment analysis
        if not 0 <= self.delta < 1:
            raise ValueError("delta must be >= 0 and < 1")
        if self.phi != "uniform":
            raise ValueError(f"unknown density {self.phi!r}; only 'uniform' is built in")

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "kernel": self.kernel.family,
            "epsilon": self.kernel.epsilon,
            "p": self.kernel.p,
            "c": self.kernel.c,
            "bump": self.bump.family,
            "bell": self.bell.family,
            "sigma": self.bell.sigma,
            "phi": self.phi,
        }


@dataclass(frozen=True)
class ParamSchedule:
    """n-dependent rules for delta and epsilon.

    delta_rule: ``fixed`` (``delta_value`` or the base delta), ``inverse-square``
    (n^-2) or ``inverse-log`` (1/log n). epsilon_rule: ``fixed``
    (``epsilon_value`` or the base epsilon) or ``power`` (n^-epsilon_exponent).
    """

    delta_rule: str = "fixed"
    epsilon_rule: str = "fixed"
    delta_value: float | None = None
    epsilon_value: float | None = None
    epsilon_exponent: float = 2.0

    def __post_init__(self):
        if self.delta_rule not in ("fixed", "inverse-square", "inverse-log"):
            raise ValueError(f"unknown delta rule {self.delta_rule!r}")
        if self.epsilon_rule not in ("fixed", "power"):
            raise ValueError(f"unknown epsilon rule {self.epsilon_rule!r}")
        if not self.epsilon_exponent > 0:
            raise ValueError("epsilon exponent must be > 0")


@dataclass(frozen=True)
class EvalResult:
    n: float
    variant: str
    value: float
    error_estimate: float
    evaluations: int
    params: SmoothParams
    note: str = ""


@dataclass(frozen=True)
class Classification:
    value: float
    likely_prime: bool
    result: EvalResult


def resolve_schedule(schedule: ParamSchedule, base: SmoothParams, n: float) -> SmoothParams:
    """Return ``base`` with delta and epsilon replaced according to ``schedule`` at n."""
    if schedule.delta_rule == "fixed":
        delta = base.delta if schedule.delta_value is None else schedule.delta_value
    elif schedule.delta_rule == "inverse-square":
        delta = n**-2.0
    else:
        if n <= math.e:
            raise ValueError("inverse-log delta rule needs n > e (log n <= 1 makes delta >= 1)")
        delta = 1.0 / math.log(n)
    if schedule.epsilon_rule == "fixed":
        eps = base.kernel.epsilon if schedule.epsilon_value is None else schedule.epsilon_value
    else:
        eps = n ** -schedule.epsilon_exponent
    return replace(base, delta=delta, kernel=replace(base.kernel, epsilon=eps))


def _require_n(n, minimum=2.0):
    if not n >= minimum:
        raise ValueError(f"n must be >= {minimum:g}")


def _require_integer(n):
    if int(n) != n:
        raise ValueError("this variant needs an integer n")
    _require_n(n)
    return int(n)


def _mean_result(n, variant, params, parts: list[IntegralEstimate]) -> EvalResult:
    value = math.fsum(p.value for p in parts) / len(parts)
    err = math.fsum(p.error_estimate for p in parts) / len(parts)
    notes = sorted({p.note for p in parts if p.note})
    return EvalResult(n, variant, value, err, sum(p.evaluations for p in parts), params, "; ".join(notes))


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def p_triple_single(n: float, params: SmoothParams = SmoothParams(),
                    integ: IntegrationSpec = IntegrationSpec(), workers: int = 1) -> EvalResult:
    """Single triple integral over [0,1]^3 of K(x(t) / y(u, v))."""
    _require_n(n)
    d, kern, bump = params.delta, params.kernel, params.bump

    def integrand(t, u, v):
        x = n + d * bump_eval(bump, t)
        y = 2.0 + (n - 2.0) * u + d * bump_eval(bump, v)
        return kernel_eval(kern, x / y)

    est = integrate_3d(integrand, integ, workers=workers)
    return EvalResult(n, "triple-single", est.value, est.error_estimate, est.evaluations, params, est.note)


def divisor_integral_triple(n, m, params: SmoothParams, integ: IntegrationSpec,
                            collapse_u: bool = False) -> IntegralEstimate:
    """Triple integral of K((n + delta psi(t)) / (m + delta psi(v))) over the unit cube.

    The integrand does not depend on u. By default the full 3D grid is still
    evaluated; ``collapse_u`` integrates over (t, v) only.
    """
    d, kern, bump = params.delta, params.kernel, params.bump
    if collapse_u and integ.method in GRID_METHODS:
        def integrand2(t, v):
            return kernel_eval(kern, (n + d * bump_eval(bump, t)) / (m + d * bump_eval(bump, v)))

        return integrate_2d(integrand2, integ)

    def integrand(t, u, v):
        x = n + d * bump_eval(bump, t)
        # 0*u keeps the u axis so the grid is evaluated in full
        y = m + d * bump_eval(bump, v) + 0.0 * u
        return kernel_eval(kern, x / y)

    return integrate_3d(integrand, integ)


def divisor_integral_1d(n, m, params: SmoothParams, integ: IntegrationSpec) -> IntegralEstimate:
    """One-dimensional integral of K((n + delta psi(t)) / (m + delta psi(t)))."""
    d, kern, bump = params.delta, params.kernel, params.bump

    def integrand(t):
        a = d * bump_eval(bump, t)
        return kernel_eval(kern, (n + a) / (m + a))

    return integrate_1d(integrand, integ)


def p_summed_triple(n: int, params: SmoothParams = SmoothParams(), integ: IntegrationSpec = IntegrationSpec(),
                    collapse_u: bool = False, jobs: int = 1) -> EvalResult:
    """Mean over m = 2..n-1 of the divisor triple integrals; 1.0 for n = 2."""
    n = _require_integer(n)
    if n <= 2:
        return EvalResult(n, "summed-triple", 1.0, 0.0, 0, params, "n <= 2: 1 by definition")
    parts = _map(lambda m: divisor_integral_triple(n, m, params, integ, collapse_u), list(range(2, n)), jobs)
    return _mean_result(n, "summed-triple", params, parts)


def p_reduced_1d(n: int, params: SmoothParams = SmoothParams(), integ: IntegrationSpec = IntegrationSpec(),
                 jobs: int = 1) -> EvalResult:
    """Mean over m = 2..n-1 of the synchronized one-dimensional integrals; 1.0 for n = 2."""
    n = _require_integer(n)
    if n <= 2:
        return EvalResult(n, "reduced-1d", 1.0, 0.0, 0, params, "n <= 2: 1 by definition")
    parts = _map(lambda m: divisor_integral_1d(n, m, params, integ), list(range(2, n)), jobs)
    return _mean_result(n, "reduced-1d", params, parts)


# --- bell-smoothed variants -------------------------------------------------

def comb_windows(n: float, bell: Bell):
    """(center, lo, hi) for every bell of the comb restricted to [2, n).

    Centers run over the integers 2 <= k < n, i.e. the candidate divisors.
    """
    out = []
    for k in range(2, math.ceil(n)):
        lo, hi = max(2.0, k - bell.support), min(float(n), k + bell.support)
        if hi > lo:
            out.append((k, lo, hi))
    return out


def outer_spec(lo: float, hi: float, bell: Bell, spec: IntegrationSpec) -> IntegrationSpec:
    """Outer-rule spec for one bell window, with the node-density floors applied."""
    if spec.method not in GRID_METHODS:
        return spec
    span = hi - lo
    q = max(spec.grid_points_per_axis, math.ceil(MIN_NODES_PER_UNIT * span),
            math.ceil(MIN_NODES_PER_SIGMA * span / bell.sigma))
    return replace(spec, grid_points_per_axis=q)


def _bell_weight(bell: Bell, center, m):
    return bell_profile_eval(bell, (m - center) / bell.sigma)


def inner_1d_values(n, m, params: SmoothParams, integ: IntegrationSpec):
    """Inner t-integrals of K(x(t)/y_m(t)) for an array of m, with their error estimates."""
    m = np.asarray(m, dtype=float)
    if integ.method in GRID_METHODS:
        rule = grid_rule(integ.method, integ.grid_points_per_axis)
        a = params.delta * bump_eval(params.bump, rule.nodes)
        vals = kernel_eval(params.kernel, (n + a) / (m[:, None] + a))
        fine = vals @ rule.weights
        coarse = vals[:, rule.coarse_index] @ rule.coarse_weights
        return fine, np.abs(fine - coarse), rule.nodes.size
    ests = [divisor_integral_1d(n, mm, params, integ) for mm in m]
    return (np.array([e.value for e in ests]), np.array([e.error_estimate for e in ests]),
            ests[0].evaluations if ests else 0)


def inner_triple_values(n, m, params: SmoothParams, integ: IntegrationSpec, collapse_u: bool = False):
    m = np.atleast_1d(np.asarray(m, dtype=float))
    ests = [divisor_integral_triple(n, mm, params, integ, collapse_u) for mm in m]
    return (np.array([e.value for e in ests]), np.array([e.error_estimate for e in ests]),
            ests[0].evaluations if ests else 0)


def _smoothed(n, params, inner, integ_outer, variant) -> EvalResult:
    _require_n(n)
    if n <= 2:
        raise ValueError("smoothed variants need n > 2")
    bell = params.bell
    num = den = num_c = den_c = inner_err = 0.0
    evals = 0
    notes = set()
    for center, lo, hi in comb_windows(n, bell):
        spec = outer_spec(lo, hi, bell, integ_outer)
        span = hi - lo
        if spec.method in GRID_METHODS:
            rule = grid_rule(spec.method, spec.grid_points_per_axis)
            m = lo + span * rule.nodes
            w = _bell_weight(bell, center, m)
            vals, errs, per = inner(m)
            evals += per * m.size
            num += span * float(rule.weights @ (w * vals))
            den += span * float(rule.weights @ w)
            num_c += span * float(rule.coarse_weights @ (w * vals)[rule.coarse_index])
            den_c += span * float(rule.coarse_weights @ w[rule.coarse_index])
            inner_err += span * float(rule.weights @ (w * errs))
            if rule.note:
                notes.add(rule.note)
        else:
            def weighted(s, lo=lo, span=span, center=center):
                nonlocal inner_err, evals
                m = lo + span * s
                w = _bell_weight(bell, center, m)
                vals, errs, per = inner(m)
                evals += per * m.size
                inner_err += span * float(np.sum(w * errs)) / max(1, m.size)
                return span * w * vals

            e_num = integrate_1d(weighted, spec)
            e_den = integrate_1d(lambda s, lo=lo, span=span, center=center:
                                 span * _bell_weight(bell, center, lo + span * s), spec)
            num += e_num.value
            den += e_den.value
            num_c += e_num.value + e_num.error_estimate
            den_c += e_den.value
            if not (e_num.converged and e_den.converged):
                notes.add("outer integral did not converge")
    if den < MIN_NORMALIZATION:
        raise DegenerateLocalizationError(
            f"bell comb mass on [2, {n:g}) is {den:.3g}; localization is degenerate")
    value = num / den
    coarse = num_c / den_c if den_c > 0 else value
    err = abs(value - coarse) + inner_err / den
    return EvalResult(n, variant, value, err, evals, params, "; ".join(sorted(notes)))


DEFAULT_OUTER = IntegrationSpec("simpson", 2048)
DEFAULT_OUTER_TRIPLE = IntegrationSpec("simpson", 256)
DEFAULT_INNER_TRIPLE = IntegrationSpec("simpson", 16)


def p_smoothed_integral(n: float, params: SmoothParams = SmoothParams(),
                        integ_inner: IntegrationSpec = DEFAULT_INNER_TRIPLE,
                        integ_outer: IntegrationSpec = DEFAULT_OUTER_TRIPLE,
                        collapse_u: bool = False) -> EvalResult:
    """Bell-weighted integral over m in [2, n) of the divisor triple integral, normalized."""
    return _smoothed(n, params, lambda m: inner_triple_values(n, m, params, integ_inner, collapse_u),
                     integ_outer, "smoothed-integral")


def p_smoothed_1d(n: float, params: SmoothParams = SmoothParams(),
                  integ_inner: IntegrationSpec = IntegrationSpec("simpson", 128),
                  integ_outer: IntegrationSpec = DEFAULT_OUTER) -> EvalResult:
    """Bell-weighted integral over m in [2, n) of the synchronized 1D integral, normalized."""
    return _smoothed(n, params, lambda m: inner_1d_values(n, m, params, integ_inner),
                     integ_outer, "smoothed-1d")


def evaluate(n, variant: str, params: SmoothParams = SmoothParams(), integ: IntegrationSpec = IntegrationSpec(),
             integ_outer: IntegrationSpec | None = None, jobs: int = 1) -> EvalResult:
    """Dispatch to the named variant. ``integ`` is the inner spec for smoothed variants."""
    if variant == "triple-single":
        return p_triple_single(n, params, integ, workers=jobs)
    if variant == "summed-triple":
        return p_summed_triple(n, params, integ, jobs=jobs)
    if variant == "reduced-1d":
        return p_reduced_1d(n, params, integ, jobs=jobs)
    if variant == "smoothed-integral":
        return p_smoothed_integral(n, params, integ, integ_outer or DEFAULT_OUTER_TRIPLE)
    if variant == "smoothed-1d":
        return p_smoothed_1d(n, params, integ, integ_outer or DEFAULT_OUTER)
    raise ValueError(f"unknown variant {variant!r}")


def classify(n, variant: str, params: SmoothParams = SmoothParams(), integ: IntegrationSpec = IntegrationSpec(),
             threshold: float = DEFAULT_THRESHOLD, **kwargs) -> Classification:
    """Soft primality call: likely prime when P(n) > threshold."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    res = evaluate(n, variant, params, integ, **kwargs)
    return Classification(res.value, res.value > threshold, res)


def grid_nodes(spec: IntegrationSpec) -> int:
    """Nodes per axis used by a grid spec (after Simpson's even rounding)."""
    return grid_rule(spec.method, spec.grid_points_per_axis).nodes.size


def estimated_evaluations(variant: str, n, integ: IntegrationSpec = IntegrationSpec(),
                          integ_outer: IntegrationSpec | None = None, params: SmoothParams = SmoothParams()) -> int:
    """Integrand-call count predicted by the grid cost model (q^3 per triple integral).

    Grid methods only; matches ``EvalResult.evaluations`` exactly.
    """
    if integ.method not in GRID_METHODS:
        raise ValueError("the cost model covers grid methods only")
    q = grid_nodes(integ)
    if variant == "triple-single":
        return q**3
    if variant in DISCRETE_VARIANTS:
        per = q**3 if variant == "summed-triple" else q
        return 0 if n <= 2 else (int(n) - 2) * per
    per = q**3 if variant == "smoothed-integral" else q
    outer = integ_outer or (DEFAULT_OUTER_TRIPLE if variant == "smoothed-integral" else DEFAULT_OUTER)
    total = 0
    for _, lo, hi in comb_windows(n, params.bell):
        total += grid_nodes(outer_spec(lo, hi, params.bell, outer)) * per
    return total
