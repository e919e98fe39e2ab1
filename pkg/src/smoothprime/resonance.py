"""Reordered integral, localized moments and the resonance map A_k(n).

For fixed t the ratio z(m) = (n + a)/(m + a), a = delta psi(t), is decreasing
in m. Resonance k owns the m for which k is the nearest integer to z:

    W_k(t) = [x/(k + 1/2) - a, x/(k - 1/2) - a)  intersected with [2, n)

so the windows partition the outer domain and sum_k A_k reproduces the
smoothed one-dimensional P(n). Within each window the kernel is replaced by
its Taylor polynomial of order R where that polynomial is accurate (the
"band" |z - k| <= rho); outside the band, where a truncated expansion around
k diverges, the kernel is integrated directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .integration import GRID_METHODS, IntegrationSpec, grid_rule
from .kernels import (
    MAX_TAYLOR_ORDER,
    Bell,
    Kernel,
    bell_comb_eval,
    bell_profile_eval,
    bump_eval,
    kernel_eval,
    taylor_coefficients,
)
from .primality import (
    DEFAULT_OUTER,
    MIN_NORMALIZATION,
    DegenerateLocalizationError,
    EvalResult,
    SmoothParams,
    comb_windows,
    outer_spec,
)

PSI_MODES = ("peak", "mean-square", "integrate")
# multiples of the band radius used as extra breakpoints outside the band
_BAND_MULTIPLES = (1.0, 4.0, 16.0, 64.0)


@dataclass(frozen=True)
class MomentSpec:
    """Truncation order R and the k range of the resonance scan.

    ``k_max=None`` means floor(n/2) + 1. ``m_intervals`` is the Simpson interval
    count per m piece and ``band_tol`` the accuracy demanded of the Taylor
    polynomial inside the band.
    """

    truncation_order: int = 4
    k_min: int = 1
    k_max: int | None = None
    m_intervals: int = 64
    band_tol: float = 1e-3

    def __post_init__(self):
        if not 0 <= self.truncation_order <= MAX_TAYLOR_ORDER:
            raise ValueError(f"truncation order must be in 0..{MAX_TAYLOR_ORDER}")
        if self.k_min < 1:
            raise ValueError("k_min must be >= 1")
        if self.k_max is not None and self.k_max < self.k_min:
            raise ValueError("k_min must be <= k_max")
        if self.m_intervals < 2 or self.m_intervals % 2:
            raise ValueError("m_intervals must be an even integer >= 2")
        if not self.band_tol > 0:
            raise ValueError("band_tol must be > 0")


@dataclass(frozen=True)
class ResonanceEntry:
    k: int
    amplitude: float
    baseline: float
    relative_drop: float


@dataclass(frozen=True)
class ResonanceMap:
    n: float
    entries: tuple[ResonanceEntry, ...]
    params: SmoothParams
    spec: MomentSpec
    # relative mass of one complete bell, the scale for "negligible" windows
    bell_share: float = 0.0

    @property
    def amplitudes(self) -> list[tuple[int, float]]:
        return [(e.k, e.amplitude) for e in self.entries]

    @property
    def total(self) -> float:
        return math.fsum(e.amplitude for e in self.entries)


@dataclass(frozen=True)
class Detection:
    k: int
    divisor_hint: int
    relative_drop: float


@dataclass(frozen=True)
class MomentConstants:
    """Overrides for the moment estimate: Phi-ratio and K''(0)."""

    phi_ratio: float
    k2: float


def _require_grid(spec: IntegrationSpec):
    if spec.method not in GRID_METHODS:
        raise ValueError("resonance analysis needs a grid integration method")


def _normalization(n, bell: Bell, integ_outer: IntegrationSpec):
    """Integral of the comb over [2, n), on the same grids as the smoothed 1D variant."""
    z = 0.0
    for j, lo, hi in comb_windows(n, bell):
        rule = grid_rule(integ_outer.method, outer_spec(lo, hi, bell, integ_outer).grid_points_per_axis)
        m = lo + (hi - lo) * rule.nodes
        z += (hi - lo) * float(rule.weights @ bell_profile_eval(bell, (m - j) / bell.sigma))
    if z < MIN_NORMALIZATION:
        raise DegenerateLocalizationError(f"bell comb mass on [2, {n:g}) is {z:.3g}; localization is degenerate")
    return z


def p_reordered(n: float, params: SmoothParams = SmoothParams(),
                integ_inner: IntegrationSpec = IntegrationSpec("simpson", 128),
                integ_outer: IntegrationSpec = DEFAULT_OUTER) -> EvalResult:
    """Smoothed one-dimensional P(n) with t outermost and the bell-weighted m integral inside."""
    if not n > 2:
        raise ValueError("n must be > 2")
    _require_grid(integ_inner)
    _require_grid(integ_outer)
    bell, kern = params.bell, params.kernel
    t_rule = grid_rule(integ_inner.method, integ_inner.grid_points_per_axis)
    a = params.delta * bump_eval(params.bump, t_rule.nodes)
    windows = []
    for j, lo, hi in comb_windows(n, bell):
        rule = grid_rule(integ_outer.method, outer_spec(lo, hi, bell, integ_outer).grid_points_per_axis)
        m = lo + (hi - lo) * rule.nodes
        windows.append((hi - lo, m, rule, bell_profile_eval(bell, (m - j) / bell.sigma)))
    inner = np.zeros(a.size)
    inner_c = np.zeros(a.size)
    den = den_c = 0.0
    evals = 0
    for span, m, rule, w in windows:
        den += span * float(rule.weights @ w)
        den_c += span * float(rule.coarse_weights @ w[rule.coarse_index])
    for i, ai in enumerate(a):
        for span, m, rule, w in windows:
            wk = w * kernel_eval(kern, (n + ai) / (m + ai))
            inner[i] += span * float(rule.weights @ wk)
            inner_c[i] += span * float(rule.coarse_weights @ wk[rule.coarse_index])
            evals += m.size
    if den < MIN_NORMALIZATION:
        raise DegenerateLocalizationError(f"bell comb mass on [2, {n:g}) is {den:.3g}; localization is degenerate")
    value = float(t_rule.weights @ inner) / den
    coarse_t = float(t_rule.coarse_weights @ inner[t_rule.coarse_index]) / den
    coarse_m = float(t_rule.weights @ inner_c) / den_c
    err = abs(value - coarse_t) + abs(value - coarse_m)
    return EvalResult(n, "reordered", value, err, evals, params)


def _window_bounds(n, x, a, k, lo, hi):
    """Clip [lo, hi] to the m range where k is the nearest integer to z(m)."""
    w_lo = x / (k + 0.5) - a
    w_hi = x / (k - 0.5) - a if k > 0.5 else np.inf
    return np.maximum(lo, w_lo), np.minimum(hi, w_hi)


def localized_moment(r: int, k: int, t: float, n: float, params: SmoothParams = SmoothParams(),
                     integ_m: IntegrationSpec = IntegrationSpec("simpson", 256), band: float | None = None,
                     center: int | None = None) -> float:
    """mu_r(k; t) = integral of Phi_sigma(m) (z(m) - k)^r over resonance window k.

    ``band`` further restricts the window to |z - k| <= band and ``center``
    keeps only the bell centred at that integer. An empty window gives
    exactly 0.
    """
    if not 0 <= r <= MAX_TAYLOR_ORDER:
        raise ValueError(f"r must be in 0..{MAX_TAYLOR_ORDER}")
    _require_grid(integ_m)
    bell = params.bell
    a = params.delta * bump_eval(params.bump, t)
    x = n + a
    rule = grid_rule(integ_m.method, integ_m.grid_points_per_axis)
    total = 0.0
    for j, lo, hi in comb_windows(n, bell):
        if center is not None and j != center:
            continue
        lo, hi = _window_bounds(n, x, a, k, lo, hi)
        if band is not None:
            lo = max(lo, x / (k + band) - a)
            hi = min(hi, x / (k - band) - a) if k > band else hi
        if hi <= lo:
            continue
        m = lo + (hi - lo) * rule.nodes
        vals = bell_profile_eval(bell, (m - j) / bell.sigma) * (x / (m + a) - k) ** r
        total += (hi - lo) * float(rule.weights @ vals)
    return total


@lru_cache(maxsize=64)
def band_radius(kernel: Kernel, order: int, tol: float) -> float:
    """Largest rho with |Taylor_R(w) - K(w)| <= tol for all |w| <= rho."""
    coef = np.array(taylor_coefficients(kernel, order))
    w = np.linspace(0.0, min(0.5, 20.0 * kernel.width), 200_001)[1:]
    bad = np.abs(np.polyval(coef[::-1], w) - kernel_eval(kernel, w)) > tol
    first = int(np.argmax(bad)) if bad.any() else w.size
    return float(w[first - 1]) if first > 0 else 0.0


def _default_k_max(n):
    return math.floor(n / 2) + 1


def _k_range(n, spec: MomentSpec):
    k_max = _default_k_max(n) if spec.k_max is None else spec.k_max
    if k_max > _default_k_max(n):
        raise ValueError(f"k_max must be <= floor(n/2)+1 = {_default_k_max(n)}")
    return range(spec.k_min, k_max + 1)


def _amplitudes(n, params: SmoothParams, spec: MomentSpec, integ_t: IntegrationSpec,
                ks, integ_outer: IntegrationSpec = DEFAULT_OUTER):
    """Amplitudes and bell-mass baselines for each k in ks, both divided by the comb mass."""
    _require_grid(integ_t)
    bell, kern = params.bell, params.kernel
    z_norm = _normalization(n, bell, integ_outer)
    t_rule = grid_rule(integ_t.method, integ_t.grid_points_per_axis)
    a = params.delta * bump_eval(params.bump, t_rule.nodes)
    x = n + a
    coef = np.array(taylor_coefficients(kern, spec.truncation_order))
    rho = band_radius(kern, spec.truncation_order, spec.band_tol)
    m_rule = grid_rule("simpson", spec.m_intervals)
    s = m_rule.nodes
    amp = {k: 0.0 for k in ks}
    base = {k: 0.0 for k in ks}
    offsets = np.array([-f * rho for f in _BAND_MULTIPLES[::-1]] + [f * rho for f in _BAND_MULTIPLES])
    for j, lo, hi in comb_windows(n, bell):
        z_lo, z_hi = n / (hi + params.delta), (n + params.delta) / lo
        for k in ks:
            if k + 0.5 < z_lo or k - 0.5 > z_hi:
                continue
            wlo, whi = _window_bounds(n, x, a, k, lo, hi)
            whi = np.maximum(whi, wlo)
            # m-breakpoints at z = k + offsets (z decreases in m, so reverse after mapping)
            zb = k + offsets
            with np.errstate(divide="ignore"):
                mb = np.where(zb[None, :] > 0, x[:, None] / zb[None, :] - a[:, None], np.inf)
            edges = np.sort(np.clip(np.concatenate([wlo[:, None], mb, whi[:, None]], axis=1),
                                    wlo[:, None], whi[:, None]), axis=1)
            width = np.diff(edges, axis=1)
            m = edges[:, :-1, None] + width[:, :, None] * s
            z = x[:, None, None] / (m + a[:, None, None])
            w = bell_profile_eval(bell, (m - j) / bell.sigma)
            dz = z - k
            taylor = np.polyval(coef[::-1], dz)
            kval = np.where(np.abs(dz) <= rho, taylor, kernel_eval(kern, z))
            piece_amp = width * ((w * kval) @ m_rule.weights)
            piece_base = width * (w @ m_rule.weights)
            amp[k] += float(t_rule.weights @ piece_amp.sum(axis=1))
            base[k] += float(t_rule.weights @ piece_base.sum(axis=1))
    return ({k: v / z_norm for k, v in amp.items()}, {k: v / z_norm for k, v in base.items()},
            bell.sigma * _profile_mass(bell) / z_norm)


@lru_cache(maxsize=16)
def _profile_mass(bell: Bell) -> float:
    """Integral of Phi(x) over its support, in units of x."""
    x = np.linspace(-bell.support / bell.sigma, bell.support / bell.sigma, 4001)
    rule = grid_rule("simpson", 4000)
    return (x[-1] - x[0]) * float(rule.weights @ bell_profile_eval(bell, x))


def resonance_amplitude(k: int, n: float, params: SmoothParams = SmoothParams(), spec: MomentSpec = MomentSpec(),
                        integ_t: IntegrationSpec = IntegrationSpec()) -> float:
    """A_k(n): the order-R moment contribution of resonance k, relative to the comb mass."""
    if not spec.k_min <= k <= (_default_k_max(n) if spec.k_max is None else spec.k_max):
        raise ValueError("k outside the MomentSpec range")
    amp, _, _ = _amplitudes(n, params, spec, integ_t, [k])
    return amp[k]


def resonance_map(n: float, params: SmoothParams = SmoothParams(), spec: MomentSpec = MomentSpec(),
                  integ_t: IntegrationSpec = IntegrationSpec()) -> ResonanceMap:
    """A_k(n) with bell-mass baselines for every k in the spec range."""
    if not n > 2:
        raise ValueError("n must be > 2")
    ks = list(_k_range(n, spec))
    amp, base, share = _amplitudes(n, params, spec, integ_t, ks)
    entries = tuple(
        ResonanceEntry(k, amp[k], base[k], 1.0 - amp[k] / base[k] if base[k] > 0 else 0.0) for k in ks)
    return ResonanceMap(n, entries, params, spec, share)


def detect_composite(rmap: ResonanceMap, rel_threshold: float = 0.02, min_mass: float = 0.05) -> Detection | None:
    """The k >= 2 with the largest relative drop above ``rel_threshold``, or None.

    Windows holding less than ``min_mass`` of one bell are ignored: their
    drop is dominated by a sliver of bell tail. Ties go to the smaller k.
    """
    if not rmap.entries:
        raise ValueError("empty resonance map")
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    best = None
    for e in rmap.entries:
        if e.k < 2 or e.baseline < min_mass * rmap.bell_share:
            continue
        if e.relative_drop > rel_threshold and (best is None or e.relative_drop > best.relative_drop):
            best = e
    if best is None:
        return None
    return Detection(best.k, round(rmap.n / best.k), best.relative_drop)


def comb_mass(n: float, bell: Bell, integ_outer: IntegrationSpec = DEFAULT_OUTER) -> float:
    """Integral of the bell comb over [2, n)."""
    return _normalization(n, bell, integ_outer)


def psi_factor(params: SmoothParams, mode: str = "peak") -> float:
    """The psi(t)^2 factor of the moment estimate under the chosen convention."""
    if mode == "peak":
        return 1.0
    if mode == "mean-square":
        return 3.0 / 8.0
    if mode == "integrate":
        rule = grid_rule("simpson", 1024)
        return float(rule.weights @ bump_eval(params.bump, rule.nodes) ** 2)
    raise ValueError(f"psi mode must be one of {PSI_MODES}")


def moment_estimate(n: int, d: int, params: SmoothParams = SmoothParams(),
                    given_constants: MomentConstants | None = None, psi_mode: str = "peak") -> float:
    """Truncated moment formula 1 - r [K(0) + K''(0)/2 (delta psi / d)^2] for a divisor d.

    r is Phi_sigma(d) / integral of Phi_sigma over [2, n) unless ``given_constants``
    supplies it (and K''(0)).
    """
    if int(n) != n or int(d) != d:
        raise ValueError("n and d must be integers")
    if not 2 <= d < n or n % d:
        raise ValueError(f"{d} is not a proper divisor of {n}")
    if given_constants is None:
        ratio = bell_comb_eval(params.bell, float(d)) / comb_mass(n, params.bell)
        k2 = 2.0 * taylor_coefficients(params.kernel, 2)[2]
    else:
        ratio, k2 = given_constants.phi_ratio, given_constants.k2
    k0 = kernel_eval(params.kernel, 0.0)
    return 1.0 - ratio * (k0 + 0.5 * k2 * (params.delta / d) ** 2 * psi_factor(params, psi_mode))
