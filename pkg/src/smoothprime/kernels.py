"""Periodic suppression kernels, bump functions and bell localization profiles.

Everything here is vectorized over numpy arrays and side-effect free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

KERNEL_FAMILIES = ("sine", "modified-gaussian", "singular-exponential", "inverse-polynomial")
BUMP_FAMILIES = ("sine-squared", "quartic", "compact-exponential")
BELL_FAMILIES = ("gaussian", "compact-bump", "sine-squared-bell")

# powers above this go through exp(p*log(base)) instead of base**p
_LOG_POWER_CUTOFF = 32
# sin^2 below this is treated as an exact integer hit by the singular kernel
_SINGULAR_FLOOR = 1e-300


@dataclass(frozen=True)
class Kernel:
    """A suppression kernel: family plus its sharpness parameters.

    ``epsilon`` is the sharpness, ``p`` the suppression exponent and ``c`` the
    constant of the singular-exponential family (ignored elsewhere).
    """

    family: str = "sine"
    epsilon: float = 1e-5
    p: int = 8
    c: float = 1.0

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")
        if not self.c > 0:
            raise ValueError("c must be > 0")
        object.__setattr__(self, "p", int(self.p))

    @property
    def width(self) -> float:
        """Distance from an integer over which the kernel recovers, capped at 0.1."""
        scale = self.c * self.epsilon if self.family == "singular-exponential" else self.epsilon
        return min(0.1, math.sqrt(scale) / math.pi)


@dataclass(frozen=True)
class Bump:
    family: str = "sine-squared"
    normalize: bool = False

    def __post_init__(self):
        if self.family not in BUMP_FAMILIES:
            raise ValueError(f"unknown bump family {self.family!r}")


@dataclass(frozen=True)
class Bell:
    """Bell profile with localization width ``sigma``.

    ``truncation_radius`` (in units of sigma) bounds the gaussian support;
    the compact families use their exact support instead.
    """

    family: str = "gaussian"
    sigma: float = 0.05
    truncation_radius: float = 8.0

    def __post_init__(self):
        if self.family not in BELL_FAMILIES:
            raise ValueError(f"unknown bell family {self.family!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.truncation_radius >= 4:
            raise ValueError("truncation_radius must be >= 4")

    @property
    def support(self) -> float:
        """Half-width of the profile support, in units of the argument of m."""
        if self.family == "gaussian":
            return self.truncation_radius * self.sigma
        if self.family == "compact-bump":
            return self.sigma
        return 0.5 * self.sigma


def _sin2pi(z):
    # reduce to [-1/2, 1/2] first: z - rint(z) is exact, so period-1 shifts
    # only cost the rounding of z + 1 itself
    r = z - np.rint(z)
    s = np.sin(np.pi * r)
    return s * s


def _power(base, p):
    if p <= _LOG_POWER_CUTOFF:
        return base**p
    out = np.zeros_like(base)
    pos = base > 0
    out[pos] = np.exp(p * np.log(base[pos]))
    return out


def kernel_eval(kernel: Kernel, z):
    """Evaluate the suppression kernel K(z). Returns a float for scalar input."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    s2 = _sin2pi(z)
    eps = kernel.epsilon
    fam = kernel.family
    if fam == "sine":
        out = _power(np.atleast_1d(s2 / (s2 + eps)), kernel.p).reshape(s2.shape)
    elif fam == "modified-gaussian":
        out = -np.expm1(-s2 / eps)
    elif fam == "singular-exponential":
        hit = s2 < _SINGULAR_FLOOR
        safe = np.where(hit, 1.0, s2)
        out = np.where(hit, 0.0, np.exp(-kernel.c / (eps * safe)))
    else:
        out = 1.0 / (1.0 + (s2 / eps) ** kernel.p)
    return float(out) if scalar else out


def bump_eval(bump: Bump, s):
    """Evaluate the bump psi(s) on [0, 1]; arguments outside raise ValueError."""
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 1)) or np.any(np.isnan(s)):
        raise ValueError("bump argument must lie in [0, 1]")
    out = _bump_raw(bump.family, s)
    if bump.normalize:
        out = out / _bump_raw(bump.family, np.float64(0.5))
    return float(out) if scalar else out


def _bump_raw(family, s):
    if family == "sine-squared":
        v = np.sin(np.pi * s)
        return v * v
    if family == "quartic":
        return s * s * (1.0 - s) ** 2
    w = s * (1.0 - s)
    inside = w > 0
    with np.errstate(over="ignore"):
        return np.where(inside, np.exp(-1.0 / np.where(inside, w, 1.0)), 0.0)


def bell_profile_eval(bell: Bell, x):
    """Evaluate the unscaled bell profile Phi(x) (sigma is not applied here)."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if bell.family == "gaussian":
        out = np.exp(-x * x)
    elif bell.family == "compact-bump":
        inside = np.abs(x) < 1
        out = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - x * x, 1.0)), 0.0)
    else:
        # cos^2 so that the profile peaks at its center
        c = np.cos(np.pi * x)
        out = np.where(np.abs(x) < 0.5, c * c, 0.0)
    return float(out) if scalar else out


def bell_centers(bell: Bell, lo: float, hi: float, k_min: int = 2, k_max: int | None = None):
    """Integer centers whose (truncated) bell touches [lo, hi]."""
    first = max(k_min, math.ceil(lo - bell.support))
    last = math.floor(hi + bell.support)
    if k_max is not None:
        last = min(last, k_max)
    return range(first, last + 1)


def bell_comb_eval(bell: Bell, m, k_min: int = 2, k_max: int | None = None):
    """Comb Phi_sigma(m) = sum_k Phi((m - k)/sigma) over k >= k_min (and <= k_max).

    Centers further than the bell support from m are dropped.
    """
    if k_min < 2:
        raise ValueError("k_min must be >= 2")
    scalar = np.ndim(m) == 0
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    if m.size:
        for k in bell_centers(bell, float(m.min()), float(m.max()), k_min, k_max):
            x = (m - k) / bell.sigma
            near = np.abs(m - k) <= bell.support
            out += np.where(near, bell_profile_eval(bell, x), 0.0)
    return float(out) if scalar else out


MAX_TAYLOR_ORDER = 8


@lru_cache(maxsize=None)
def _central_stencil(order):
    offsets = np.arange(-2.0, 3.0)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(offsets.size)
    rhs[order] = math.factorial(order)
    coef = np.linalg.solve(vander, rhs)
    # five points: fourth-order accurate for orders 1-2, second-order for 3-4
    return offsets, coef, 4 if order <= 2 else 2


def kernel_derivative_at(kernel: Kernel, z0: float, order: int, step: float | None = None) -> float:
    """Numerical derivative K^(order)(z0), order 0..4.

    Five-point central stencil refined by one Richardson step. The default
    step is 1/100 of the kernel width so the stencil resolves the dip near
    integers.
    """
    if order not in (0, 1, 2, 3, 4):
        raise ValueError("order must be in 0..4")
    if order == 0:
        return kernel_eval(kernel, z0)
    offsets, coef, err_order = _central_stencil(order)
    h = kernel.width / 100.0 if step is None else step

    def stencil(h):
        return float(coef @ kernel_eval(kernel, z0 + offsets * h)) / h**order

    coarse, fine = stencil(h), stencil(h / 2)
    gain = 2.0**err_order
    return (gain * fine - coarse) / (gain - 1.0)


def _kernel_complex(kernel, u):
    s = np.sin(np.pi * u) ** 2
    if kernel.family == "sine":
        return (s / (s + kernel.epsilon)) ** kernel.p
    if kernel.family == "modified-gaussian":
        return -np.expm1(-s / kernel.epsilon)
    return 1.0 / (1.0 + (s / kernel.epsilon) ** kernel.p)


@lru_cache(maxsize=64)
def taylor_coefficients(kernel: Kernel, order: int, points: int = 64) -> tuple[float, ...]:
    """Taylor coefficients K^(r)(0)/r! for r = 0..order.

    Computed from a Cauchy integral on a circle at half the distance to the
    nearest complex singularity (sin^2(pi u) = -epsilon), which stays exact to
    round-off at orders where finite differences have long since failed. All
    integers share these coefficients by periodicity. The singular-exponential
    kernel is flat at integers, so its coefficients are all zero.
    """
    if int(order) != order or not 0 <= order <= MAX_TAYLOR_ORDER:
        raise ValueError(f"order must be in 0..{MAX_TAYLOR_ORDER}")
    if kernel.family == "singular-exponential":
        return (0.0,) * (order + 1)
    radius = 0.5 * math.asinh(math.sqrt(kernel.epsilon)) / math.pi
    theta = 2.0 * math.pi * np.arange(points) / points
    values = _kernel_complex(kernel, radius * np.exp(1j * theta))
    coef = np.fft.fft(values).real / points
    return tuple(float(coef[r]) / radius**r for r in range(order + 1))


class KernelTable:
    """Kernel values cached on a dense grid over one period.

    Lookups use linear interpolation in the fractional part of z. Useful when
    one kernel is evaluated many times; the cost is resolution and an
    interpolation error of order (K'' / 8) / points^2.
    """

    def __init__(self, kernel: Kernel, points: int = 1 << 18):
        self.kernel = kernel
        self.grid = np.linspace(-0.5, 0.5, points + 1)
        self.values = kernel_eval(kernel, self.grid)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return np.interp(z - np.rint(z), self.grid, self.values)
