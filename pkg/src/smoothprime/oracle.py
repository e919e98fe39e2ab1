"""Exact integer ground truth and brute-force reference values of P(n)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .integration import IntegrationSpec
from .primality import VARIANTS, SmoothParams, evaluate

MIN_RESOLUTION = 256
MAX_TRIPLE_NODES = 10**9
_TRIPLE_VARIANTS = ("triple-single", "summed-triple", "smoothed-integral")


@dataclass(frozen=True)
class PrimalityFact:
    n: int
    is_prime: bool
    smallest_divisor: int


def primality_fact(n: int) -> PrimalityFact:
    """Trial division up to sqrt(n)."""
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    n = int(n)
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return PrimalityFact(n, False, d)
    return PrimalityFact(n, True, n)


def is_prime(n: int) -> bool:
    return n >= 2 and primality_fact(n).is_prime


def is_prime_wheel(n: int) -> bool:
    """Independent check: 6k +/- 1 wheel."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    f = 5
    while f * f <= n:
        if n % f == 0 or n % (f + 2) == 0:
            return False
        f += 6
    return True


def brute_force_p(n, variant: str, params: SmoothParams = SmoothParams(), resolution: int = MIN_RESOLUTION) -> float:
    """P(n) with Simpson at ``resolution`` intervals on every axis.

    For the smoothed variants the outer m grid uses the same interval count
    per bell window, raised to the usual density floors. n = 2 returns 1.0.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}")
    if variant in _TRIPLE_VARIANTS and (resolution + 1) ** 3 > MAX_TRIPLE_NODES:
        raise ValueError("resolution^3 exceeds the 1e9 node guard for triple variants")
    if n == 2:
        return 1.0
    spec = IntegrationSpec("simpson", resolution)
    outer = IntegrationSpec("simpson", resolution)
    return evaluate(n, variant, params, spec, integ_outer=outer).value
