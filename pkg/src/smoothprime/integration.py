"""Quadrature and Monte Carlo integration over [0, 1] and [0, 1]^3.

Integrands are vectorized: ``f(t)`` receives a numpy array of nodes and must
return an array of the same shape; three-dimensional integrands are called as
``f(t, u, v)`` with broadcastable arrays. Every routine returns an
:class:`IntegralEstimate` with an error estimate and the number of integrand
values consumed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

METHODS = ("midpoint", "trapezoid", "simpson", "monte-carlo", "adaptive")
GRID_METHODS = ("midpoint", "trapezoid", "simpson")

MC_CHUNK = 8192
# upper bound on integrand values materialized per slab of a 3D grid
_SLAB_BUDGET = 1 << 21


class NonFiniteIntegrandError(ArithmeticError):
    """The integrand produced NaN or inf; ``location`` holds the offending node."""

    def __init__(self, location):
        self.location = tuple(float(x) for x in np.atleast_1d(location))
        where = ", ".join(f"{x:.6g}" for x in self.location)
        super().__init__(f"non-finite integrand value at ({where})")


@dataclass(frozen=True)
class IntegrationSpec:
    """Backend choice and its resolution knobs.

    ``grid_points_per_axis`` is the interval count q of the grid rules (and
    the initial panel count of the adaptive rule); ``samples`` and ``seed``
    drive Monte Carlo; ``abs_tol`` and ``max_subdivisions`` drive the
    adaptive rule.
    """

    method: str = "simpson"
    grid_points_per_axis: int = 32
    samples: int = 10_000
    seed: int = 0
    abs_tol: float = 1e-8
    max_subdivisions: int = 100_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown integration method {self.method!r}")
        if int(self.grid_points_per_axis) != self.grid_points_per_axis or self.grid_points_per_axis < 1:
            raise ValueError("grid_points_per_axis must be a positive integer")
        if self.method == "simpson" and self.grid_points_per_axis < 2:
            raise ValueError("simpson needs at least 2 intervals")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True
    note: str = ""


@dataclass(frozen=True)
class Rule:
    """A 1D rule on [0, 1] plus the subsampled coarse rule used for its error estimate."""

    nodes: np.ndarray
    weights: np.ndarray
    coarse_index: np.ndarray
    coarse_weights: np.ndarray
    note: str = ""


def _simpson_weights(q):
    w = np.ones(q + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * q)


def _trapezoid_weights(q):
    w = np.full(q + 1, 1.0 / q)
    w[0] = w[-1] = 0.5 / q
    return w


def grid_rule(method: str, q: int) -> Rule:
    """Nodes and weights of a composite rule with q intervals on [0, 1]."""
    note = ""
    if method == "midpoint":
        nodes = (np.arange(q) + 0.5) / q
        weights = np.full(q, 1.0 / q)
        if q % 3 == 0:
            idx = np.arange(1, q, 3)
            cw = np.full(idx.size, 3.0 / q)
        else:
            # offset rectangle rule on every other node
            idx = np.arange(0, q, 2)
            cw = np.full(idx.size, 1.0 / idx.size)
        return Rule(nodes, weights, idx, cw)
    if method == "simpson" and q % 2:
        q += 1
        note = f"simpson interval count rounded up to {q}"
    nodes = np.linspace(0.0, 1.0, q + 1)
    if method == "trapezoid":
        weights = _trapezoid_weights(q)
        if q % 2 == 0:
            idx, cw = np.arange(0, q + 1, 2), _trapezoid_weights(q // 2)
        else:
            # plain node average as the comparison rule
            idx, cw = np.arange(q + 1), np.full(q + 1, 1.0 / (q + 1))
        return Rule(nodes, weights, idx, cw, note)
    if method == "simpson":
        weights = _simpson_weights(q)
        if q % 4 == 0:
            idx, cw = np.arange(0, q + 1, 2), _simpson_weights(q // 2)
        else:
            idx, cw = np.arange(q + 1), _trapezoid_weights(q)
        return Rule(nodes, weights, idx, cw, note)
    raise ValueError(f"{method!r} is not a grid method")


def _check_finite(values, *axes):
    bad = ~np.isfinite(values)
    if bad.any():
        pos = np.unravel_index(int(np.argmax(bad)), values.shape)
        raise NonFiniteIntegrandError([ax[i] for ax, i in zip(axes, pos)])


def integrate_1d(f, spec: IntegrationSpec, workers: int = 1) -> IntegralEstimate:
    """Integrate ``f`` over [0, 1] with the backend named in ``spec``."""
    if spec.method == "adaptive":
        return integrate_1d_adaptive(f, spec)
    if spec.method == "monte-carlo":
        return _monte_carlo(f, spec, 1, workers)
    rule = grid_rule(spec.method, spec.grid_points_per_axis)
    values = np.broadcast_to(np.asarray(f(rule.nodes), dtype=float), rule.nodes.shape)
    _check_finite(values, rule.nodes)
    value = float(rule.weights @ values)
    coarse = float(rule.coarse_weights @ values[rule.coarse_index])
    return IntegralEstimate(value, abs(value - coarse), rule.nodes.size, note=rule.note)


def _tensor(f, rule: Rule, dim: int):
    """Tensor-product sum in ``dim`` (2 or 3) dimensions, slab by slab along the first axis."""
    x, w = rule.nodes, rule.weights
    n = x.size
    cw_full = np.zeros(n)
    cw_full[rule.coarse_index] = rule.coarse_weights
    slab = max(1, _SLAB_BUDGET // n ** (dim - 1))
    fine = coarse = 0.0
    for start in range(0, n, slab):
        sl = slice(start, min(n, start + slab))
        if dim == 3:
            args = (x[sl, None, None], x[None, :, None], x[None, None, :])
            shape = (args[0].shape[0], n, n)
        else:
            args = (x[sl, None], x[None, :])
            shape = (args[0].shape[0], n)
        vals = np.broadcast_to(np.asarray(f(*args), dtype=float), shape)
        _check_finite(vals, x[sl], *(x,) * (dim - 1))
        inner = vals
        inner_c = vals
        for _ in range(dim - 1):
            inner = inner @ w
            inner_c = inner_c @ cw_full
        fine += float(w[sl] @ inner)
        coarse += float(cw_full[sl] @ inner_c)
    return fine, coarse, n**dim, rule.note


def integrate_3d(f, spec: IntegrationSpec, workers: int = 1) -> IntegralEstimate:
    """Integrate ``f(t, u, v)`` over the unit cube.

    Grid methods use the tensor product of the 1D rule (q^3 nodes, or
    (q+1)^3); Monte Carlo draws ``samples`` uniform triples. The adaptive
    method is 1D only.
    """
    if spec.method == "adaptive":
        raise ValueError("adaptive integration is only available in 1D")
    if spec.method == "monte-carlo":
        return _monte_carlo(f, spec, 3, workers)
    fine, coarse, evals, note = _tensor(f, grid_rule(spec.method, spec.grid_points_per_axis), 3)
    return IntegralEstimate(fine, abs(fine - coarse), evals, note=note)


def integrate_2d(f, spec: IntegrationSpec) -> IntegralEstimate:
    """Tensor-product grid integral of ``f(a, b)`` over the unit square."""
    if spec.method not in GRID_METHODS:
        raise ValueError("2D integration supports grid methods only")
    fine, coarse, evals, note = _tensor(f, grid_rule(spec.method, spec.grid_points_per_axis), 2)
    return IntegralEstimate(fine, abs(fine - coarse), evals, note=note)


def _mc_chunk(f, seed, chunk, size, dim):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    pts = rng.random((dim, size))
    vals = np.broadcast_to(np.asarray(f(*pts), dtype=float), (size,))
    _check_finite_points(vals, pts)
    mean = float(vals.mean())
    m2 = float(((vals - mean) ** 2).sum())
    return size, mean, m2


def _check_finite_points(vals, pts):
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NonFiniteIntegrandError(pts[:, int(np.argmax(bad))])


def _monte_carlo(f, spec, dim, workers):
    # Philox streams keyed by (seed, chunk index): the sample set does not
    # depend on how chunks are scheduled, and partial moments are merged in
    # chunk order, so any worker count gives bit-identical results.
    n = spec.samples
    sizes = [min(MC_CHUNK, n - s) for s in range(0, n, MC_CHUNK)]
    jobs = [(f, spec.seed, i, size, dim) for i, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _mc_chunk(*a), jobs))
    else:
        parts = [_mc_chunk(*a) for a in jobs]
    count, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        total = count + nb
        delta = mb - mean
        mean += delta * nb / total
        m2 += m2b + delta * delta * count * nb / total
        count = total
    stderr = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return IntegralEstimate(mean, stderr, n)


def integrate_1d_adaptive(f, spec: IntegrationSpec) -> IntegralEstimate:
    """Adaptive Simpson quadrature on [0, 1].

    Starts from ``grid_points_per_axis`` equal panels and bisects any panel
    whose two-level Simpson difference exceeds 15 * abs_tol * (panel length).
    When ``max_subdivisions`` bisections are used up the remaining panels are
    accepted as they are and the estimate is flagged as not converged.
    """
    tol = spec.abs_tol
    panels = spec.grid_points_per_axis
    edges = np.linspace(0.0, 1.0, panels + 1)
    a0, b0 = edges[:-1], edges[1:]
    # five nodes per panel: a, a+h/4, a+h/2, a+3h/4, b
    x = np.concatenate([a0, a0 + (b0 - a0) / 4, (a0 + b0) / 2, a0 + 3 * (b0 - a0) / 4, [1.0]])
    fx = np.asarray(f(x), dtype=float)
    _check_finite(fx, x)
    evals = x.size
    p = panels
    stack = [
        (a0[i], b0[i], fx[i], fx[p + i], fx[2 * p + i], fx[3 * p + i], fx[i + 1] if i + 1 < p else fx[-1])
        for i in range(p)
    ]
    value = err = 0.0
    subdivisions = 0
    exhausted = False
    while stack:
        a, b, fa, fl, fm, fr, fb = stack.pop()
        h = b - a
        whole = h * (fa + 4 * fm + fb) / 6
        halves = h * (fa + 4 * fl + 2 * fm + 4 * fr + fb) / 12
        diff = halves - whole
        if abs(diff) <= 15 * tol * h or exhausted:
            value += halves + diff / 15
            err += abs(diff) / 15
            continue
        if subdivisions >= spec.max_subdivisions:
            exhausted = True
            value += halves + diff / 15
            err += abs(diff) / 15
            continue
        subdivisions += 1
        m = (a + b) / 2
        q = np.array([a + h / 8, a + 3 * h / 8, m + h / 8, m + 3 * h / 8])
        fq = np.asarray(f(q), dtype=float)
        _check_finite(fq, q)
        evals += 4
        stack.append((m, b, fm, fq[2], fr, fq[3], fb))
        stack.append((a, m, fa, fq[0], fl, fq[1], fm))
    note = "max_subdivisions exhausted before tolerance was met" if exhausted else ""
    return IntegralEstimate(float(value), float(err), evals, converged=not exhausted, note=note)
