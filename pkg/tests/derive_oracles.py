"""Independent reference values frozen into the test suite.

Run with ``python3 tests/derive_oracles.py``. Nothing here imports the package:
kernels are re-derived from their closed forms, integrals use scipy's QUADPACK
with explicit breakpoints at kernel dips, and closed forms go through mpmath.
"""

import math

import mpmath
import numpy as np
from scipy import integrate

mpmath.mp.dps = 40

DELTA, EPS, P = 0.05, 1e-5, 8


def K(z, eps=EPS, p=P):
    s = math.sin(math.pi * (z - round(z))) ** 2
    return (s / (s + eps)) ** p


def psi(t):
    return math.sin(math.pi * t) ** 2


def quad(f, a, b, points=()):
    pts = sorted(x for x in points if a < x < b)
    val, _ = integrate.quad(f, a, b, points=pts or None, limit=2000, epsabs=1e-13, epsrel=1e-12)
    return val


def dips_t(n, m):
    """t where (n + a)/(m + a) passes an integer, a = delta psi(t)."""
    out = []
    for k in range(1, int(n) + 2):
        # (n + a)/(m + a) = k  <=>  a = (n - k m)/(k - 1)
        if k == 1:
            continue
        a = (n - k * m) / (k - 1)
        if 0 <= a <= DELTA:
            s = math.asin(math.sqrt(a / DELTA)) / math.pi
            out += [s, 1 - s]
    return out


def reduced(n):
    vals = [quad(lambda t: K((n + DELTA * psi(t)) / (m + DELTA * psi(t))), 0, 1, dips_t(n, m)) for m in range(2, n)]
    return sum(vals) / len(vals)


def summed_triple(n):
    """Mean over m of the (t, v) double integral; the u axis integrates to 1."""
    tot = 0.0
    for m in range(2, n):
        def inner(t):
            x = n + DELTA * psi(t)
            # y = m + delta psi(v): dips where x / y is an integer k
            pts = []
            for k in range(2, n + 1):
                b = (x / k - m) / DELTA
                if 0 <= b <= 1:
                    s = math.asin(math.sqrt(b)) / math.pi
                    pts += [s, 1 - s]
            return quad(lambda v: K(x / (m + DELTA * psi(v))), 0, 1, pts)

        tot += quad(inner, 0, 1, [0.5])
    return tot / (n - 2)


def main():
    print("kernel sine z=0.5:", mpmath.nstr((1 / (1 + mpmath.mpf("1e-5"))) ** 8, 17))
    print("compact bump at 0:", mpmath.nstr(mpmath.e**-1, 17))
    print("comb s=0.1 m=5:", repr(sum(math.exp(-(((5.0 - k) / 0.1) ** 2)) for k in range(2, 9))))
    print("comb s=0.5 m=4.5:", repr(sum(math.exp(-(((4.5 - k) / 0.5) ** 2)) for k in range(2, 8))))
    f = lambda z: (mpmath.sin(mpmath.pi * z) ** 2 / (mpmath.sin(mpmath.pi * z) ** 2 + mpmath.mpf("0.1")))
    print("K''(0) eps=0.1 p=1:", mpmath.nstr(mpmath.diff(f, 0, 2), 17), "2pi^2/eps:", 2 * math.pi**2 / 0.1)
    f2 = lambda z: (mpmath.sin(mpmath.pi * z) ** 2 / (mpmath.sin(mpmath.pi * z) ** 2 + 2)) ** 1
    print("K''(0) eps=2 p=1:", mpmath.nstr(mpmath.diff(f2, 0, 2), 17))
    g = lambda t: K(5.0 / (2.0 + 3.0 * t))
    print("adaptive ref K(5/(2+3t)):", repr(quad(g, 0, 1, [1 / 6])))

    print("reduced-1d:", {n: round(reduced(n), 10) for n in range(3, 14)})
    print("summed-triple:", {n: round(summed_triple(n), 10) for n in range(3, 14)})

    # localized moment r=1, n=15, k=5, t=0, delta=0, sigma=0.05: window z in (4.5, 5.5]
    lo, hi = 15 / 5.5, 15 / 4.5
    bell = lambda m: math.exp(-(((m - 3.0) / 0.05) ** 2))
    mu = [quad(lambda m, r=r: bell(m) * (15.0 / m - 5.0) ** r, max(lo, 2.6), min(hi, 3.4), [3.0]) for r in range(3)]
    print("moments n=15 k=5 t=0:", [repr(x) for x in mu])

    # smoothed 1D reference: bell-weighted m integral (centres 2..n-1) of the reduced integrand
    def smoothed_1d(n, sigma=0.05, sup=8.0):
        num = den = 0.0
        for j in range(2, math.ceil(n)):
            a, b = max(2.0, j - sup * sigma), min(n, j + sup * sigma)
            w = lambda m: math.exp(-(((m - j) / sigma) ** 2))
            ms = np.linspace(a, b, 4001)
            inner = np.array([
                quad(lambda t, m=m: K((n + DELTA * psi(t)) / (m + DELTA * psi(t))), 0, 1, dips_t(n, m)) for m in ms])
            wts = np.array([w(m) for m in ms])
            num += integrate.simpson(wts * inner, x=ms)
            den += integrate.simpson(wts, x=ms)
        return num / den

    for n in (5.0, 6.0, 7.0):
        print(f"smoothed-1d({n}):", repr(float(smoothed_1d(n))))

    for n in (4, 7, 13, 15):
        amp, base = resonance_bins(n)
        print(f"resonance n={n}: A={[round(float(a), 6) for a in amp]} B={[round(float(b), 6) for b in base]}")


def resonance_bins(n, sigma=0.05, sup=8.0, qt=256, qm=20000):
    """Direct-kernel resonance map: bin the bell-weighted (t, m) integrand by the
    nearest integer to z and normalize by the comb mass."""
    t = np.linspace(0, 1, qt + 1)
    wt = np.full(qt + 1, 2.0)
    wt[1::2] = 4.0
    wt[0] = wt[-1] = 1.0
    wt /= 3 * qt
    kmax = n // 2 + 1
    amp, base = np.zeros(kmax + 1), np.zeros(kmax + 1)
    z_norm = 0.0
    for j in range(2, n):
        lo, hi = max(2.0, j - sup * sigma), min(float(n), j + sup * sigma)
        m = np.linspace(lo, hi, qm + 1)
        phi = np.exp(-(((m - j) / sigma) ** 2))
        # trapezoid in m on a very fine grid; bin edges cut panels so keep it simple
        wm = np.full(m.size, (hi - lo) / qm)
        wm[0] = wm[-1] = 0.5 * (hi - lo) / qm
        z_norm += float(wm @ phi)
        a = DELTA * np.sin(np.pi * t) ** 2
        z = (n + a[:, None]) / (m[None, :] + a[:, None])
        s = np.sin(np.pi * (z - np.rint(z))) ** 2
        kz = (s / (s + EPS)) ** P
        w = wt[:, None] * (wm * phi)[None, :]
        k = np.rint(z).astype(int)
        np.add.at(amp, k, w * kz)
        np.add.at(base, k, w)
    return amp[1:] / z_norm, base[1:] / z_norm


if __name__ == "__main__":
    main()
