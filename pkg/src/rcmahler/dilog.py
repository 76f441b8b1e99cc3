"""The Bloch-Wigner dilogarithm and its functional-equation test battery.

bw_dilog evaluates D(z) = Im(Li2(z)) + log|z|*arg(1-z), extended to the
Riemann sphere (zero on the real axis and at infinity), by mapping the
argument into {|z| <= 1, Re z <= 1/2} through the six-fold symmetry group and
summing the Bernoulli-accelerated series for Li2 there.  circle_dilog is an
independent route to D on the unit circle (the sine series sum sin(n t)/n^2
with tail acceleration) used as a cross-check oracle.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "INFINITY",
    "is_infinite",
    "li2",
    "bw_dilog",
    "circle_dilog",
    "five_term_defect",
    "kubert_defect",
]

PI = math.pi
PI2_6 = math.pi * math.pi / 6.0

#: Marker for the point at infinity on the Riemann sphere.
INFINITY = complex(math.inf, 0.0)


def is_infinite(z) -> bool:
    z = complex(z)
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(-1, 2)
    if n % 2:
        return Fraction(0)
    acc = Fraction(0)
    for k in range(n):
        acc += Fraction(math.comb(n + 1, k)) * _bernoulli(k)
    return -acc / (n + 1)


@lru_cache(maxsize=1)
def _li2_series_coeffs():
    # Li2(z) = u - u^2/4 + sum_{k>=1} B_{2k} u^{2k+1}/(2k+1)!,  u = -log(1-z)
    out = []
    for k in range(1, 40):
        out.append(float(_bernoulli(2 * k) / Fraction(math.factorial(2 * k + 1))))
    return tuple(out)


def _li2_region(z: complex) -> complex:
    """Principal Li2 for |z| <= 1, Re z <= 1/2, via the log series."""
    if z == 0:
        return 0.0 + 0.0j
    u = -cmath.log(1.0 - z)
    u2 = u * u
    acc = u - 0.25 * u2
    term = u * u2  # u^3
    for c in _li2_series_coeffs():
        delta = c * term
        acc += delta
        if abs(delta) < 1e-19 * (1.0 + abs(acc)):
            break
        term *= u2
    return acc


def li2(z: complex) -> complex:
    """Principal-branch dilogarithm Li2(z), z not in (1, inf)."""
    z = complex(z)
    if is_infinite(z):
        raise ValueError("li2 requires a finite argument")
    if z.imag == 0.0 and z.real > 1.0:
        raise ValueError("li2 is not defined on the cut (1, inf); use bw_dilog")
    if z == 1.0:
        return complex(PI2_6, 0.0)
    if abs(z) > 1.0:
        # Li2(z) = -Li2(1/z) - pi^2/6 - log(-z)^2/2
        lg = cmath.log(-z)
        return -li2(1.0 / z) - PI2_6 - 0.5 * lg * lg
    if z.real > 0.5:
        # reflection: Li2(z) = pi^2/6 - log(z)log(1-z) - Li2(1-z)
        return PI2_6 - cmath.log(z) * cmath.log(1.0 - z) - _li2_region(1.0 - z)
    return _li2_region(z)


def _bw_region(w: complex) -> float:
    """D(w) for |w| <= 1.000..., Re w <= 1/2."""
    if abs(w) < 1e-14 or abs(w - 1.0) < 1e-14:
        return 0.0
    value = _li2_region(w).imag + math.log(abs(w)) * cmath.phase(1.0 - w)
    return value


def bw_dilog(z) -> float:
    """Bloch-Wigner dilogarithm on the Riemann sphere.

    Exactly zero for real arguments and at infinity.
    """
    z = complex(z)
    if is_infinite(z):
        return 0.0
    if z.imag == 0.0:
        return 0.0
    if abs(z) < 1e-14 or abs(z - 1.0) < 1e-14 or abs(z) > 1e14:
        return 0.0
    sign = 1.0
    w = z
    if abs(w) > 1.0:
        w = 1.0 / w
        sign = -sign
    if w.real > 0.5:
        w = 1.0 - w
        sign = -sign
    return sign * _bw_region(w)


# ---------------------------------------------------------------------------
# circle oracle: Cl2(theta) = sum_{n>=1} sin(n theta)/n^2
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _clausen_small_coeffs():
    # Cl2(t) = t - t log t + sum_k beta_k/(4^k (2k+1)) t^{2k+1}
    # where log(sin u / u) = -sum_k beta_k u^{2k}, beta_k = 2^(2k-1)|B_2k|/(k (2k)!)
    out = []
    for k in range(1, 16):
        beta = Fraction(2 ** (2 * k - 1)) * abs(_bernoulli(2 * k)) / (k * math.factorial(2 * k))
        out.append(float(beta / (4**k * (2 * k + 1))))
    return tuple(out)


def _clausen_small(theta: float) -> float:
    if theta == 0.0:
        return 0.0
    acc = theta - theta * math.log(theta)
    t2 = theta * theta
    term = theta * t2
    for c in _clausen_small_coeffs():
        acc += c * term
        term *= t2
    return acc


_TAIL_START = 301
_TAIL_DEPTH = 12


def _clausen_series(theta: float) -> float:
    """Direct sine series with an Abel-summation tail, for theta in (0.5, pi]."""
    n = _TAIL_START
    acc = 0.0
    for k in range(1, n):
        acc += math.sin(k * theta) / (k * k)
    z = cmath.exp(1j * theta)
    # tail sum_{k>=n} z^k/k^2 via repeated summation by parts:
    # E_j = [z^a g_j(a) + sum_{k>a} z^k (g_j(k)-g_j(k-1))]/(1-z)
    gvals = [1.0 / ((n + i) * (n + i)) for i in range(_TAIL_DEPTH + 1)]
    tail = 0.0 + 0.0j
    zpow = z**n
    factor = 1.0 / (1.0 - z)
    coef = zpow * factor
    diffs = gvals[:]
    for _ in range(_TAIL_DEPTH):
        tail += coef * diffs[0]
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        coef *= z * factor
    return acc + tail.imag


def circle_dilog(theta: float) -> float:
    """D(e^{i theta}) as the accelerated sine series; cross-check oracle."""
    t = math.fmod(theta, 2 * PI)
    if t > PI:
        t -= 2 * PI
    elif t <= -PI:
        t += 2 * PI
    if t == 0.0 or abs(t) == PI:
        return 0.0
    sign = 1.0
    if t < 0:
        t, sign = -t, -1.0
    if t < 0.5:
        return sign * _clausen_small(t)
    if t > PI - 0.5:
        # duplication Cl2(2s) = 2Cl2(s) - 2Cl2(pi-s) gives, with s = pi - t,
        # Cl2(t) = Cl2(s) - Cl2(2s)/2
        s = PI - t
        return sign * (_clausen_small(s) - 0.5 * _clausen_small(2 * s))
    return sign * _clausen_series(t)


# ---------------------------------------------------------------------------
# functional-equation defects
# ---------------------------------------------------------------------------


def five_term_defect(a: complex, b: complex) -> float:
    """|D(a)+D(b)+D((1-b)/a)+D((a+b-1)/(ab))+D((1-a)/b)|."""
    a, b = complex(a), complex(b)
    if a == 0 or b == 0:
        raise ValueError("arguments must be nonzero")
    total = (
        bw_dilog(a)
        + bw_dilog(b)
        + bw_dilog((1 - b) / a)
        + bw_dilog((a + b - 1) / (a * b))
        + bw_dilog((1 - a) / b)
    )
    return abs(total)


def kubert_defect(z: complex, n: int) -> float:
    """|sum_{k=1..n} D(xi_n^k z) - (1/n) D(z^n)|."""
    z = complex(z)
    if z == 0:
        raise ValueError("argument must be nonzero")
    if n < 1:
        raise ValueError("n must be positive")
    total = 0.0
    for k in range(1, n + 1):
        total += bw_dilog(cmath.exp(2j * PI * k / n) * z)
    return abs(total - bw_dilog(z**n) / n)
