"""Complex root finding and exact resultants.

Root finding uses companion-matrix eigenvalues as the simultaneous starting
configuration, refined with Aberth-Ehrlich correction sweeps; multiplicities
of exact integer polynomials are resolved through the exact squarefree part.
Resultants are computed with fraction-free subresultant elimination over Z[x];
no floating point enters the exact paths.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .polyio import BiPoly, IntPoly

__all__ = [
    "Root",
    "RootSet",
    "RootFindingError",
    "find_roots",
    "resultant_y",
    "resultant_x",
    "is_root_of_unity",
    "int_poly_gcd",
    "squarefree_part",
]


class RootFindingError(RuntimeError):
    """Iteration failed to converge; carries the best iterate and residuals."""

    def __init__(self, message, best=None, residuals=None):
        super().__init__(message)
        self.best = best
        self.residuals = residuals


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    residual: float


@dataclass(frozen=True)
class RootSet:
    roots: tuple

    @property
    def degree(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def values(self):
        out = []
        for r in self.roots:
            out.extend([r.value] * r.multiplicity)
        return out


# ---------------------------------------------------------------------------
# numeric kernel
# ---------------------------------------------------------------------------


def _as_coeff_array(p) -> np.ndarray:
    if isinstance(p, IntPoly):
        return np.array([float(c) for c in p.coeffs], dtype=complex)
    return np.asarray(list(p), dtype=complex)


def _polyval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    n = len(coeffs) - 1
    if n == 1:
        return np.array([-coeffs[0] / coeffs[1]])
    if n == 2:
        c, b, a = coeffs
        disc = cmath.sqrt(b * b - 4 * a * c)
        if (b.conjugate() * disc).real < 0:
            disc = -disc
        q = -0.5 * (b + disc)
        r1 = q / a
        r2 = (c / q) if q != 0 else (-b / a - r1)
        return np.array([r1, r2])
    return np.roots(coeffs[::-1])


def _aberth_polish(coeffs: np.ndarray, z: np.ndarray, tol: float, sweeps: int = 8):
    """Aberth-Ehrlich simultaneous correction sweeps from the given start."""
    n = len(z)
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))
    converged = False
    for _ in range(sweeps):
        pv = _polyval(coeffs, z)
        dv = _polyval(dcoeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dv != 0, pv / np.where(dv != 0, dv, 1.0), 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = (1.0 / diff).sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, ratio)
        z = z - w
        if np.all(np.abs(w) <= tol * np.maximum(1.0, np.abs(z))):
            converged = True
            break
    return z, converged


def _solve_all(coeffs: np.ndarray, tol: float) -> np.ndarray:
    """All roots of a complex polynomial, refined; raises on hard failure."""
    c = np.asarray(coeffs, dtype=complex)
    if len(c) < 2:
        raise ValueError("degree must be at least 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    scale = np.max(np.abs(c))
    c = c / scale
    z0 = _companion_roots(c)
    z, _ = _aberth_polish(c, z0, tol)
    pv = np.abs(_polyval(c, z))
    ref = np.array([np.abs(c) @ np.maximum(1.0, np.abs(v)) ** np.arange(len(c)) for v in z])
    bad = pv > 1e-6 * ref
    if np.any(bad):
        z2, ok = _aberth_polish(c, z, tol, sweeps=60)
        pv2 = np.abs(_polyval(c, z2))
        if not ok and np.any(pv2 > 1e-6 * ref):
            raise RootFindingError(
                "root refinement did not converge", best=z2, residuals=pv2
            )
        z = z2
    order = np.lexsort((z.imag.round(10), z.real.round(10)))
    return z[order]


def _residual(coeffs: np.ndarray, v: complex) -> float:
    powers = np.maximum(1.0, abs(v)) ** np.arange(len(coeffs))
    scale = float(np.abs(coeffs) @ powers)
    return abs(complex(_polyval(coeffs, np.array([v]))[0])) / (scale if scale else 1.0)


def _cluster(values, radius):
    """Greedy clustering of complex values; returns list of lists."""
    groups = []
    for v in values:
        for g in groups:
            if abs(v - g[0]) <= radius * max(1.0, abs(g[0])):
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def find_roots(p, tol: float = 1e-12) -> RootSet:
    """Roots with multiplicities and residuals.

    Accepts an IntPoly (exact multiplicity detection via the squarefree part)
    or any coefficient sequence, lowest degree first.  Deterministic for
    identical input and tol.
    """
    if isinstance(p, IntPoly):
        return _find_roots_exact(p, tol)
    coeffs = _as_coeff_array(p)
    if len(coeffs) < 2:
        raise ValueError("degree must be at least 1")
    z = _solve_all(coeffs, tol)
    groups = _cluster(list(z), 10 * tol)
    roots = []
    for g in groups:
        v = complex(np.mean(g))
        roots.append(Root(value=v, multiplicity=len(g), residual=_residual(coeffs, v)))
    roots.sort(key=lambda r: (round(r.value.real, 12), round(r.value.imag, 12)))
    return RootSet(tuple(roots))


def _find_roots_exact(p: IntPoly, tol: float) -> RootSet:
    if p.is_zero:
        raise ValueError("zero polynomial")
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    body, k0 = p.shift_down()
    roots = []
    coeffs_f = _as_coeff_array(p)
    if k0:
        roots.append(Root(0.0 + 0.0j, k0, _residual(coeffs_f, 0.0)))
    if body.degree > 0:
        sf = squarefree_part(body)
        simple = _solve_all(_as_coeff_array(sf), tol)
        mult_total = k0
        body_arr = _as_coeff_array(body)
        for v in simple:
            m = _multiplicity_at(body_arr, complex(v))
            roots.append(Root(complex(v), m, _residual(coeffs_f, complex(v))))
            mult_total += m
        if mult_total != p.degree:
            # derivative screen disagreed with degree count; fall back to
            # cluster-based multiplicities on the full polynomial
            z = _solve_all(coeffs_f, tol)
            groups = _cluster(list(z), 1e-7)
            roots = [
                Root(complex(np.mean(g)), len(g), _residual(coeffs_f, complex(np.mean(g))))
                for g in groups
            ]
    roots.sort(key=lambda r: (round(r.value.real, 12), round(r.value.imag, 12)))
    return RootSet(tuple(roots))


def _multiplicity_at(coeffs: np.ndarray, v: complex) -> int:
    """Multiplicity of a (true) root v via scaled derivative magnitudes."""
    c = coeffs.copy()
    n = len(c) - 1
    for m in range(1, n + 1):
        c = c[1:] * np.arange(1, len(c))
        if len(c) == 0:
            return m
        powers = np.maximum(1.0, abs(v)) ** np.arange(len(c))
        scale = float(np.abs(c) @ powers) or 1.0
        if abs(complex(_polyval(c, np.array([v]))[0])) > 1e-6 * scale:
            return m
    return n


# ---------------------------------------------------------------------------
# exact polynomial algebra over Z[x]
# ---------------------------------------------------------------------------


def _prem(A, B):
    """Pseudo-remainder lb^(dA-dB+1) * A mod B over Z[z]."""
    dA, dB = A.degree, B.degree
    if dA < dB:
        return A
    lb = B.lead
    R = A
    for k in range(dA - dB, -1, -1):
        t = R.coeffs[k + dB] if k + dB <= R.degree else 0
        R = R * lb
        if t:
            shift = IntPoly(tuple([0] * k + list(B.coeffs)))
            R = R - shift * t
    return R


def int_poly_gcd(a: IntPoly, b: IntPoly) -> IntPoly:
    """Primitive gcd in Z[x] via the subresultant remainder sequence."""
    if a.is_zero:
        return b.primitive()
    if b.is_zero:
        return a.primitive()
    A, B = a.primitive(), b.primitive()
    if A.degree < B.degree:
        A, B = B, A
    g, h = 1, 1
    while True:
        delta = A.degree - B.degree
        R = _prem(A, B)
        if R.is_zero:
            res = B.primitive()
            if res.lead < 0:
                res = -res
            return res
        if R.degree == 0:
            return IntPoly((1,))
        A, B = B, IntPoly(tuple(c // (g * h**delta) for c in R.coeffs))
        g = A.lead
        h = (h ** (1 - delta)) * (g**delta) if delta <= 1 else (g**delta) // (h ** (delta - 1))


def squarefree_part(p: IntPoly) -> IntPoly:
    """p / gcd(p, p'), primitive, exact."""
    body, k = p.shift_down()
    if body.degree == 0:
        return IntPoly((0, 1)) if k else IntPoly((1,))
    g = int_poly_gcd(body, body.derivative())
    q = body.primitive().divmod_exact(g)
    assert q is not None, "squarefree division must be exact"
    out = q.primitive()
    if k:
        out = out * IntPoly((0, 1))
    if out.lead < 0:
        out = -out
    return out


# -- bivariate resultants ---------------------------------------------------


class _XPoly:
    """Thin wrapper: polynomial in y whose coefficients are IntPoly in x."""

    __slots__ = ("cs",)

    def __init__(self, cs):
        cs = list(cs)
        while len(cs) > 1 and cs[-1].is_zero:
            cs.pop()
        self.cs = cs

    @property
    def degree(self):
        return len(self.cs) - 1

    @property
    def is_zero(self):
        return len(self.cs) == 1 and self.cs[0].is_zero

    @property
    def lead(self) -> IntPoly:
        return self.cs[-1]

    def scale(self, f: IntPoly) -> "_XPoly":
        return _XPoly([c * f for c in self.cs])

    def sub_shifted(self, other: "_XPoly", f: IntPoly, k: int) -> "_XPoly":
        out = list(self.cs)
        for j, c in enumerate(other.cs):
            idx = j + k
            while idx >= len(out):
                out.append(IntPoly((0,)))
            out[idx] = out[idx] - c * f
        return _XPoly(out)

    def div_exact(self, f: IntPoly) -> "_XPoly":
        out = []
        for c in self.cs:
            q = c.divmod_exact(f)
            assert q is not None, "subresultant division must be exact"
            out.append(q)
        return _XPoly(out)


def _xprem(A: _XPoly, B: _XPoly) -> _XPoly:
    dA, dB = A.degree, B.degree
    lb = B.lead
    R = A
    for k in range(dA - dB, -1, -1):
        t = R.cs[k + dB] if k + dB <= R.degree else IntPoly((0,))
        R = R.scale(lb)
        if not t.is_zero:
            R = R.sub_shifted(B, t, k)
    return R


def _intpoly_pow(f: IntPoly, e: int) -> IntPoly:
    out = IntPoly((1,))
    for _ in range(e):
        out = out * f
    return out


def _intpoly_pow_div(g: IntPoly, eg: int, h: IntPoly, eh: int) -> IntPoly:
    """g^eg / h^eh, exact in Z[x]."""
    num = _intpoly_pow(g, eg)
    if eh == 0:
        return num
    q = num.divmod_exact(_intpoly_pow(h, eh))
    assert q is not None, "subresultant h-power division must be exact"
    return q


def resultant_y(p: BiPoly, q: BiPoly) -> IntPoly:
    """Exact resultant with respect to y, a polynomial in x.

    Fraction-free subresultant elimination over Z[x].  A zero result is the
    distinguished signal that p and q share a factor (e.g. the reciprocal
    polynomial case).
    """
    A = _XPoly(p.y_coefficients())
    B = _XPoly(q.y_coefficients())
    if A.degree < 1 or B.degree < 1:
        raise ValueError("both polynomials must have positive degree in y")
    sign = 1
    if A.degree < B.degree:
        if (A.degree * B.degree) % 2:
            sign = -sign
        A, B = B, A
    g = IntPoly((1,))
    h = IntPoly((1,))
    while True:
        delta = A.degree - B.degree
        if (A.degree % 2) and (B.degree % 2):
            sign = -sign
        R = _xprem(A, B)
        if R.is_zero:
            return IntPoly((0,))
        A, B = B, R.div_exact(g * _intpoly_pow(h, delta))
        g = A.lead
        h = _intpoly_pow_div(g, delta, h, delta - 1) if delta >= 1 else h
        if B.degree == 0:
            # resultant = sign * h^(1-degA) * lead(B)^degA, exact in Z[x]
            dA = A.degree
            res = _intpoly_pow_div(B.cs[0], dA, h, dA - 1) if dA >= 1 else B.cs[0]
            return res * sign


def resultant_x(p: BiPoly, q: BiPoly) -> IntPoly:
    """Exact resultant with respect to x, a polynomial in y."""
    return resultant_y(p.swap_xy(), q.swap_xy())


# ---------------------------------------------------------------------------
# roots of unity
# ---------------------------------------------------------------------------


def is_root_of_unity(z: complex, max_order: int = 360):
    """Smallest n <= max_order with z^n ~ 1, or None.

    Requires the modulus to be within 1e-10 of 1 and |z^n - 1| < 1e-9.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return None
    if abs(abs(z) - 1.0) >= 1e-10:
        return None
    theta = cmath.phase(z) / (2 * math.pi)
    for n in range(1, max_order + 1):
        k = round(theta * n)
        if abs(theta * n - k) < 1e-9 * max(1, n) and abs(z**n - 1) < 1e-9:
            return n
    return None


def unit_snap(z: complex, max_order: int = 360) -> complex:
    """Snap z to the exact root of unity it approximates, if any."""
    n = is_root_of_unity(z, max_order)
    if n is None:
        return z
    k = round(cmath.phase(z) / (2 * math.pi) * n) % n
    return cmath.exp(2j * math.pi * k / n)
