"""Numerical Mahler measure by three routes.

mahler_1var      exact one-variable Jensen evaluation from the root finder
mahler_jensen1d  one-dimensional circle integral of sum log+ |rho_k(e^{i phi})|
                 with panels split at every |rho|=1 crossing, pole and branch
                 angle (target ~1e-8 absolute, tighter on request)
mahler_quad2d    plain torus average with Richardson extrapolation; the
                 low-accuracy cross-check oracle
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .polyio import BiPoly, IntPoly, leading_coeff_y
from . import roots as _roots

__all__ = [
    "MeasureEstimate",
    "mahler_1var",
    "mahler_quad2d",
    "mahler_jensen1d",
]

TWO_PI = 2.0 * math.pi


@dataclass
class MeasureEstimate:
    value: float
    error_bound: float
    method: str
    detail: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# one variable: Jensen's formula
# ---------------------------------------------------------------------------


def mahler_1var(p) -> float:
    """log|lead| + sum of log+ |roots| for a one-variable polynomial."""
    if isinstance(p, IntPoly):
        if p.is_zero:
            raise ValueError("zero polynomial")
        if p.degree == 0:
            return math.log(abs(p.coeffs[0]))
        rs = _roots.find_roots(p)
        lead = float(p.lead)
    else:
        coeffs = list(p)
        while coeffs and abs(coeffs[-1]) == 0:
            coeffs.pop()
        if not coeffs:
            raise ValueError("zero polynomial")
        if len(coeffs) == 1:
            return math.log(abs(coeffs[0]))
        rs = _roots.find_roots(coeffs)
        lead = coeffs[-1]
    total = math.log(abs(lead))
    for r in rs.roots:
        a = abs(r.value)
        if a > 1.0:
            total += r.multiplicity * math.log(a)
    return total


# ---------------------------------------------------------------------------
# two-dimensional torus average (oracle)
# ---------------------------------------------------------------------------


def _grid_mean(p: BiPoly, n: int) -> float:
    phi = np.arange(n) * (TWO_PI / n)
    x = np.exp(1j * phi)
    y = np.exp(1j * phi)
    vals = np.zeros((n, n), dtype=complex)
    for (l, m), c in p.terms.items():
        vals += c * np.outer(x**l, y**m)
    mags = np.abs(vals)
    tiny = mags < 1e-300
    if np.any(tiny):
        # jitter singular sample points by half a step in phi
        xi, yi = np.nonzero(tiny)
        xs = np.exp(1j * (phi[xi] + math.pi / n))
        for t, (i, j) in enumerate(zip(xi, yi)):
            v = p.evaluate(xs[t], y[j])
            mags[i, j] = max(abs(v), 1e-300)
    return float(np.log(mags).mean())


def mahler_quad2d(p: BiPoly, level: int = 9, richardson_levels: int = 3) -> MeasureEstimate:
    """Torus average of log|P| on dyadic grids with Richardson extrapolation."""
    if level < 4:
        raise ValueError("level must be at least 4")
    sizes = [2 ** (level - k) for k in range(richardson_levels - 1, -1, -1)]
    means = [_grid_mean(p, n) for n in sizes]
    if len(means) == 1:
        return MeasureEstimate(means[0], abs(means[0]) * 1e-6 + 1e-9, "quad2d", {"sizes": sizes})
    extrap = [(4 * b - a) / 3 for a, b in zip(means, means[1:])]
    value = extrap[-1]
    spread = abs(extrap[-1] - extrap[-2]) if len(extrap) >= 2 else abs(means[-1] - means[-2])
    bound = max(2.0 * spread, 0.5 * abs(means[-1] - means[-2]), 1e-12)
    return MeasureEstimate(value, bound, "quad2d", {"sizes": sizes, "means": means})


# ---------------------------------------------------------------------------
# Jensen-reduced 1d quadrature
# ---------------------------------------------------------------------------


def _unit_circle_args(p: IntPoly) -> list:
    """Angles phi in [0, 2pi) with p(e^{i phi}) = 0, from the squarefree part."""
    if p.is_zero or p.degree < 1:
        return []
    sf = _roots.squarefree_part(p)
    if sf.degree < 1:
        return []
    out = []
    for r in _roots.find_roots(sf).roots:
        if abs(abs(r.value) - 1.0) < 1e-9:
            z = _roots.unit_snap(r.value)
            out.append(cmath.phase(z) % TWO_PI)
    return out


class _BranchModuli:
    """Sorted |y|-moduli of P(e^{i phi}, y) = 0 as functions of phi."""

    def __init__(self, p: BiPoly):
        self.rows = p.y_coefficients()
        self.d = len(self.rows) - 1

    def coeffs_at(self, phi: float):
        x = cmath.exp(1j * phi)
        return [row(x) for row in self.rows]

    def moduli_list(self, phi: float) -> list:
        c = self.coeffs_at(phi)
        scale = max(abs(v) for v in c)
        if scale == 0:
            return [math.nan] * self.d
        c = [v / scale for v in c]
        k_low = 0
        while k_low < len(c) - 1 and abs(c[k_low]) <= 1e-280:
            k_low += 1
        k_high = len(c) - 1
        while k_high > k_low and abs(c[k_high]) <= 1e-280:
            k_high -= 1
        vals = [0.0] * k_low + [math.inf] * (self.d - k_high)
        deg = k_high - k_low
        if deg == 1:
            vals.append(abs(c[k_low] / c[k_low + 1]))
        elif deg == 2:
            a2, a1, a0 = c[k_high], c[k_high - 1], c[k_low]
            disc = cmath.sqrt(a1 * a1 - 4 * a2 * a0)
            if (a1.conjugate() * disc).real < 0:
                disc = -disc
            q = -0.5 * (a1 + disc)
            r1 = q / a2
            r2 = (a0 / q) if q != 0 else -a1 / a2 - r1
            vals.extend((abs(r1), abs(r2)))
        elif deg >= 3:
            z = self.body_roots(phi, c, k_low, k_high)
            vals.extend(abs(v) for v in z)
        vals.sort()
        return vals

    def body_roots(self, phi: float, c, k_low: int, k_high: int) -> list:
        """Finite roots of the (k_low..k_high) coefficient body, mp-refined
        whenever a tight cluster makes double precision unreliable."""
        z = _roots._solve_all(np.array(c[k_low : k_high + 1]), 1e-12)
        if self._tight_cluster(z):
            return self._mp_roots(phi, k_low, k_high, z)
        return z.tolist()

    @staticmethod
    def _tight_cluster(z) -> bool:
        # double-precision root noise ~ eps/sep^(m-1) pollutes a cluster of m
        # roots once sep^m <~ eps; trigger with a x30 safety margin
        n = len(z)
        if n < 3:
            return False
        for i in range(n):
            scale = max(1.0, abs(z[i]))
            n4 = sum(1 for j in range(n) if abs(z[i] - z[j]) < 1e-3 * scale)
            if n4 >= 4:
                return True
            n3 = sum(1 for j in range(n) if abs(z[i] - z[j]) < 1e-4 * scale)
            if n3 >= 3:
                return True
        return False

    def _mp_roots(self, phi: float, k_low: int, k_high: int, seeds) -> list:
        import mpmath as mp

        with mp.workdps(40):
            x = mp.exp(1j * mp.mpf(phi))
            c = [self.rows[m](x) for m in range(k_low, k_high + 1)]
            lead = c[-1]
            c = [v / lead for v in c]
            dcf = [i * v for i, v in enumerate(c)][1:]
            z = [mp.mpc(v) for v in seeds]
            n = len(z)
            prev_worst = mp.inf
            for sweep in range(60):
                worst = mp.mpf(0)
                pv = [mp.polyval(c[::-1], zi) for zi in z]
                dv = [mp.polyval(dcf[::-1], zi) for zi in z]
                for i in range(n):
                    if dv[i] == 0:
                        continue
                    ratio = pv[i] / dv[i]
                    s = mp.mpc(0)
                    for j in range(n):
                        if j != i and z[i] != z[j]:
                            s += 1 / (z[i] - z[j])
                    denom = 1 - ratio * s
                    w = ratio / denom if denom != 0 else ratio
                    z[i] -= w
                    worst = max(worst, abs(w) / max(1, abs(z[i])))
                if worst < 1e-22:
                    break
                if sweep >= 6 and worst > 0.5 * prev_worst:
                    break  # stagnation at the cluster-radius floor
                prev_worst = worst
            return [complex(zi) for zi in z]

    def moduli(self, phi: float) -> np.ndarray:
        return np.array(self.moduli_list(phi))

    def integrand(self, phi: float) -> float:
        out = 0.0
        for v in self.moduli_list(phi):
            if v > 1.0 and math.isfinite(v):
                out += math.log(v)
            elif math.isinf(v):
                # a pole of the section; the integrable -log|lambda| spike is
                # realized through neighbouring nodes, never sampled exactly
                out += 700.0
        return out


def _crossing_angles_scan(bm: _BranchModuli, grid: int) -> list:
    """Sign-change and grazing angles of the sorted-modulus functions."""
    phis = np.arange(grid) * (TWO_PI / grid)
    tbl = np.array([bm.moduli(ph) for ph in phis])
    tbl = np.where(np.isfinite(tbl), tbl, 1e300)
    found = []
    d = tbl.shape[1]
    for j in range(d):
        g = tbl[:, j] - 1.0
        for i in range(grid):
            a, b = g[i], g[(i + 1) % grid]
            pa, pb = phis[i], phis[i] + TWO_PI / grid
            if a == 0.0:
                found.append(pa % TWO_PI)
            elif a * b < 0:
                lo, hi, glo = pa, pb, a
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    gm = bm.moduli(mid)[j] - 1.0
                    if gm == 0.0:
                        lo = hi = mid
                        break
                    if (gm > 0) == (glo > 0):
                        lo = mid
                    else:
                        hi = mid
                found.append((0.5 * (lo + hi)) % TWO_PI)
    return found


def _merge_angles(angles, tol: float = 1e-9) -> list:
    out = []
    for a in sorted(x % TWO_PI for x in angles):
        if not out or a - out[-1] > tol:
            out.append(a)
    if out and (TWO_PI - out[-1]) + out[0] <= tol:
        out.pop()
    return out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl_panel(f, a: float, b: float) -> float:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * sum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _adaptive(f, a: float, b: float, tol: float, depth: int, whole=None):
    if whole is None:
        whole = _gl_panel(f, a, b)
    mid = 0.5 * (a + b)
    left = _gl_panel(f, a, mid)
    right = _gl_panel(f, mid, b)
    err = abs(left + right - whole)
    floor = 2e-15 * (abs(left) + abs(right)) + 1e-16
    if err < max(tol, floor) or depth <= 0:
        return left + right, err
    lv, le = _adaptive(f, a, mid, tol / 2, depth - 1, left)
    rv, re = _adaptive(f, mid, b, tol / 2, depth - 1, right)
    return lv + rv, le + re


def _graded_end(f, a: float, b: float, toward_a: bool, verify: int = 4):
    """Integrate (a,b) with geometric slices accumulating toward one endpoint.

    Gauss nodes on a slice [s, 4s] away from an endpoint singularity converge
    geometrically regardless of the singularity type (t^alpha, log t), so no
    adaptivity is needed; the outermost slices are halved once as a check.
    The innermost ~1e-12 sliver is integrated crudely and accounted in the
    error term.
    """
    L = b - a
    total = 0.0
    err = 0.0
    levels = max(4, math.ceil(math.log(L / 1e-12, 4.0)))
    cuts = [L * 0.25**k for k in range(levels, -1, -1)]  # ascending, ends at L
    # truncation sliver next to the singular endpoint
    if toward_a:
        lo, hi = a, a + cuts[0]
    else:
        lo, hi = b - cuts[0], b
    v = _gl_panel(f, lo, hi)
    total += v
    err += abs(v) + 1e-15
    for k in range(len(cuts) - 1):
        if toward_a:
            lo, hi = a + cuts[k], a + cuts[k + 1]
        else:
            lo, hi = b - cuts[k + 1], b - cuts[k]
        v = _gl_panel(f, lo, hi)
        if k >= len(cuts) - 1 - verify:
            mid = 0.5 * (lo + hi)
            v2 = _gl_panel(f, lo, mid) + _gl_panel(f, mid, hi)
            err += abs(v2 - v)
            v = v2
        else:
            err += 2e-14 * abs(v)
        total += v
    return total, err


def _panel_integral(f, a: float, b: float, tol: float, depth: int):
    """Panel integral robust to endpoint singularities of any algebraic/log type."""
    L = b - a
    h = L * 2.0**-7
    lv, le = _graded_end(f, a, a + h, toward_a=True)
    rv, re = _graded_end(f, b - h, b, toward_a=False)
    mv, me = _adaptive(f, a + h, b - h, tol, depth)
    return lv + mv + rv, le + me + re


def critical_angles(p: BiPoly, grid: int = 1024) -> list:
    """Crossing, pole and branch angles of the section over |x| = 1."""
    angles = []
    lam = leading_coeff_y(p)
    angles += _unit_circle_args(lam)
    if p.deg_y >= 1:
        try:
            disc = _roots.resultant_y(p, p.partial_y())
            angles += _unit_circle_args(disc)
        except (ValueError, AssertionError):
            pass
        q = p.reciprocal_transform()
        if q.terms != p.terms and q.terms != (-p).terms:
            try:
                res = _roots.resultant_y(p, q)
                angles += _unit_circle_args(res)
            except (ValueError, AssertionError):
                pass
        angles += _crossing_angles_scan(_BranchModuli(p), grid)
    return _merge_angles(angles)


def mahler_jensen1d(
    p: BiPoly,
    tol: float = 1e-8,
    grid: int = 1024,
    max_depth: int = 42,
) -> MeasureEstimate:
    """m(lambda) + (2 pi)^{-1} integral of sum log+ |rho_k| over the circle."""
    if p.deg_y < 1:
        raise ValueError("polynomial must have positive degree in y")
    lam = leading_coeff_y(p)
    m_lambda = mahler_1var(lam)
    bm = _BranchModuli(p)
    breaks = critical_angles(p, grid=grid)
    if not breaks:
        breaks = [0.0]
    panels = []
    for i, a in enumerate(breaks):
        b = breaks[(i + 1) % len(breaks)]
        if i == len(breaks) - 1:
            b += TWO_PI
        if b - a > 1e-12:
            panels.append((a, b))
    total = 0.0
    err_total = 0.0
    for a, b in panels:
        v, e = _panel_integral(bm.integrand, a, b, tol * (b - a) / TWO_PI, max_depth)
        total += v
        err_total += e
    value = m_lambda + total / TWO_PI
    bound = err_total / TWO_PI + 5e-13 * max(1.0, abs(value)) + len(panels) * 1e-12
    return MeasureEstimate(value, bound, "jensen1d", {"panels": len(panels)})
