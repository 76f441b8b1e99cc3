"""Rational parametrization of conics, toric points, facing edges, admissibility.

Toric points (curve points with |x| = |y| = 1) are located by eliminating y
between P and its monomial-cleared reciprocal; exact cyclotomic arithmetic is
used to shift the polynomial to a toric point when its coordinates are roots
of unity, so facing-edge coefficients come out exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb, gcd

import numpy as np

from .polyio import BiPoly, IntPoly, convex_hull, cyclotomic_polynomial
from .zeta import FieldDescriptor
from . import roots as _roots

__all__ = [
    "RationalFunction",
    "ConicData",
    "ToricPoint",
    "FacingEdge",
    "ToricContinuumError",
    "ReducibleCurveError",
    "parametrize_deg2",
    "validate_parametrization",
    "toric_points",
    "facing_edge",
    "is_admissible",
    "AdmissibilityReport",
]


class ToricContinuumError(RuntimeError):
    """The curve meets the torus in a continuum (e.g. contains a torus circle)."""


class ReducibleCurveError(ValueError):
    """The polynomial factors over C, contrary to the irreducibility hypothesis."""


# ---------------------------------------------------------------------------
# rational functions in factored form
# ---------------------------------------------------------------------------


def _fmt20(x: float) -> str:
    return format(x, ".20g")


@dataclass(frozen=True)
class RationalFunction:
    """scalar * prod (t - root)^exponent with pairwise distinct roots."""

    scalar: complex
    factors: tuple

    def __post_init__(self):
        if self.scalar == 0:
            raise ValueError("scalar must be nonzero")
        merged: list = []
        for root, e in self.factors:
            root = complex(root)
            e = int(e)
            if e == 0:
                continue
            for i, (r0, e0) in enumerate(merged):
                if abs(root - r0) <= 1e-10 * max(1.0, abs(r0)):
                    merged[i] = (r0, e0 + e)
                    break
            else:
                merged.append((root, e))
        merged = [(r, e) for r, e in merged if e != 0]
        merged.sort(key=lambda fe: (round(fe[0].real, 10), round(fe[0].imag, 10)))
        object.__setattr__(self, "factors", tuple(merged))
        object.__setattr__(self, "scalar", complex(self.scalar))

    def __call__(self, t: complex) -> complex:
        from .dilog import INFINITY, is_infinite

        if is_infinite(t):
            d = sum(e for _, e in self.factors)
            if d > 0:
                return INFINITY
            if d < 0:
                return 0.0 + 0.0j
            return self.scalar
        num = self.scalar
        den = 1.0 + 0.0j
        for root, e in self.factors:
            base = t - root
            if e > 0:
                num *= base**e
            else:
                den *= base**-e
        if den == 0:
            return INFINITY
        return num / den

    def tilde(self, a: complex) -> complex:
        """Evaluate with any factor whose root equals a omitted."""
        out = self.scalar
        for root, e in self.factors:
            if abs(a - root) <= 1e-10 * max(1.0, abs(root)):
                continue
            out *= (a - root) ** e
        return out

    @property
    def zeros(self):
        return [(r, e) for r, e in self.factors if e > 0]

    @property
    def poles(self):
        return [(r, -e) for r, e in self.factors if e < 0]

    def numerator_coeffs(self) -> np.ndarray:
        out = np.array([self.scalar], dtype=complex)
        for root, e in self.factors:
            if e > 0:
                for _ in range(e):
                    out = np.convolve(out, np.array([-root, 1.0]))
        return out

    def denominator_coeffs(self) -> np.ndarray:
        out = np.array([1.0 + 0.0j])
        for root, e in self.factors:
            if e < 0:
                for _ in range(-e):
                    out = np.convolve(out, np.array([-root, 1.0]))
        return out

    def conjugate(self) -> "RationalFunction":
        return RationalFunction(
            self.scalar.conjugate(),
            tuple((r.conjugate(), e) for r, e in self.factors),
        )

    def degree_at_infinity(self) -> int:
        """deg(numerator) - deg(denominator)."""
        return sum(e for _, e in self.factors)

    def to_json_dict(self) -> dict:
        return {
            "scalar": [_fmt20(self.scalar.real), _fmt20(self.scalar.imag)],
            "factors": [
                {"root": [_fmt20(r.real), _fmt20(r.imag)], "exp": e}
                for r, e in self.factors
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RationalFunction":
        sc = complex(float(data["scalar"][0]), float(data["scalar"][1]))
        facs = [
            (complex(float(f["root"][0]), float(f["root"][1])), int(f["exp"]))
            for f in data["factors"]
        ]
        return cls(sc, tuple(facs))


# ---------------------------------------------------------------------------
# conic parametrization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConicData:
    a: int
    b: int
    c: int
    d: int
    e: int
    f: int
    disc: int  # b^2 - 4ac
    disc_x: int  # e^2 - 4cf
    disc_y: int  # d^2 - 4af
    kappa: complex
    degenerate_square: bool  # used the disc == 0 parametrization


def _conic_coefficients(p: BiPoly):
    if p.deg_x + p.deg_y == 0 or max(l + m for l, m in p.terms) != 2:
        raise ValueError("polynomial must have total degree 2")
    return (
        p.coeff(2, 0),
        p.coeff(1, 1),
        p.coeff(0, 2),
        p.coeff(1, 0),
        p.coeff(0, 1),
        p.coeff(0, 0),
    )


def _quad_roots_exact(a2: complex, a1: complex, a0: complex):
    """Stable quadratic roots of a2 t^2 + a1 t + a0."""
    disc = cmath.sqrt(a1 * a1 - 4 * a2 * a0)
    if (a1.conjugate() * disc).real < 0:
        disc = -disc
    q = -0.5 * (a1 + disc)
    r1 = q / a2
    r2 = (a0 / q) if q != 0 else -a1 / a2 - r1
    return r1, r2


def _isqrt_exact(n: int):
    r = math.isqrt(n)
    return r if r * r == n else None


def parametrize_deg2(p: BiPoly):
    """Parametrize an irreducible degree-two polynomial.

    Returns (f, g, ConicData) with f, g in factored RationalFunction form.
    Raises ReducibleCurveError when the conic factors over C.
    """
    a, b, c, d, e, f0 = _conic_coefficients(p)
    disc = b * b - 4 * a * c
    disc_x = e * e - 4 * c * f0
    disc_y = d * d - 4 * a * f0
    big_g = a * e * e + f0 * b * b + c * d * d - b * d * e - 4 * a * c * f0

    if c == 0 or a == 0:
        # linear in one variable: parametrize by the free coordinate
        swapped = c != 0 and a == 0
        if swapped:
            a, c = c, a
            d, e = e, d
            disc_x, disc_y = disc_y, disc_x
        # now c == 0: P = a x^2 + b x y + d x + e y + f, linear in y
        if b == 0 and e == 0:
            raise ReducibleCurveError("polynomial does not involve the second variable")
        # y = -(a t^2 + d t + f) / (b t + e)
        facs = []
        if a != 0:
            r1, r2 = _quad_roots_exact(a, d, f0)
            facs += [(r1, 1), (r2, 1)]
            sc = -a
        elif d != 0:
            facs += [(-f0 / d, 1)]
            sc = -d
        else:
            sc = -f0
            if f0 == 0:
                raise ReducibleCurveError("conic has a monomial factor")
        if b != 0:
            facs += [(-e / b, -1)]
            sc = sc / b
        else:
            sc = sc / e
        g = RationalFunction(sc, tuple(facs))
        f = RationalFunction(1.0, (((0.0 + 0.0j), 1),))
        if swapped:
            f, g = g, f
        data = ConicData(a, b, c, d, e, f0, disc, disc_x, disc_y, 0.0, False)
        return f, g, data

    if big_g == 0:
        raise ReducibleCurveError("degenerate conic: factors over C")

    if disc != 0:
        r1, r2 = _quad_roots_exact(1.0, complex(2 * c * d - b * e), complex(c * big_g))
        f = RationalFunction(1.0 / disc, ((r1, 1), (r2, 1), (0.0 + 0.0j, -1)))
        kap1, kap2 = _quad_roots_exact(complex(c), complex(b), complex(a))
        kappa = max(
            (kap1, kap2),
            key=lambda z: (round(z.imag, 12), round(abs(z), 12), round(z.real, 12)),
        )
        # g = (kappa^2 t^2 + (2ae-bd) kappa t + a G) / (disc * kappa * t)
        s1, s2 = _quad_roots_exact(
            kappa * kappa, complex(2 * a * e - b * d) * kappa, complex(a * big_g)
        )
        g = RationalFunction(kappa / disc, ((s1, 1), (s2, 1), (0.0 + 0.0j, -1)))
        data = ConicData(a, b, c, d, e, f0, disc, disc_x, disc_y, kappa, False)
        return f, g, data

    # disc == 0: P = c'(a'x + b'y)^2 + dx + ey + f
    b1 = b // 2
    cp = gcd(gcd(abs(a), abs(b1)), abs(c))
    if a < 0 or (a == 0 and c < 0):
        cp = -cp
    ap = _isqrt_exact(a // cp) if a // cp >= 0 else None
    bp = _isqrt_exact(c // cp) if c // cp >= 0 else None
    if ap is None or bp is None:
        raise ReducibleCurveError("quadratic part is not proportional to a square")
    if ap and bp and cp * ap * bp != b1:
        bp = -bp
    dprime = cp * (ap * e - bp * d)
    if dprime == 0:
        raise ReducibleCurveError("degenerate conic: factors over C")
    # f = (b' t^2 + e t + b'c'f)/D', g = -(a' t^2 + d t + a'c'f)/D'
    if bp != 0:
        r1, r2 = _quad_roots_exact(complex(bp), complex(e), complex(bp * cp * f0))
        f = RationalFunction(bp / dprime, ((r1, 1), (r2, 1)))
    else:
        f = RationalFunction(e / dprime, ((complex(-bp * cp * f0) / e, 1),))
    if ap != 0:
        s1, s2 = _quad_roots_exact(complex(ap), complex(d), complex(ap * cp * f0))
        g = RationalFunction(-ap / dprime, ((s1, 1), (s2, 1)))
    else:
        g = RationalFunction(-d / dprime, ((complex(-ap * cp * f0) / d, 1),))
    data = ConicData(a, b, c, d, e, f0, disc, disc_x, disc_y, 0.0, True)
    return f, g, data


def validate_parametrization(
    p: BiPoly, f: RationalFunction, g: RationalFunction, trials: int = 200, seed: int = 7
) -> float:
    """Max scaled residual of P(f(t), g(t)) over random sample points."""
    from .dilog import is_infinite

    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    while count < trials:
        t = complex(rng.normal(), rng.normal()) * rng.choice([0.3, 1.0, 3.0])
        skip = any(abs(t - r) < 1e-6 for r, _ in f.factors) or any(
            abs(t - r) < 1e-6 for r, _ in g.factors
        )
        if skip:
            continue
        x, y = f(t), g(t)
        if is_infinite(x) or is_infinite(y) or abs(x) > 1e8 or abs(y) > 1e8:
            continue
        scale = sum(
            abs(cc) * max(1.0, abs(x)) ** l * max(1.0, abs(y)) ** m
            for (l, m), cc in p.terms.items()
        )
        worst = max(worst, abs(p.evaluate(x, y)) / scale)
        count += 1
    return worst


# ---------------------------------------------------------------------------
# toric points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FacingEdge:
    """Edge polynomial of the shifted curve facing the origin."""

    coeffs: tuple  # complex values, ascending powers
    texts: tuple  # exact provenance per coefficient
    start: tuple
    end: tuple
    int_coeffs: tuple | None  # ascending exact integers when integral

    def render(self) -> str:
        if self.int_coeffs is not None:
            return IntPoly(self.int_coeffs).render()
        return " + ".join(
            f"({t})*z^{k}" for k, t in enumerate(self.texts) if t != "0"
        )


@dataclass
class ToricPoint:
    mu: complex
    nu: complex
    singular: bool
    mu_order: int | None = None
    nu_order: int | None = None
    facing: FacingEdge | None = None
    field: FieldDescriptor | None = None

    def conj_pair(self):
        return (self.mu.conjugate(), self.nu.conjugate())


def _unit_roots_of(poly: IntPoly):
    """Unit-circle roots of an exact integer polynomial, snapped when cyclic."""
    sf = _roots.squarefree_part(poly)
    out = []
    if sf.degree < 1:
        return out
    for r in _roots.find_roots(sf).roots:
        if abs(abs(r.value) - 1.0) < 1e-9:
            out.append(_roots.unit_snap(r.value))
    return out


def _newton_refine(coeffs: np.ndarray, z0: complex, iters: int = 60) -> complex:
    dc = coeffs[1:] * np.arange(1, len(coeffs))
    z = z0
    for _ in range(iters):
        pv = complex(np.polynomial.polynomial.polyval(z, coeffs))
        dv = complex(np.polynomial.polynomial.polyval(z, dc))
        if dv == 0:
            break
        step = pv / dv
        z -= step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    return z


def _y_roots_clustered(p: BiPoly, x0: complex):
    """Roots of P(x0, y) with multiple-root clustering; (value, size) pairs.

    A cluster of m near-equal roots (radius ~ eps^(1/m)) is replaced by the
    nearby simple root of the (m-1)-st derivative, Newton-refined; for a true
    m-fold root this recovers the location to machine precision.
    """
    rows = p.y_coefficients()
    c = np.array([row(x0) for row in rows], dtype=complex)
    scale = np.max(np.abs(c))
    c = c / scale
    nz = np.nonzero(np.abs(c) > 1e-12)[0]
    k_low, k_high = nz[0], nz[-1]
    out = []
    if k_low > 0:
        out.append((0.0 + 0.0j, k_low))
    if k_high - k_low >= 1:
        body = c[k_low : k_high + 1]
        z = _roots._solve_all(body, 1e-12)
        groups = []
        for v in z:
            for grp in groups:
                if abs(v - grp[0]) <= 2e-3 * max(1.0, abs(grp[0])):
                    grp.append(v)
                    break
            else:
                groups.append([v])
        for grp in groups:
            center = complex(np.mean(grp))
            m = len(grp)
            if m > 1:
                dc = body.copy()
                for _ in range(m - 1):
                    dc = dc[1:] * np.arange(1, len(dc))
                center = _newton_refine(dc, center)
            out.append((center, m))
    return out


def _partials_small(p: BiPoly, mu: complex, nu: complex) -> bool:
    scale = p.coeff_scale()
    px = abs(p.partial_x().evaluate(mu, nu)) if p.deg_x > 0 else 0.0
    py = abs(p.partial_y().evaluate(mu, nu)) if p.deg_y > 0 else 0.0
    return px < 1e-8 * scale and py < 1e-8 * scale


def toric_points(p: BiPoly) -> list:
    """All curve points with |x| = |y| = 1, via exact elimination.

    Falls back to the numeric crossing scan for reciprocal polynomials (zero
    resultant).  Raises ToricContinuumError when the torus intersection is a
    continuum.
    """
    if p.deg_x == 0 and p.deg_y == 0:
        return []
    if p.deg_x == 0 or p.deg_y == 0:
        # a union of horizontal/vertical lines: continuum or nothing
        if p.deg_y == 0:
            poly = IntPoly(tuple(p.coeff(l, 0) for l in range(p.deg_x + 1)))
        else:
            poly = IntPoly(tuple(p.coeff(0, m) for m in range(p.deg_y + 1)))
        if any(abs(abs(r.value) - 1) < 1e-9 for r in _roots.find_roots(poly).roots):
            raise ToricContinuumError("curve contains a full torus circle")
        return []

    q = p.reciprocal_transform()
    use_scan = q.terms == p.terms or q.terms == (-p).terms
    xs = []
    if not use_scan:
        res = _roots.resultant_y(p, q)
        if res.is_zero:
            use_scan = True
        else:
            xs = _unit_roots_of(res)
    if use_scan:
        from .paths import toric_scan

        pts = toric_scan(p)
        xs = []
        for mu, _ in pts:
            mu = _roots.unit_snap(mu)
            if not any(abs(mu - x0) < 1e-9 for x0 in xs):
                xs.append(mu)

    found = []
    scale = p.coeff_scale()
    for mu in xs:
        for nu, mult in _y_roots_clustered(p, mu):
            if abs(abs(nu) - 1.0) > 1e-9:
                continue
            nu = _roots.unit_snap(nu)
            if abs(p.evaluate(mu, nu)) > 1e-9 * scale:
                continue
            if any(abs(mu - t.mu) < 1e-9 and abs(nu - t.nu) < 1e-9 for t in found):
                continue
            singular = mult > 1 or _partials_small(p, mu, nu)
            found.append(
                ToricPoint(
                    mu=mu,
                    nu=nu,
                    singular=singular,
                    mu_order=_roots.is_root_of_unity(mu),
                    nu_order=_roots.is_root_of_unity(nu),
                )
            )
    found.sort(key=lambda t: (round(cmath.phase(t.mu), 9), round(cmath.phase(t.nu), 9)))
    return found


# ---------------------------------------------------------------------------
# exact cyclotomic shifts and the facing edge
# ---------------------------------------------------------------------------


class _ZetaInt:
    """Element of Z[zeta_n] as an integer vector modulo z^n - 1."""

    __slots__ = ("n", "vec")

    def __init__(self, n: int, vec=None):
        self.n = n
        self.vec = [0] * n if vec is None else list(vec)

    def add_monomial(self, coeff: int, power: int):
        self.vec[power % self.n] += coeff

    def is_zero(self) -> bool:
        poly = IntPoly(tuple(self.vec))
        if poly.is_zero:
            return True
        rem = _intpoly_mod(poly, cyclotomic_polynomial(self.n))
        return rem.is_zero

    def complex_value(self) -> complex:
        z = cmath.exp(2j * math.pi / self.n)
        return sum(c * z**k for k, c in enumerate(self.vec) if c)

    def text(self) -> str:
        parts = []
        for k, c in enumerate(self.vec):
            if not c:
                continue
            if k == 0:
                parts.append(f"{c:+d}")
            else:
                parts.append(f"{c:+d}*zeta{self.n}^{k}")
        return "".join(parts).lstrip("+") or "0"


def _intpoly_mod(a: IntPoly, m: IntPoly) -> IntPoly:
    """Remainder of a by monic m over Z."""
    rem = list(a.coeffs)
    dm = m.degree
    for k in range(len(rem) - 1 - dm, -1, -1):
        f = rem[k + dm]
        if f:
            for j, c in enumerate(m.coeffs):
                rem[k + j] -= f * c
    return IntPoly(tuple(rem[:dm] if dm > 0 else (0,)))


def _shift_exact_cyclotomic(p: BiPoly, mu_ord: int, mu_k: int, nu_ord: int, nu_k: int):
    """Coefficient table of P(x + mu, y + nu) over Z[zeta_N], exact."""
    n_lcm = mu_ord * nu_ord // gcd(mu_ord, nu_ord)
    amu = mu_k * (n_lcm // mu_ord)
    anu = nu_k * (n_lcm // nu_ord)
    table: dict = {}
    for (l, m), c in p.terms.items():
        for j in range(l + 1):
            for k in range(m + 1):
                w = c * comb(l, j) * comb(m, k)
                power = amu * (l - j) + anu * (m - k)
                key = (j, k)
                if key not in table:
                    table[key] = _ZetaInt(n_lcm)
                table[key].add_monomial(w, power)
    return {k: v for k, v in table.items() if not v.is_zero()}


def _root_order_index(z: complex, order: int) -> int:
    return round(cmath.phase(z) / (2 * math.pi) * order) % order


def _facing_edges_of_support(support, origin=(0, 0)):
    """Hull edges whose supporting line separates the hull from the origin."""
    hull = convex_hull(list(support))
    if len(hull) == 1:
        return []
    if len(hull) == 2:
        a, b = hull
        cr = (b[0] - a[0]) * (origin[1] - a[1]) - (b[1] - a[1]) * (origin[0] - a[0])
        return [(a, b)] if cr != 0 else []
    out = []
    for i, a in enumerate(hull):
        b = hull[(i + 1) % len(hull)]
        cr = (b[0] - a[0]) * (origin[1] - a[1]) - (b[1] - a[1]) * (origin[0] - a[0])
        if cr < 0:  # origin strictly right of the CCW edge: edge faces it
            out.append((a, b))
    return out


def _rational_reconstruct(x: float, max_den: int = 60):
    """Best fraction p/q with q <= max_den, or None."""
    from fractions import Fraction

    fr = Fraction(x).limit_denominator(max_den)
    if abs(float(fr) - x) < 1e-9 * max(1.0, abs(x)):
        return fr
    return None


def _field_from_quadratic(p2, p1, p0) -> FieldDescriptor | None:
    """Field of the roots of p2 z^2 + p1 z + p0 with rational coefficients."""
    from fractions import Fraction

    disc = Fraction(p1) ** 2 - 4 * Fraction(p2) * Fraction(p0)
    if disc >= 0:
        return FieldDescriptor.rationals()
    val = -disc
    d = _squarefree_int(val.numerator * val.denominator)
    return FieldDescriptor.imaginary_quadratic(d)


def _squarefree_int(n: int) -> int:
    n = abs(n)
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            cnt = 0
            while n % d == 0:
                n //= d
                cnt += 1
            if cnt % 2:
                out *= d
        d += 1
    return out * n


def _infer_field(edge_coeffs_complex, mu: complex, nu: complex) -> FieldDescriptor:
    """Heuristic-but-verified field of the edge roots together with mu, nu."""
    mu_ord = _roots.is_root_of_unity(mu)
    nu_ord = _roots.is_root_of_unity(nu)
    root_vals = []
    deg = len(edge_coeffs_complex) - 1
    if deg >= 1:
        rs = _roots.find_roots(list(edge_coeffs_complex))
        root_vals = [r.value for r in rs.roots]
    # rational roots generate nothing; drop them before classifying
    root_vals = [
        v
        for v in root_vals
        if not (abs(v.imag) < 1e-9 and _rational_reconstruct(v.real) is not None)
    ]
    all_unity = True
    orders = []
    for v in root_vals:
        n = _roots.is_root_of_unity(v)
        if n is None:
            all_unity = False
            break
        orders.append(n)
    if all_unity and mu_ord and nu_ord:
        n_all = 1
        for n in orders + [mu_ord, nu_ord]:
            n_all = n_all * n // gcd(n_all, n)
        return FieldDescriptor.cyclotomic(n_all)
    # non-cyclotomic: try an exact rational quadratic for the edge
    if mu_ord in (1, 2) and nu_ord in (1, 2) and deg == 2:
        cs = []
        ok = True
        for c in edge_coeffs_complex:
            if abs(c.imag) > 1e-9:
                ok = False
                break
            fr = _rational_reconstruct(c.real)
            if fr is None:
                ok = False
                break
            cs.append(fr)
        if ok:
            fd = _field_from_quadratic(cs[2], cs[1], cs[0])
            if fd is not None:
                return fd
    # single non-unity quadratic generator: fit z^2 + pz + q from real/imag parts
    if len(root_vals) == 2 and abs(root_vals[0].conjugate() - root_vals[1]) < 1e-8:
        z = root_vals[0]
        pr = _rational_reconstruct(-2 * z.real)
        qr = _rational_reconstruct(abs(z) ** 2)
        if pr is not None and qr is not None:
            resid = abs(z * z + complex(pr) * z + complex(qr))
            if resid < 1e-8:
                fd = _field_from_quadratic(1, pr, qr)
                if fd is not None and fd.kind != "rationals":
                    return fd
    label = "Q(" + ", ".join(f"{v:.6g}" for v in root_vals[:3]) + ", mu, nu)"
    return FieldDescriptor.general(label)


def facing_edge(p: BiPoly, pt: ToricPoint):
    """Edge polynomial of P(x+mu, y+nu) facing the origin, and its field.

    The edge is read from the larger-x endpoint with descending powers.
    Raises ValueError when several edges face the origin (the well-behaved
    singular-point assumption is violated).
    """
    mu, nu = pt.mu, pt.nu
    exact = pt.mu_order is not None and pt.nu_order is not None and (
        pt.mu_order * pt.nu_order // gcd(pt.mu_order, pt.nu_order) <= 120
    )
    if exact:
        table = _shift_exact_cyclotomic(
            p, pt.mu_order, _root_order_index(mu, pt.mu_order),
            pt.nu_order, _root_order_index(nu, pt.nu_order),
        )
        support = sorted(table)
        get_complex = lambda key: table[key].complex_value()
        get_text = lambda key: table[key].text()
        n_ord = next(iter(table.values())).n if table else 1
        all_int = n_ord <= 2  # Z[zeta_1] = Z[zeta_2] = Z

        def get_int(key):
            zi = table[key]
            if zi.n == 1:
                return zi.vec[0]
            return zi.vec[0] - zi.vec[1]

    else:
        raw = p.shift_numeric(mu, nu)
        cleanup = 1e-9 * p.coeff_scale()
        table = {k: v for k, v in raw.items() if abs(v) > cleanup}
        support = sorted(table)
        get_complex = lambda key: table[key]
        get_text = lambda key: f"{table[key]:.12g}"
        all_int = False
        get_int = None

    if (0, 0) in support:
        raise ValueError("the point is not on the curve (constant term present)")
    edges = _facing_edges_of_support(support)
    if len(edges) == 0:
        raise ValueError("no edge faces the origin")
    if len(edges) > 1:
        raise ValueError(
            f"multiple edges face the origin at ({mu:.4g},{nu:.4g}): "
            + ", ".join(f"{a}->{b}" for a, b in edges)
        )
    (a, b) = edges[0]
    if a[0] < b[0]:
        a, b = b, a  # start from the larger-x endpoint
    dx, dy = b[0] - a[0], b[1] - a[1]
    g = gcd(abs(dx), abs(dy))
    step = (dx // g, dy // g)
    coeffs = []
    texts = []
    ints = []
    for k in range(g + 1):
        key = (a[0] + k * step[0], a[1] + k * step[1])
        if key in table:
            coeffs.append(get_complex(key))
            texts.append(get_text(key))
            if all_int:
                ints.append(get_int(key))
        else:
            coeffs.append(0.0 + 0.0j)
            texts.append("0")
            if all_int:
                ints.append(0)
    # stored ascending: coefficient of z^j multiplies lattice point a + (g-j)*step
    coeffs.reverse()
    texts.reverse()
    ints.reverse()
    fe = FacingEdge(
        coeffs=tuple(coeffs),
        texts=tuple(texts),
        start=a,
        end=b,
        int_coeffs=tuple(ints) if all_int else None,
    )
    fd = _infer_field(fe.coeffs, mu, nu)
    pt.facing = fe
    pt.field = fd
    return fe, fd


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointVerdict:
    point: ToricPoint
    commensurate: bool
    relation: tuple | None  # (l, m) with mu^l = nu^m when found
    singular_ok: bool
    note: str


@dataclass(frozen=True)
class AdmissibilityReport:
    tempered: bool
    points: tuple
    admissible: bool


def _commensurate(pt: ToricPoint):
    if pt.mu_order is not None and pt.nu_order is not None:
        return True, (pt.mu_order, pt.nu_order)
    from .relations import pslq

    arg_mu = cmath.phase(pt.mu)
    arg_nu = cmath.phase(pt.nu)
    result = pslq([arg_mu, arg_nu, 2 * math.pi], max_coeff=64, digits=15)
    if result.confidence == "detected" and result.coefficients is not None:
        l, m, _ = result.coefficients
        if (l, m) != (0, 0):
            return True, (l, -m)
    return False, None


def _edge_irreducible_over_q(ints: tuple) -> bool:
    """Cheap irreducibility screen for an integer edge polynomial."""
    poly = IntPoly(ints).primitive()
    deg = poly.degree
    if deg <= 1:
        return True
    # rational root test
    a0, an = abs(poly.coeffs[0]), abs(poly.lead)
    for pdiv in range(1, a0 + 1):
        if a0 % pdiv:
            continue
        for qdiv in range(1, an + 1):
            if an % qdiv:
                continue
            for s in (1, -1):
                num = sum(
                    c * (s * pdiv) ** i * qdiv ** (deg - i)
                    for i, c in enumerate(poly.coeffs)
                )
                if num == 0:
                    return False
    if deg == 2:
        disc = poly.coeffs[1] ** 2 - 4 * poly.coeffs[2] * poly.coeffs[0]
        return _isqrt_exact(disc) is None if disc >= 0 else True
    if deg == 3:
        return True  # no rational root => irreducible for cubics
    # quartic+: accept cyclotomic polynomials, else assume (flagged in note)
    for n in range(1, 121):
        cyc = cyclotomic_polynomial(n)
        if cyc.degree == deg and (poly == cyc or poly == -cyc):
            return True
    return True


def is_admissible(p: BiPoly) -> AdmissibilityReport:
    """Tempered + commensurate toric coordinates + well-behaved singular points."""
    from .polyio import is_tempered

    temper = is_tempered(p)
    pts = toric_points(p)
    verdicts = []
    ok = temper.tempered
    for pt in pts:
        comm, rel = _commensurate(pt)
        singular_ok = True
        note = ""
        if pt.singular:
            try:
                fe, _ = facing_edge(p, pt)
                if fe.int_coeffs is not None:
                    sf = _roots.squarefree_part(IntPoly(fe.int_coeffs))
                    if sf.degree != len(fe.coeffs) - 1:
                        singular_ok = False
                        note = "facing edge has repeated roots"
                    elif not _edge_irreducible_over_q(fe.int_coeffs):
                        singular_ok = False
                        note = "facing edge reducible over Q"
                else:
                    note = "facing edge has non-rational coefficients; irreducibility assumed"
            except ValueError as exc:
                singular_ok = False
                note = str(exc)
        if not comm:
            note = (note + "; " if note else "") + "coordinates not commensurate"
        verdicts.append(PointVerdict(pt, comm, rel, singular_ok, note))
        ok = ok and comm and singular_ok
    return AdmissibilityReport(tempered=temper.tempered, points=tuple(verdicts), admissible=ok)
