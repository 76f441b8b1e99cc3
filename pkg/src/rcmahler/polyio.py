"""Integer bivariate polynomials: parsing, Newton polygons, edge polynomials.

The central object is :class:`BiPoly`, a sparse exponent->coefficient table
over exact Python integers.  Everything here is exact; no floating point is
used except in explicit numeric evaluation helpers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

__all__ = [
    "ParseError",
    "BiPoly",
    "IntPoly",
    "EdgeData",
    "NewtonPolygon",
    "EdgeVerdict",
    "TemperReport",
    "parse_poly",
    "newton_polygon",
    "edge_polynomials",
    "is_tempered",
    "leading_coeff_y",
    "cyclotomic_polynomial",
]


class ParseError(ValueError):
    """Syntax error in polynomial text, with the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


# ---------------------------------------------------------------------------
# Univariate integer polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntPoly:
    """Univariate integer polynomial, coefficients lowest degree first."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(int(v) for v in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        if not c:
            c = (0,)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    @property
    def lead(self) -> int:
        return self.coeffs[-1]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly(tuple(out))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly(tuple(c * other for c in self.coeffs))
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(tuple(out))

    __rmul__ = __mul__

    def derivative(self) -> "IntPoly":
        if self.degree == 0:
            return IntPoly((0,))
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, abs(c))
        return g if g else 1

    def primitive(self) -> "IntPoly":
        g = self.content()
        return IntPoly(tuple(c // g for c in self.coeffs))

    def shift_down(self) -> tuple["IntPoly", int]:
        """Factor out the largest power of the variable; return (poly, power)."""
        k = 0
        c = self.coeffs
        while k < len(c) - 1 and c[k] == 0:
            k += 1
        return IntPoly(c[k:]), k

    def divmod_exact(self, other: "IntPoly"):
        """Exact division in Z[z]; returns quotient or None if not exact."""
        if other.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        dq = self.degree - other.degree
        if dq < 0:
            return None if not self.is_zero else IntPoly((0,))
        q = [0] * (dq + 1)
        ob = other.coeffs
        for k in range(dq, -1, -1):
            num = rem[k + other.degree]
            if num % ob[-1]:
                return None
            f = num // ob[-1]
            q[k] = f
            if f:
                for j, b in enumerate(ob):
                    rem[k + j] -= f * b
        if any(rem):
            return None
        return IntPoly(tuple(q))

    def reversed(self) -> "IntPoly":
        return IntPoly(tuple(reversed(self.coeffs)))

    def render(self, var: str = "z") -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                head = "" if mag == 1 else f"{mag}*"
                body = f"{head}{var}" + (f"^{i}" if i > 1 else "")
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> IntPoly:
    """The n-th cyclotomic polynomial, by exact recursive division."""
    if n < 1:
        raise ValueError("order must be positive")
    if n == 1:
        return IntPoly((-1, 1))
    num = IntPoly(tuple([-1] + [0] * (n - 1) + [1]))  # z^n - 1
    for d in range(1, n):
        if n % d == 0:
            q = num.divmod_exact(cyclotomic_polynomial(d))
            assert q is not None
            num = q
    return num


# ---------------------------------------------------------------------------
# BiPoly
# ---------------------------------------------------------------------------


class BiPoly:
    """Sparse bivariate integer polynomial, exponent pair (l, m) -> coefficient.

    Instances are immutable by convention; all operations return new objects.
    """

    __slots__ = ("terms",)

    def __init__(self, terms):
        clean = {}
        for (l, m), c in dict(terms).items():
            c = int(c)
            if c == 0:
                continue
            l, m = int(l), int(m)
            if l < 0 or m < 0:
                raise ValueError("negative exponent in BiPoly")
            clean[(l, m)] = c
        if not clean:
            raise ValueError("zero polynomial")
        self.terms = clean

    # -- basic protocol ----------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"BiPoly({self.render()!r})"

    # -- structure ---------------------------------------------------------

    @property
    def deg_x(self) -> int:
        return max(l for l, _ in self.terms)

    @property
    def deg_y(self) -> int:
        return max(m for _, m in self.terms)

    @property
    def support(self):
        return sorted(self.terms)

    def coeff(self, l: int, m: int) -> int:
        return self.terms.get((l, m), 0)

    def content(self) -> int:
        g = 0
        for c in self.terms.values():
            g = gcd(g, abs(c))
        return g

    # -- arithmetic ----------------------------------------------------------

    def __neg__(self):
        return BiPoly({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BiPoly(out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return BiPoly({k: c * other for k, c in self.terms.items()})
        out = {}
        for (l1, m1), c1 in self.terms.items():
            for (l2, m2), c2 in other.terms.items():
                k = (l1 + l2, m1 + m2)
                out[k] = out.get(k, 0) + c1 * c2
        return BiPoly(out)

    __rmul__ = __mul__

    # -- calculus / transforms ----------------------------------------------

    def partial_x(self) -> "BiPoly":
        return BiPoly({(l - 1, m): l * c for (l, m), c in self.terms.items() if l > 0})

    def partial_y(self) -> "BiPoly":
        return BiPoly({(l, m - 1): m * c for (l, m), c in self.terms.items() if m > 0})

    def swap_xy(self) -> "BiPoly":
        return BiPoly({(m, l): c for (l, m), c in self.terms.items()})

    def reciprocal_transform(self) -> "BiPoly":
        """x^dx * y^dy * P(1/x, 1/y), the monomial-cleared reciprocal."""
        dx, dy = self.deg_x, self.deg_y
        return BiPoly({(dx - l, dy - m): c for (l, m), c in self.terms.items()})

    def mul_monomial(self, a: int, b: int) -> "BiPoly":
        return BiPoly({(l + a, m + b): c for (l, m), c in self.terms.items()})

    def y_coefficients(self):
        """Coefficients as a polynomial in y: list of IntPoly in x, ascending."""
        rows = [[0] * (self.deg_x + 1) for _ in range(self.deg_y + 1)]
        for (l, m), c in self.terms.items():
            rows[m][l] = c
        return [IntPoly(tuple(r)) for r in rows]

    def evaluate(self, x: complex, y: complex) -> complex:
        # Horner in y over Horner-in-x coefficient evaluations.
        acc = 0.0 + 0.0j
        for row in reversed(self.y_coefficients()):
            acc = acc * y + row(x)
        return acc

    def coeff_scale(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def shift_numeric(self, mu: complex, nu: complex) -> dict:
        """Exponent table of P(x+mu, y+nu) with complex coefficients.

        Exact only when mu, nu are exactly representable; callers needing exact
        shifts use the cyclotomic path in the curve module.
        """
        from math import comb

        out = {}
        for (l, m), c in self.terms.items():
            mu_pows = [mu**i for i in range(l + 1)]
            nu_pows = [nu**i for i in range(m + 1)]
            for j in range(l + 1):
                for k in range(m + 1):
                    w = c * comb(l, j) * comb(m, k) * mu_pows[l - j] * nu_pows[m - k]
                    key = (j, k)
                    out[key] = out.get(key, 0.0 + 0.0j) + w
        return out

    # -- rendering / JSON -----------------------------------------------------

    def render(self) -> str:
        parts = []
        for (l, m) in sorted(self.terms, key=lambda km: (km[0] + km[1], km[0], km[1])):
            c = self.terms[(l, m)]
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            factors = []
            if l:
                factors.append("x" + (f"^{l}" if l > 1 else ""))
            if m:
                factors.append("y" + (f"^{m}" if m > 1 else ""))
            if not factors:
                body = str(mag)
            else:
                head = [] if mag == 1 else [str(mag)]
                body = "*".join(head + factors)
            parts.append((sign, body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def to_json(self) -> str:
        items = [
            {"l": l, "m": m, "c": str(self.terms[(l, m)])}
            for (l, m) in sorted(self.terms)
        ]
        return json.dumps({"terms": items})

    @classmethod
    def from_json(cls, text: str) -> "BiPoly":
        data = json.loads(text)
        return cls({(int(t["l"]), int(t["m"])): int(t["c"]) for t in data["terms"]})


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([xy])|(\^)|(\+)|(-)|(\*)|(\()|(\)))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == m.start():
            stripped = text[pos:].lstrip()
            at = len(text) - len(stripped)
            ch = text[at] if at < len(text) else ""
            if ch == ".":
                raise ParseError("non-integer coefficient", at)
            if stripped:
                raise ParseError(f"unexpected character {ch!r}", at)
            break
        pos = m.end()
        kinds = ("int", "var", "pow", "plus", "minus", "mul", "lpar", "rpar")
        for kind, val in zip(kinds, m.groups()):
            if val is not None:
                tokens.append((kind, val, m.start(0) + (len(m.group(0)) - len(val))))
                break
    return tokens


class _Parser:
    """Recursive-descent parser for the polynomial grammar.

    poly   := term (("+"|"-") term)*
    term   := sign? integer? factor*
    factor := ("x"|"y") ("^" integer)? | "(" poly ")" ("^" integer)?
    with implicit multiplication between adjacent factors.
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> dict:
        result = self.parse_poly()
        kind, _, pos = self.peek()
        if kind is not None:
            raise ParseError("trailing input", pos)
        return result

    def parse_poly(self) -> dict:
        acc = self.parse_term(required=True)
        while True:
            kind, _, _ = self.peek()
            if kind == "plus":
                self.take()
                acc = _dadd(acc, self.parse_term(required=True))
            elif kind == "minus":
                self.take()
                acc = _dadd(acc, _dneg(self.parse_term(required=True)))
            else:
                return acc

    def parse_term(self, required: bool) -> dict:
        sign = 1
        while True:
            kind, _, _ = self.peek()
            if kind == "minus":
                self.take()
                sign = -sign
            elif kind == "plus":
                self.take()
            else:
                break
        kind, val, pos = self.peek()
        acc = None
        if kind == "int":
            self.take()
            acc = {(0, 0): int(val)}
        while True:
            kind, val, pos = self.peek()
            if kind == "var":
                self.take()
                e = self.parse_exponent()
                fac = {(e, 0) if val == "x" else (0, e): 1}
            elif kind == "lpar":
                self.take()
                inner = self.parse_poly()
                k2, _, p2 = self.peek()
                if k2 != "rpar":
                    raise ParseError("expected ')'", p2)
                self.take()
                e = self.parse_exponent()
                fac = _dpow(inner, e)
            elif kind == "mul":
                self.take()
                continue
            elif kind == "int":
                # implicit multiplication by a bare integer, e.g. "x2" is odd
                # but "2x" style already consumed; treat as error to be strict
                raise ParseError("unexpected integer (use '^' for exponents)", pos)
            else:
                break
            acc = fac if acc is None else _dmul(acc, fac)
        if acc is None:
            if not required:
                return {}
            raise ParseError("expected a term", pos)
        if sign < 0:
            acc = _dneg(acc)
        return acc

    def parse_exponent(self) -> int:
        kind, _, _ = self.peek()
        if kind != "pow":
            return 1
        self.take()
        k2, v2, p2 = self.peek()
        if k2 != "int":
            raise ParseError("expected integer exponent after '^'", p2)
        self.take()
        return int(v2)


def _dadd(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def _dneg(a: dict) -> dict:
    return {k: -c for k, c in a.items()}


def _dmul(a: dict, b: dict) -> dict:
    out = {}
    for (l1, m1), c1 in a.items():
        for (l2, m2), c2 in b.items():
            k = (l1 + l2, m1 + m2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: c for k, c in out.items() if c}


def _dpow(a: dict, e: int) -> dict:
    out = {(0, 0): 1}
    for _ in range(e):
        out = _dmul(out, a)
    return out


def parse_poly(text: str) -> BiPoly:
    """Parse expression text into a BiPoly; exact integer arithmetic throughout."""
    table = _Parser(text).parse()
    if not table:
        raise ParseError("zero polynomial", 0)
    return BiPoly(table)


# ---------------------------------------------------------------------------
# Newton polygon and edge polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeData:
    start: tuple
    end: tuple
    primitive_step: tuple
    edge_poly: IntPoly


@dataclass(frozen=True)
class NewtonPolygon:
    vertices: tuple
    edges: tuple


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Convex hull (strict vertices), counterclockwise from the lex-smallest."""
    pts = sorted(set(points))
    if len(pts) == 1:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2 and len(pts) >= 2:
        # collinear support: monotone chain collapses; keep the two extremes
        hull = [pts[0], pts[-1]]
    return hull


def _edge_poly(p: BiPoly, start, end) -> EdgeData:
    dx, dy = end[0] - start[0], end[1] - start[1]
    g = gcd(abs(dx), abs(dy))
    step = (dx // g, dy // g)
    # descending powers from the start: coeff of z^(g-k) sits at start + k*step
    coeffs = [0] * (g + 1)
    for k in range(g + 1):
        pt = (start[0] + k * step[0], start[1] + k * step[1])
        coeffs[g - k] = p.coeff(*pt)
    return EdgeData(start=start, end=end, primitive_step=step, edge_poly=IntPoly(tuple(coeffs)))


def newton_polygon(p: BiPoly) -> NewtonPolygon:
    hull = convex_hull(p.support)
    if len(hull) == 1:
        return NewtonPolygon(vertices=tuple(hull), edges=())
    if len(hull) == 2:
        a, b = hull
        return NewtonPolygon(
            vertices=tuple(hull),
            edges=(_edge_poly(p, a, b), _edge_poly(p, b, a)),
        )
    edges = []
    for i, a in enumerate(hull):
        b = hull[(i + 1) % len(hull)]
        edges.append(_edge_poly(p, a, b))
    return NewtonPolygon(vertices=tuple(hull), edges=tuple(edges))


def edge_polynomials(p: BiPoly):
    """EdgeData for each hull edge, counterclockwise."""
    return list(newton_polygon(p).edges)


def leading_coeff_y(p: BiPoly) -> IntPoly:
    """The coefficient of y^deg_y as a univariate integer polynomial in x."""
    d = p.deg_y
    coeffs = [0] * (p.deg_x + 1)
    for (l, m), c in p.terms.items():
        if m == d:
            coeffs[l] = c
    return IntPoly(tuple(coeffs))


# ---------------------------------------------------------------------------
# Temperedness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeVerdict:
    edge: EdgeData
    cyclotomic: bool
    witness_root: complex | None
    orders: tuple


@dataclass(frozen=True)
class TemperReport:
    tempered: bool
    edges: tuple


def _cyclotomic_split(poly: IntPoly):
    """Divide out cyclotomic factors; return (orders, leftover primitive poly).

    The input's integer content and z^k factors are stripped first (they do
    not affect the root-of-unity property).
    """
    from . import roots as _roots

    work, _ = poly.primitive().shift_down()
    orders = []
    while work.degree > 0:
        rs = _roots.find_roots(work, tol=1e-12)
        candidate = None
        for r in rs.roots:
            n = _roots.is_root_of_unity(r.value, 360)
            if n is not None:
                candidate = n
                break
        if candidate is None:
            return orders, work
        q = work.divmod_exact(cyclotomic_polynomial(candidate))
        if q is None:
            # numeric screen matched but exact division refutes it
            return orders, work
        orders.append(candidate)
        work = q.primitive()
    return orders, work


def is_tempered(p: BiPoly) -> TemperReport:
    """True iff every edge polynomial has only roots of unity as roots."""
    from . import roots as _roots

    verdicts = []
    ok = True
    for edge in edge_polynomials(p):
        orders, leftover = _cyclotomic_split(edge.edge_poly)
        if leftover.degree == 0:
            verdicts.append(EdgeVerdict(edge, True, None, tuple(orders)))
        else:
            rs = _roots.find_roots(leftover, tol=1e-12)
            witness = None
            for r in rs.roots:
                if _roots.is_root_of_unity(r.value, 360) is None:
                    witness = r.value
                    break
            if witness is None:
                witness = rs.roots[0].value
            verdicts.append(EdgeVerdict(edge, False, witness, tuple(orders)))
            ok = False
    return TemperReport(tempered=ok, edges=tuple(verdicts))
