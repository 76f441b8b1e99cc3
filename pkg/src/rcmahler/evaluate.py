"""Assembly of the parametric Mahler-measure formula.

parametric_measure combines the leading-coefficient term, the dilogarithm
terms attached to the oriented arc endpoints in the t-plane, and the
winding-angle log terms, into 2 pi m(P); the total is cross-checked against
the independent circle quadrature and a disagreement is a hard error by
default.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .polyio import BiPoly, leading_coeff_y
from .measure import mahler_1var, mahler_jensen1d, MeasureEstimate
from .dilog import bw_dilog, INFINITY, is_infinite
from .curve import RationalFunction, ToricPoint, toric_points, facing_edge, validate_parametrization
from .zeta import FieldDescriptor, borel_term
from . import paths as _paths

__all__ = [
    "DilogTerm",
    "WindingTerm",
    "MeasureBreakdown",
    "InconsistentMeasureError",
    "eval_tilde",
    "parametric_measure",
    "galois_average_check",
    "predict_basis",
    "formal_dilog_sum",
    "BasisEntry",
]

TWO_PI = 2.0 * math.pi


class InconsistentMeasureError(RuntimeError):
    """Formula total disagrees with the quadrature route beyond tolerance."""

    def __init__(self, message, breakdown=None):
        super().__init__(message)
        self.breakdown = breakdown


@dataclass(frozen=True)
class DilogTerm:
    segment: int
    r: int
    s: int
    coeff: int  # l_r * m_s
    endpoint_kind: str  # "initial" | "terminal"
    argument: complex
    value: float  # D(argument)

    @property
    def contribution(self) -> float:
        sign = 1.0 if self.endpoint_kind == "initial" else -1.0
        return sign * self.coeff * self.value


@dataclass(frozen=True)
class WindingTerm:
    segment: int
    kind: str  # "zero_pole_of_x" (alpha_r) | "zero_pole_of_y" (beta_s)
    index: int
    point: complex
    multiplicity: int
    log_abs: float  # log|gtilde(alpha)| or log|ftilde(beta)|
    wind: float | None
    contribution: float


@dataclass
class MeasureBreakdown:
    lambda_term: float  # 2 pi m(lambda)
    dilog_terms: list
    winding_terms: list
    total: float  # m(P)
    consistency: MeasureEstimate | None = None
    flags: list = field(default_factory=list)

    @property
    def two_pi_total(self) -> float:
        return TWO_PI * self.total

    def to_json_dict(self) -> dict:
        return {
            "lambda_term": self.lambda_term,
            "dilog_terms": [
                {
                    "j": t.segment,
                    "r": t.r,
                    "s": t.s,
                    "coeff": t.coeff,
                    "endpoint": t.endpoint_kind,
                    "arg": "inf" if is_infinite(t.argument) else [t.argument.real, t.argument.imag],
                    "value": t.value,
                }
                for t in self.dilog_terms
            ],
            "winding_terms": [
                {
                    "j": t.segment,
                    "kind": t.kind,
                    "index": t.index,
                    "point": [t.point.real, t.point.imag],
                    "multiplicity": t.multiplicity,
                    "log_abs": t.log_abs,
                    "wind": t.wind,
                    "contribution": t.contribution,
                }
                for t in self.winding_terms
            ],
            "total": self.total,
            "consistency": None
            if self.consistency is None
            else {"value": self.consistency.value, "error_bound": self.consistency.error_bound},
            "flags": list(self.flags),
        }


def eval_tilde(h: RationalFunction, a: complex) -> complex:
    """h(a) with any factor whose root equals a omitted beforehand."""
    return h.tilde(complex(a))


def _dilog_argument(e: complex, alpha: complex, beta: complex) -> complex:
    if is_infinite(e):
        return INFINITY
    return (e - alpha) / (beta - alpha)


def _segment_dilog_terms(j: int, seg, f: RationalFunction, g: RationalFunction):
    terms = []
    for r, (alpha, l_r) in enumerate(f.factors):
        for s, (beta, m_s) in enumerate(g.factors):
            if abs(alpha - beta) <= 1e-10 * max(1.0, abs(alpha)):
                continue  # primed sum: alpha_r = beta_s pairs are excluded
            for endpoint, kind in ((seg.u, "initial"), (seg.v, "terminal")):
                arg = _dilog_argument(endpoint, alpha, beta)
                terms.append(
                    DilogTerm(
                        segment=j,
                        r=r,
                        s=s,
                        coeff=l_r * m_s,
                        endpoint_kind=kind,
                        argument=arg,
                        value=bw_dilog(arg),
                    )
                )
    return terms


def _segment_winding_terms(j: int, seg, f: RationalFunction, g: RationalFunction):
    terms = []
    for r, (alpha, l_r) in enumerate(f.factors):
        log_abs = math.log(abs(eval_tilde(g, alpha)))
        if abs(log_abs) < 1e-14:
            terms.append(WindingTerm(j, "zero_pole_of_x", r, alpha, l_r, log_abs, None, 0.0))
            continue
        w = _paths.winding(seg, alpha)
        terms.append(
            WindingTerm(j, "zero_pole_of_x", r, alpha, l_r, log_abs, w, l_r * log_abs * w)
        )
    for s, (beta, m_s) in enumerate(g.factors):
        ft = abs(eval_tilde(f, beta))
        log_abs = math.log(ft)
        if abs(log_abs) < 1e-10:
            # |ftilde(beta)| = 1 (e.g. beta on the path): the term vanishes and
            # the possibly-singular winding need not be computed
            terms.append(WindingTerm(j, "zero_pole_of_y", s, beta, m_s, 0.0, None, 0.0))
            continue
        w = _paths.winding(seg, beta)
        terms.append(
            WindingTerm(j, "zero_pole_of_y", s, beta, m_s, log_abs, w, -m_s * log_abs * w)
        )
    return terms


def parametric_measure(
    p: BiPoly,
    f: RationalFunction,
    g: RationalFunction,
    *,
    toric: list | None = None,
    trace=None,
    validate: bool = True,
    strict: bool = True,
    check_tol: float = 1e-7,
    jensen_tol: float = 1e-8,
) -> MeasureBreakdown:
    """m(P) assembled from a parametrization, with full term provenance."""
    flags = []
    if validate:
        resid = validate_parametrization(p, f, g)
        if resid > 1e-9:
            raise ValueError(f"parametrization residual {resid:.2e} exceeds 1e-9")
    if toric is None:
        toric = toric_points(p)
    if trace is None:
        trace = _paths.trace_sections(p)
    arcs = _paths.extract_S(trace, toric)
    segments = [_paths.pullback(arc, f, g) for arc in arcs]

    lam = leading_coeff_y(p)
    lambda_term = TWO_PI * mahler_1var(lam)

    dilog_terms = []
    winding_terms = []
    for j, seg in enumerate(segments):
        if not seg.closed:
            dilog_terms.extend(_segment_dilog_terms(j, seg, f, g))
        else:
            flags.append(f"segment {j} closed: dilog terms cancel (u = v)")
        winding_terms.extend(_segment_winding_terms(j, seg, f, g))

    two_pi_m = (
        lambda_term
        + sum(t.contribution for t in dilog_terms)
        + sum(t.contribution for t in winding_terms)
    )
    total = two_pi_m / TWO_PI

    consistency = mahler_jensen1d(p, tol=jensen_tol)
    gap = abs(total - consistency.value)
    allowed = check_tol + consistency.error_bound
    breakdown = MeasureBreakdown(
        lambda_term=lambda_term,
        dilog_terms=dilog_terms,
        winding_terms=winding_terms,
        total=total,
        consistency=consistency,
        flags=flags,
    )
    if gap > allowed:
        msg = (
            f"formula total {total:.12f} disagrees with quadrature "
            f"{consistency.value:.12f} by {gap:.3e} (allowed {allowed:.3e})"
        )
        if strict:
            raise InconsistentMeasureError(msg, breakdown)
        breakdown.flags.append(msg)
    return breakdown


@dataclass
class GaloisCheckReport:
    totals: list
    max_spread: float
    agree: bool
    term_multisets: list


def galois_average_check(
    p: BiPoly,
    parametrizations: list,
    tol: float = 1e-9,
    **kwargs,
) -> GaloisCheckReport:
    """Run the formula for each conjugate parametrization; totals must agree."""
    toric = toric_points(p)
    trace = _paths.trace_sections(p)
    totals = []
    multisets = []
    for f, g in parametrizations:
        bd = parametric_measure(p, f, g, toric=toric, trace=trace, **kwargs)
        totals.append(bd.total)
        multisets.append(
            sorted(
                (round(t.contribution, 9), t.endpoint_kind) for t in bd.dilog_terms
            )
        )
    spread = max(totals) - min(totals) if totals else 0.0
    agree = spread <= tol
    if not agree:
        raise InconsistentMeasureError(
            f"conjugate parametrizations disagree: spread {spread:.3e} > {tol:.1e}"
        )
    return GaloisCheckReport(totals=totals, max_spread=spread, agree=agree, term_multisets=multisets)


# ---------------------------------------------------------------------------
# predicted identity basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisEntry:
    kind: str  # "dilog" | "borel" | "unknown"
    label: str
    value: float | None
    n: int | None = None  # dilog: order of the root of unity
    k: int | None = None  # dilog: numerator of the angle k/n
    d: int | None = None  # borel: Q(sqrt(-d))

    def refined_value(self, dps: int = 30) -> float | None:
        """Recompute the basis value at higher precision (for verification)."""
        import mpmath as mp

        if self.kind == "dilog":
            with mp.workdps(dps):
                z = mp.e ** (2j * mp.pi * self.k / self.n)
                val = mp.im(mp.polylog(2, z))
                return float(val)
        if self.kind == "borel":
            with mp.workdps(dps):
                from .zeta import FieldDescriptor as FD

                fd = FD.imaginary_quadratic(self.d)
                D = abs(fd.discriminant)
                q = D
                total = mp.mpf(0)
                for a in range(1, q + 1):
                    from .zeta import _kronecker

                    chi = _kronecker(fd.discriminant, a)
                    if chi:
                        total += chi * mp.zeta(2, mp.mpf(a) / q)
                L = total / q**2
                return float(mp.mpf(D) ** mp.mpf(1.5) * (mp.pi**2 / 6) * L / mp.pi**2)
        return None


def predict_basis(p: BiPoly, toric: list | None = None) -> list:
    """Basis entries predicted from the toric points' associated fields."""
    if toric is None:
        toric = toric_points(p)
    entries = {}
    for pt in toric:
        fe, fd = facing_edge(p, pt)
        if fd.kind == "rationals":
            continue
        if fd.kind == "cyclotomic":
            n = fd.n
            for k in range(1, n // 2 + 1):
                if math.gcd(k, n) == 1 and 2 * k != n:
                    key = ("dilog", n, k)
                    if key not in entries:
                        val = bw_dilog(cmath.exp(2j * math.pi * k / n))
                        entries[key] = BasisEntry(
                            kind="dilog",
                            label=f"D(zeta{n}^{k})" if k > 1 else f"D(zeta{n})",
                            value=val,
                            n=n,
                            k=k,
                        )
        elif fd.kind == "imaginary_quadratic":
            key = ("borel", fd.d)
            if key not in entries:
                entries[key] = BasisEntry(
                    kind="borel",
                    label=f"|disc|^1.5*zeta_F(2)/pi^2, F=Q(sqrt(-{fd.d}))",
                    value=borel_term(fd),
                    d=fd.d,
                )
        else:
            key = ("unknown", fd.label)
            if key not in entries:
                entries[key] = BasisEntry(kind="unknown", label=fd.label, value=None)
    order = {"dilog": 0, "borel": 1, "unknown": 2}
    return sorted(
        entries.values(), key=lambda e: (order[e.kind], e.n or 0, e.k or 0, e.d or 0)
    )


@dataclass(frozen=True)
class FormalDilogSum:
    terms: tuple  # (coefficient, argument) pairs
    value: float  # sum coeff * D(argument)


def formal_dilog_sum(u: complex, f: RationalFunction, g: RationalFunction) -> FormalDilogSum:
    """The formal sum over zero/pole pairs at a single endpoint, with D value."""
    terms = []
    total = 0.0
    for alpha, l_r in f.factors:
        for beta, m_s in g.factors:
            if abs(alpha - beta) <= 1e-10 * max(1.0, abs(alpha)):
                continue
            arg = _dilog_argument(u, alpha, beta)
            coeff = l_r * m_s
            terms.append((coeff, arg))
            total += coeff * bw_dilog(arg)
    return FormalDilogSum(terms=tuple(terms), value=total)
