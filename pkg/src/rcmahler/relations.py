"""Integer relation detection (PSLQ) and identity verification.

The PSLQ iteration follows Bailey's formulation, run over mpmath floats at a
caller-chosen working precision.  verify_identity searches for a rational
identity pi*m(P) = sum c_j * basis_j, widening the tolerance to the accuracy
of the measure value and re-verifying any hit against basis values recomputed
at higher precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

__all__ = [
    "RelationResult",
    "IdentityResult",
    "pslq",
    "verify_identity",
]


@dataclass(frozen=True)
class RelationResult:
    coefficients: tuple | None
    residual: float | None
    norm_bound: float
    confidence: str  # "detected" | "none" | "inconclusive"
    iterations: int


def pslq(
    values,
    max_coeff: int = 10**6,
    digits: int = 15,
    tol: float | None = None,
    max_iterations: int | None = None,
) -> RelationResult:
    """Integer relation for the given real values, or a norm-bound verdict.

    Returns "detected" with the coefficient vector when |sum c_i x_i| falls
    below tol (default 10^(4-digits) * max|x|) with max|c_i| <= max_coeff;
    "none" when the PSLQ norm bound proves no such relation exists; and
    "inconclusive" when the iteration budget is exhausted first.
    """
    xs = [float(v) for v in values]
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two values")
    if any(v == 0.0 for v in xs):
        # a zero entry is already a relation with a unit vector
        i = xs.index(0.0)
        coeffs = tuple(1 if j == i else 0 for j in range(n))
        return RelationResult(coeffs, 0.0, 1.0, "detected", 0)
    scale = max(abs(v) for v in xs)
    if tol is None:
        tol_abs = 10.0 ** (4 - digits) * scale
    else:
        tol_abs = float(tol) * scale
    if max_iterations is None:
        max_iterations = 300 + 40 * n * n

    with mp.workdps(digits + 15):
        x = [mp.mpf(v) for v in xs]
        gamma = mp.sqrt(mp.mpf(4) / 3)
        # partial norms s_k and normalized y
        s = [mp.mpf(0)] * n
        acc = mp.mpf(0)
        for k in range(n - 1, -1, -1):
            acc += x[k] * x[k]
            s[k] = mp.sqrt(acc)
        t0 = s[0]
        y = [v / t0 for v in x]
        s = [v / t0 for v in s]
        # H: n x (n-1) lower trapezoidal
        H = [[mp.mpf(0)] * (n - 1) for _ in range(n)]
        for j in range(n - 1):
            H[j][j] = s[j + 1] / s[j]
            for i in range(j + 1, n):
                H[i][j] = -y[i] * y[j] / (s[j] * s[j + 1])
        B = [[1 if i == j else 0 for j in range(n)] for i in range(n)]  # exact ints

        def reduce_row(i, upto):
            for j in range(min(i - 1, upto), -1, -1):
                if H[j][j] == 0:
                    continue
                t = mp.nint(H[i][j] / H[j][j])
                if t == 0:
                    continue
                ti = int(t)
                y[j] += t * y[i]
                for k in range(j + 1):
                    H[i][k] -= t * H[j][k]
                for k in range(n):
                    B[k][j] += ti * B[k][i]

        for i in range(1, n):
            reduce_row(i, n - 2)

        iterations = 0
        norm_bound = 1.0
        while iterations < max_iterations:
            iterations += 1
            # select the pivot row
            m_idx, best = 0, mp.mpf(-1)
            for i in range(n - 1):
                v = (gamma**i) * abs(H[i][i])
                if v > best:
                    best, m_idx = v, i
            # swap rows m, m+1
            y[m_idx], y[m_idx + 1] = y[m_idx + 1], y[m_idx]
            H[m_idx], H[m_idx + 1] = H[m_idx + 1], H[m_idx]
            for k in range(n):
                B[k][m_idx], B[k][m_idx + 1] = B[k][m_idx + 1], B[k][m_idx]
            # corner rotation
            if m_idx <= n - 3:
                t0v = mp.sqrt(H[m_idx][m_idx] ** 2 + H[m_idx][m_idx + 1] ** 2)
                if t0v != 0:
                    t1 = H[m_idx][m_idx] / t0v
                    t2 = H[m_idx][m_idx + 1] / t0v
                    for i in range(m_idx, n):
                        a = H[i][m_idx]
                        b = H[i][m_idx + 1]
                        H[i][m_idx] = t1 * a + t2 * b
                        H[i][m_idx + 1] = -t2 * a + t1 * b
            for i in range(m_idx + 1, n):
                reduce_row(i, min(i - 1, m_idx + 1))
            # norm bound from the diagonal
            hmax = max(abs(H[j][j]) for j in range(n - 1))
            if hmax > 0:
                norm_bound = float(1 / hmax)
            # termination: a y entry collapsed
            ymin, idx = min((abs(v), i) for i, v in enumerate(y))
            if float(ymin) * float(t0) < tol_abs / 10 or ymin < mp.mpf(10) ** (-(digits + 8)):
                coeffs = tuple(B[k][idx] for k in range(n))
                if all(c == 0 for c in coeffs):
                    continue
                residual = abs(math.fsum(c * v for c, v in zip(coeffs, xs)))
                if max(abs(c) for c in coeffs) <= max_coeff and residual <= tol_abs:
                    return RelationResult(
                        coeffs, residual, norm_bound, "detected", iterations
                    )
                if norm_bound > max_coeff:
                    return RelationResult(None, None, norm_bound, "none", iterations)
                return RelationResult(
                    coeffs, residual, norm_bound, "inconclusive", iterations
                )
            if norm_bound > max_coeff:
                return RelationResult(None, None, norm_bound, "none", iterations)
    return RelationResult(None, None, norm_bound, "inconclusive", iterations)


# ---------------------------------------------------------------------------
# identity verification
# ---------------------------------------------------------------------------


@dataclass
class IdentityResult:
    verdict: str  # "verified" | "no relation" | "inconclusive"
    relation: tuple | None  # integer vector on [pi*m] + basis
    coefficients: list | None  # rational c_j with pi*m = sum c_j basis_j
    residual: float | None
    residual_refined: float | None
    text: str

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "relation": list(self.relation) if self.relation else None,
            "coefficients": [str(c) for c in self.coefficients] if self.coefficients else None,
            "residual": self.residual,
            "residual_refined": self.residual_refined,
            "identity": self.text,
        }


def _basis_value(entry) -> float:
    if hasattr(entry, "value"):
        if entry.value is None:
            raise ValueError(f"basis entry {entry!r} has no numeric value")
        return float(entry.value)
    return float(entry)


def _basis_label(entry, i: int) -> str:
    if hasattr(entry, "label"):
        return entry.label
    return f"b{i}"


def _basis_refined(entry) -> float | None:
    if hasattr(entry, "refined_value"):
        try:
            return entry.refined_value()
        except Exception:
            return None
    return None


def verify_identity(
    p_or_measure,
    basis,
    tol: float | None = None,
    max_coeff: int = 50,
    digits: int = 15,
    max_denominator: int = 60,
    measure_tol: float = 1e-10,
) -> IdentityResult:
    """Search for pi*m(P) = sum c_j basis_j with rational c_j.

    The first argument is a BiPoly (measured via the circle quadrature) or a
    MeasureEstimate already computed.  Found relations are re-verified with
    basis values recomputed at 30 digits where available; a residual
    incompatible with the measure's error bound downgrades the verdict.
    """
    from .measure import MeasureEstimate, mahler_jensen1d
    from .polyio import BiPoly

    if isinstance(p_or_measure, MeasureEstimate):
        est = p_or_measure
    elif isinstance(p_or_measure, BiPoly):
        est = mahler_jensen1d(p_or_measure, tol=measure_tol)
    else:
        est = MeasureEstimate(float(p_or_measure), 1e-12, "external")

    values = [math.pi * est.value] + [_basis_value(b) for b in basis]
    scale = max(abs(v) for v in values)
    m_err = math.pi * max(est.error_bound, 1e-14)
    if tol is None:
        tol_rel = max(10.0 ** (4 - digits), 10.0 * m_err / scale)
    else:
        tol_rel = max(float(tol), 10.0 * m_err / scale)
    result = pslq(values, max_coeff=max_coeff, digits=digits, tol=tol_rel)

    labels = [_basis_label(b, i) for i, b in enumerate(basis)]
    if result.confidence != "detected" or result.coefficients is None:
        verdict = "no relation" if result.confidence == "none" else "inconclusive"
        return IdentityResult(
            verdict=verdict,
            relation=None,
            coefficients=None,
            residual=None,
            residual_refined=None,
            text=f"no relation at this precision/bound (norm bound {result.norm_bound:.3g})",
        )

    rel = result.coefficients
    c0 = rel[0]
    if c0 == 0:
        return IdentityResult(
            verdict="inconclusive",
            relation=rel,
            coefficients=None,
            residual=result.residual,
            residual_refined=None,
            text="relation found among basis values only (measure coefficient 0)",
        )
    coeffs = [Fraction(-c, c0) for c in rel[1:]]
    if any(c.denominator > max_denominator for c in coeffs):
        return IdentityResult(
            verdict="inconclusive",
            relation=rel,
            coefficients=coeffs,
            residual=result.residual,
            residual_refined=None,
            text="relation found but rational coefficients exceed the denominator bound",
        )

    # re-verify against refined basis values where available
    refined = [_basis_refined(b) for b in basis]
    if all(v is not None for v in refined):
        vals_ref = [math.pi * est.value] + refined
        residual_refined = abs(math.fsum(c * v for c, v in zip(rel, vals_ref)))
    else:
        residual_refined = None

    verdict = "verified"
    allowed = abs(c0) * m_err + 10 ** (4 - digits) * scale
    if residual_refined is not None and residual_refined > max(10 * allowed, 1e-9 * scale):
        verdict = "inconclusive"

    parts = []
    for c, lab in zip(coeffs, labels):
        if c == 0:
            continue
        parts.append(f"({c})*{lab}")
    text = "pi*m(P) = " + (" + ".join(parts) if parts else "0")
    return IdentityResult(
        verdict=verdict,
        relation=rel,
        coefficients=coeffs,
        residual=result.residual,
        residual_refined=residual_refined,
        text=text,
    )
