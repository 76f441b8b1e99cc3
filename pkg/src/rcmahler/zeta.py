"""Dedekind zeta values at 2 for imaginary quadratic fields.

zeta_F(2) = zeta(2) * L(2, chi_D) with chi_D the Kronecker character of the
field discriminant; L(2, chi) is evaluated through the Hurwitz-zeta
decomposition with Euler-Maclaurin tails.  borel_term packages the
|disc|^{3/2} zeta_F(2) / pi^{2r+2} combination used as a transcendental basis
element by the relation finder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .dilog import _bernoulli

__all__ = [
    "FieldDescriptor",
    "is_fundamental_discriminant",
    "kronecker_chi",
    "dirichlet_L2",
    "zeta_F2",
    "borel_term",
]

ZETA2 = math.pi * math.pi / 6.0


def _squarefree_kernel(n: int) -> int:
    """Largest squarefree divisor of |n|."""
    n = abs(n)
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            out *= d
            while n % d == 0:
                n //= d
        d += 1
    return out * n if n > 1 else out


def _is_squarefree(n: int) -> bool:
    return _squarefree_kernel(n) == abs(n)


def euler_phi(n: int) -> int:
    out = n
    d = 2
    while d * d <= n:
        if n % d == 0:
            out -= out // d
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out -= out // n
    return out


@dataclass(frozen=True)
class FieldDescriptor:
    """A number field of one of the kinds the toolkit understands."""

    kind: str  # "rationals" | "cyclotomic" | "imaginary_quadratic" | "general"
    n: int | None = None  # cyclotomic order, canonical (never 2 mod 4)
    d: int | None = None  # Q(sqrt(-d)), d squarefree positive
    label: str = ""

    @classmethod
    def rationals(cls) -> "FieldDescriptor":
        return cls(kind="rationals", label="Q")

    @classmethod
    def cyclotomic(cls, n: int) -> "FieldDescriptor":
        if n < 1:
            raise ValueError("cyclotomic order must be positive")
        if n % 4 == 2:
            n //= 2  # Q(zeta_{2m}) = Q(zeta_m) for odd m
        if n <= 2:
            return cls.rationals()
        return cls(kind="cyclotomic", n=n, label=f"Q(zeta{n})")

    @classmethod
    def imaginary_quadratic(cls, d: int) -> "FieldDescriptor":
        if d <= 0 or not _is_squarefree(d):
            raise ValueError("d must be a squarefree positive integer")
        return cls(kind="imaginary_quadratic", d=d, label=f"Q(sqrt(-{d}))")

    @classmethod
    def general(cls, label: str) -> "FieldDescriptor":
        return cls(kind="general", label=label)

    @property
    def discriminant(self) -> int | None:
        if self.kind == "rationals":
            return 1
        if self.kind == "imaginary_quadratic":
            return -self.d if self.d % 4 == 3 else -4 * self.d
        if self.kind == "cyclotomic":
            if self.n == 3:
                return -3
            if self.n == 4:
                return -4
            return None
        return None

    @property
    def complex_pairs(self) -> int | None:
        if self.kind == "rationals":
            return 0
        if self.kind == "imaginary_quadratic":
            return 1
        if self.kind == "cyclotomic":
            return euler_phi(self.n) // 2
        return None

    @property
    def real_embeddings(self) -> int | None:
        if self.kind == "rationals":
            return 1
        if self.kind in ("imaginary_quadratic", "cyclotomic"):
            return 0
        return None

    def as_imaginary_quadratic(self) -> "FieldDescriptor":
        """Convert cyclotomic(3)/(4) to their imaginary-quadratic identity."""
        if self.kind == "imaginary_quadratic":
            return self
        if self.kind == "cyclotomic" and self.n == 3:
            return FieldDescriptor.imaginary_quadratic(3)
        if self.kind == "cyclotomic" and self.n == 4:
            return FieldDescriptor.imaginary_quadratic(1)
        raise ValueError(f"{self.label or self.kind} is not imaginary quadratic")


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1:
        return True  # principal character, allowed for convenience
    if D % 4 == 1:
        return _is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _is_squarefree(m)
    return False


def _kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for arbitrary integers."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_chi(D: int, n: int) -> int:
    """The quadratic character chi_D(n) = (D|n); D must be fundamental."""
    if not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    if n < 1:
        raise ValueError("n must be positive")
    return _kronecker(D, n)


@lru_cache(maxsize=1)
def _em_coeffs():
    return tuple(float(_bernoulli(2 * j)) for j in range(1, 9))


def hurwitz_zeta_2(x: float, n_terms: int = 40) -> float:
    """zeta(2, x) = sum_{k>=0} 1/(k+x)^2 by Euler-Maclaurin, x > 0."""
    if x <= 0:
        raise ValueError("x must be positive")
    acc = 0.0
    for k in range(n_terms):
        acc += 1.0 / ((k + x) * (k + x))
    t = n_terms + x
    acc += 1.0 / t + 0.5 / (t * t)
    tp = t ** -3
    for b2j in _em_coeffs():
        acc += b2j * tp
        tp /= t * t
    return acc


def dirichlet_L2(D: int) -> float:
    """L(2, chi_D) via the Hurwitz-zeta decomposition."""
    if not is_fundamental_discriminant(D):
        raise ValueError(f"{D} is not a fundamental discriminant")
    if D == 1:
        return ZETA2
    q = abs(D)
    acc = 0.0
    for a in range(1, q + 1):
        chi = _kronecker(D, a)
        if chi:
            acc += chi * hurwitz_zeta_2(a / q)
    return acc / (q * q)


def zeta_F2(F: FieldDescriptor) -> float:
    """zeta_F(2) for an imaginary quadratic field F."""
    F = F.as_imaginary_quadratic()
    return ZETA2 * dirichlet_L2(F.discriminant)


def borel_term(F: FieldDescriptor) -> float:
    """|disc(F)|^{3/2} * zeta_F(2) / pi^{2r+2}, the c=1 basis normalization."""
    if F.kind in ("cyclotomic",) and F.n not in (3, 4):
        raise ValueError("field must have exactly one pair of complex embeddings")
    F = F.as_imaginary_quadratic()
    if F.complex_pairs != 1:
        raise ValueError("field must have exactly one pair of complex embeddings")
    r = F.real_embeddings
    disc = abs(F.discriminant)
    return disc**1.5 * zeta_F2(F) / math.pi ** (2 * r + 2)
