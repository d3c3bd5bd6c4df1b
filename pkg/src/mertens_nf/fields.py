"""Invariants of real quadratic fields Q(sqrt(q)).

The residue of the Dedekind zeta function at s = 1 is produced from the class
number formula; the value L(1, chi) of the attached quadratic character is an
independent second route and the two are required to agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

# Euler-Mascheroni constant, 20 significant digits
EULER_GAMMA = 0.57721566490153286061


class InvariantError(ValueError):
    """Raised when two independent derivations of an invariant disagree."""


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for integers d and n >= 1."""
    if n < 1:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            result = -result
    a, m = d % n, n
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1:
        return False
    if d % 4 == 1:
        return is_squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(abs(m))
    return False


@dataclass(frozen=True)
class QuadraticField:
    """The real quadratic field Q(sqrt(q)) for squarefree q >= 2."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2 or not is_squarefree(self.q):
            raise ValueError(f"q must be a squarefree integer >= 2, got {self.q!r}")

    @property
    def discriminant(self) -> int:
        return self.q if self.q % 4 == 1 else 4 * self.q

    degree = 2
    r1 = 2
    r2 = 0
    w = 2

    def character(self, n: int) -> int:
        """Value of the quadratic character chi_Delta = (Delta / n)."""
        return kronecker(self.discriminant, n)

    @property
    def label(self) -> str:
        return f"Q(sqrt({self.q}))"


@dataclass(frozen=True)
class RationalField:
    """Q itself, kept alongside the quadratic fields for the classical checks."""

    q: int = 1
    discriminant: int = 1
    degree: int = 1
    r1: int = 1
    r2: int = 0
    w: int = 2

    def character(self, n: int) -> int:
        return 1

    @property
    def label(self) -> str:
        return "Q"


@dataclass(frozen=True)
class FieldInvariants:
    fundamental_unit: Optional[Tuple[int, int]]
    regulator: float
    class_number: int
    residue: float
    l_value: float = math.nan


def fundamental_unit(field: QuadraticField) -> Tuple[int, int]:
    """Return (a, b) with eps = (a + b sqrt(Delta)) / 2 the fundamental unit.

    Runs the continued fraction of (P0 + sqrt(Delta)) / 2 with exact integer
    arithmetic until the denominator returns to 2, at which point the
    preceding convergent A/B satisfies (2A - P0 B)^2 - Delta B^2 = +-4.
    """
    D = field.discriminant
    root = math.isqrt(D)
    P0, Q0 = D % 2, 2
    P, Q = P0, Q0
    A_prev, A = 0, 1  # A_{k-2}, A_{k-1}
    B_prev, B = 1, 0
    for _ in range(10 * D + 10):
        a = (P + root) // Q
        A_prev, A = A, a * A + A_prev
        B_prev, B = B, a * B + B_prev
        P = a * Q - P
        Q = (D - P * P) // Q
        if Q == Q0:
            x, y = 2 * A - P0 * B, B
            if x * x - D * y * y not in (4, -4):
                raise InvariantError(f"continued fraction closed on a non-unit for Delta={D}")
            return x, y
    raise InvariantError(f"continued fraction of sqrt({D}) did not close")


def regulator(unit: Tuple[int, int], field: QuadraticField) -> float:
    """log of (a + b sqrt(Delta)) / 2, accurate for arbitrarily large a, b."""
    a, b = unit
    D = field.discriminant
    norm4 = a * a - D * b * b
    if a <= 0 or b <= 0 or norm4 not in (4, -4):
        raise ValueError(f"{unit} is not a unit > 1")
    # eps = a * (1 + sqrt(1 + s)) / 2 with s = -norm4 / a^2
    s = -norm4 / (a * a)
    return math.log(a) + math.log1p((s / (1.0 + math.sqrt(1.0 + s))) / 2.0)


def dirichlet_L1(field: QuadraticField) -> float:
    """L(1, chi_Delta) from the finite log-sine sum for even primitive characters."""
    D = field.discriminant
    if D < 5 or not is_fundamental_discriminant(D):
        raise ValueError(f"chi_{D} is not an even primitive quadratic character")
    terms = []
    for a in range(1, D):
        c = kronecker(D, a)
        if c:
            terms.append(c * math.log(math.sin(math.pi * a / D)))
    return -math.fsum(terms) / math.sqrt(D)


def residue_kappa(field, h: int, R: float) -> float:
    """Class number formula 2^(r1+r2) pi^r2 h R / (w sqrt|Delta|)."""
    return (2 ** (field.r1 + field.r2) * math.pi ** field.r2 * h * R
            / (field.w * math.sqrt(abs(field.discriminant))))


def class_number(field: QuadraticField, R: Optional[float] = None,
                 L1: Optional[float] = None) -> int:
    if R is None:
        R = regulator(fundamental_unit(field), field)
    if L1 is None:
        L1 = dirichlet_L1(field)
    raw = math.sqrt(field.discriminant) * L1 / (2.0 * R)
    h = round(raw)
    if h < 1 or abs(raw - h) > 1e-6:
        raise InvariantError(f"invariant mismatch: class number estimate {raw!r} for q={field.q}")
    return h


def field_invariants(field) -> FieldInvariants:
    if isinstance(field, RationalField):
        return FieldInvariants(None, 1.0, 1, 1.0, 1.0)
    unit = fundamental_unit(field)
    R = regulator(unit, field)
    L1 = dirichlet_L1(field)
    h = class_number(field, R, L1)
    kappa = residue_kappa(field, h, R)
    if abs(kappa - L1) > 1e-10 * kappa:
        raise InvariantError(f"residue routes disagree for q={field.q}: {kappa} vs {L1}")
    return FieldInvariants(unit, R, h, kappa, L1)
