"""Binary quadratic forms: reduction, rho-cycles and Gauss composition.

Pure-integer implementations. Equivalence decisions never touch floating
point; sqrt(D) enters only through ``math.isqrt`` for nonsquare D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "QuadForm",
    "ReductionCycle",
    "xgcd",
    "principal_form",
    "inverse",
    "is_reduced_definite",
    "reduce_definite",
    "enumerate_reduced_definite",
    "is_reduced_indefinite",
    "normalize_indefinite",
    "rho",
    "reduce_indefinite",
    "cycle_of",
    "enumerate_reduced_indefinite",
    "compose_raw",
    "compose",
    "reduce_form",
    "pell_minus_solvable",
]


class QuadForm(NamedTuple):
    """The form a x^2 + b x y + c y^2."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, gamma) -> "QuadForm":
        """Substitute (x, y) -> (p x + q y, r x + s y) for gamma = ((p, q), (r, s))."""
        (p, q), (r, s) = gamma
        a, b, c = self
        return QuadForm(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )


@dataclass(frozen=True)
class ReductionCycle:
    """A rho-cycle of reduced indefinite forms; ``representative`` is its least member."""

    members: tuple[QuadForm, ...]

    @property
    def representative(self) -> QuadForm:
        return min(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, f) -> bool:
        return f in self.members


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a x + b y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _check_disc(D: int) -> None:
    if D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a discriminant (must be 0 or 1 mod 4)")
    if D >= 0 and math.isqrt(D) ** 2 == D:
        raise ValueError(f"{D} is a square; forms would be degenerate")


def principal_form(D: int) -> QuadForm:
    _check_disc(D)
    b = D % 2
    return QuadForm(1, b, (b * b - D) // 4)


def inverse(f: QuadForm) -> QuadForm:
    return QuadForm(f.a, -f.b, f.c)


# ---------------------------------------------------------------- definite


def is_reduced_definite(f: QuadForm) -> bool:
    a, b, c = f
    if not (abs(b) <= a <= c):
        return False
    if b < 0 and (a == c or -b == a):
        return False
    return True


def reduce_definite(f: QuadForm) -> QuadForm:
    a, b, c = f
    if b * b - 4 * a * c >= 0:
        raise ValueError(f"{tuple(f)} is not definite")
    if a < 0:
        raise ValueError(f"{tuple(f)} is negative definite; pass the positive form")
    while True:
        if not (-a < b <= a):
            # translate b into (-a, a]
            r = (a - b) // (2 * a)
            c = a * r * r + b * r + c
            b = b + 2 * r * a
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        return QuadForm(a, b, c)


def enumerate_reduced_definite(D: int) -> list[QuadForm]:
    """All reduced positive definite forms of discriminant D (primitive ones only)."""
    if D >= 0:
        raise ValueError("enumerate_reduced_definite needs D < 0")
    _check_disc(D)
    out = []
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append(QuadForm(a, b, c))
    return out


# -------------------------------------------------------------- indefinite


def is_reduced_indefinite(f: QuadForm, s: int | None = None) -> bool:
    """0 < b < sqrt(D) and sqrt(D) - b < 2|a| < sqrt(D) + b, in integers."""
    a, b, _ = f
    if s is None:
        s = math.isqrt(f.disc)
    return 0 < b <= s and 2 * abs(a) + b > s and 2 * abs(a) - b <= s


def normalize_indefinite(f: QuadForm, s: int | None = None) -> QuadForm:
    a, b, c = f
    D = b * b - 4 * a * c
    if s is None:
        s = math.isqrt(D)
    m = 2 * abs(a)
    if abs(a) > s:
        lo = -abs(a)  # b' in (-|a|, |a|]
    else:
        lo = s - m  # b' in (sqrt(D) - 2|a|, sqrt(D))
    nb = b + m * ((lo - b) // m + 1)
    return QuadForm(a, nb, (nb * nb - D) // (4 * a))


def rho(f: QuadForm, s: int | None = None) -> QuadForm:
    a, b, c = f
    return normalize_indefinite(QuadForm(c, -b, a), s)


def reduce_indefinite(f: QuadForm) -> QuadForm:
    D = f.disc
    if D <= 0:
        raise ValueError(f"{tuple(f)} is not indefinite")
    _check_disc(D)
    s = math.isqrt(D)
    g = normalize_indefinite(f, s)
    while not is_reduced_indefinite(g, s):
        g = rho(g, s)
    return g


def cycle_of(f: QuadForm) -> tuple[QuadForm, ...]:
    """The rho-cycle through the reduced form f, starting at f."""
    s = math.isqrt(f.disc)
    if not is_reduced_indefinite(f, s):
        raise ValueError(f"{tuple(f)} is not reduced")
    members = [f]
    g = rho(f, s)
    while g != f:
        members.append(g)
        g = rho(g, s)
    return tuple(members)


def _reduced_indefinite_forms(D: int) -> list[QuadForm]:
    s = math.isqrt(D)
    out = []
    for b in range(1, s + 1):
        if (b - D) % 2:
            continue
        N = (D - b * b) // 4
        lo = (s - b) // 2 + 1  # 2|a| > s - b
        hi = (s + b) // 2  # 2|a| <= s + b
        for a in range(max(lo, 1), hi + 1):
            if N % a:
                continue
            c = N // a
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append(QuadForm(a, b, -c))
            out.append(QuadForm(-a, b, c))
    return out


def enumerate_reduced_indefinite(D: int) -> list[ReductionCycle]:
    """Reduced primitive forms of discriminant D > 0 split into rho-cycles."""
    if D <= 0:
        raise ValueError("enumerate_reduced_indefinite needs D > 0")
    _check_disc(D)
    seen: set[QuadForm] = set()
    cycles = []
    for f in sorted(_reduced_indefinite_forms(D)):
        if f in seen:
            continue
        members = cycle_of(f)
        seen.update(members)
        cycles.append(ReductionCycle(members))
    return cycles


def pell_minus_solvable(D: int) -> bool:
    """Whether x^2 - D y^2 = -4 has a solution, i.e. the fundamental unit has norm -1.

    Decided by whether the negated principal form lies in the principal cycle.
    """
    if D <= 0:
        raise ValueError("pell_minus_solvable needs D > 0")
    one = principal_form(D)
    target = reduce_indefinite(QuadForm(-one.a, one.b, -one.c))
    return target in cycle_of(reduce_indefinite(one))


# -------------------------------------------------------------- composition


def compose_raw(f: QuadForm, g: QuadForm) -> QuadForm:
    """Dirichlet composition of two primitive forms, unreduced."""
    a1, b1, c1 = f
    a2, b2, c2 = g
    D = b1 * b1 - 4 * a1 * c1
    if b2 * b2 - 4 * a2 * c2 != D:
        raise ValueError(f"discriminant mismatch: {tuple(f)} vs {tuple(g)}")
    s = (b1 + b2) // 2
    n = b2 - s
    d1, u1, v1 = xgcd(a1, a2)
    d, p, w = xgcd(d1, s)
    v = p * v1
    # u*a1 + v*a2 + w*s = d
    A = a1 * a2 // (d * d)
    B = b2 - 2 * (a2 // d) * (v * n + w * c2)
    m = 2 * A
    B %= m
    return QuadForm(A, B, (B * B - D) // (4 * A))


def reduce_form(f: QuadForm) -> QuadForm:
    """Reduced representative: the reduced form (D < 0) or least member of the cycle (D > 0)."""
    if f.disc < 0:
        return reduce_definite(f)
    return min(cycle_of(reduce_indefinite(f)))


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    return reduce_form(compose_raw(f, g))
