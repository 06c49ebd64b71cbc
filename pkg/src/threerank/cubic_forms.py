"""Binary cubic forms up to GL2(Z): enumeration, canonical forms, maximality.

Classes are found by walking a finite coefficient box that contains at
least one representative of every class with 0 < +-disc <= X, then
collapsing the box to canonical representatives. For disc > 0 the box comes
from the Hessian covariant; for disc < 0 from the quadratic factor that
carries the complex root pair. Both covariants transform along with the
cubic, so reducing the covariant pins the cubic down to finitely many
candidates.

Maximal classes with fundamental discriminant d number (3^r3(d) - 1)/2,
which gives an independent cross-check of the quadratic class group code.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .core_arith import CongruencePair, factorize, fundamental_mask
from .quad_class.forms import xgcd
from .quad_class.table import ClassGroupTable, default_table

__all__ = [
    "CubicForm",
    "LocalFilter",
    "ClassInventory",
    "disc_cubic",
    "act",
    "hessian",
    "is_irreducible",
    "is_primitive",
    "canonical_class_rep",
    "is_maximal",
    "enumerate_classes",
    "merge_inventories",
    "apply_filter",
    "disc_congruence_filter",
    "disc_not_divisible_filter",
    "dh_checksum",
    "dh_mismatches",
]

Matrix = tuple[tuple[int, int], tuple[int, int]]
IDENTITY: Matrix = ((1, 0), (0, 1))


class CubicForm(NamedTuple):
    """a x^3 + b x^2 y + c x y^2 + d y^3."""

    a: int
    b: int
    c: int
    d: int

    @property
    def disc(self) -> int:
        return disc_cubic(self)

    def __call__(self, x: int, y: int) -> int:
        a, b, c, d = self
        return a * x**3 + b * x * x * y + c * x * y * y + d * y**3


def disc_cubic(F: Sequence[int]) -> int:
    a, b, c, d = F
    return 18 * a * b * c * d + b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d


def _det(g: Matrix) -> int:
    (p, q), (r, s) = g
    return p * s - q * r


def _matmul(g: Matrix, h: Matrix) -> Matrix:
    (p, q), (r, s) = g
    (t, u), (v, w) = h
    return ((p * t + q * v, p * u + q * w), (r * t + s * v, r * u + s * w))


def _act(F: Sequence, g: Matrix) -> tuple:
    a, b, c, d = F
    (p, q), (r, s) = g
    return (
        a * p**3 + b * p * p * r + c * p * r * r + d * r**3,
        3 * a * p * p * q + b * (p * p * s + 2 * p * q * r) + c * (r * r * q + 2 * p * r * s) + 3 * d * r * r * s,
        3 * a * p * q * q + b * (q * q * r + 2 * p * q * s) + c * (s * s * p + 2 * q * r * s) + 3 * d * r * s * s,
        a * q**3 + b * q * q * s + c * q * s * s + d * s**3,
    )


def act(gamma: Matrix, F: Sequence[int]) -> CubicForm:
    """F(p x + q y, r x + s y) for gamma = ((p, q), (r, s)) with det +-1."""
    if abs(_det(gamma)) != 1:
        raise ValueError(f"{gamma} is not unimodular")
    return CubicForm(*_act(F, gamma))


def hessian(F: Sequence[int]) -> tuple[int, int, int]:
    """Quadratic covariant (P, Q, R) with Q^2 - 4PR = -3 disc(F)."""
    a, b, c, d = F
    return (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)


def is_primitive(F: Sequence[int]) -> bool:
    return math.gcd(*F) == 1


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = [1]
    for p, e in factorize(n).items():
        out = [x * p**k for x in out for k in range(e + 1)]
    return out


def is_irreducible(F: Sequence[int]) -> bool:
    """No linear factor over Q, i.e. no root (x:y) in P^1(Q)."""
    a, b, c, d = F
    if a == 0 or d == 0:
        return False
    # a root x/y in lowest terms has x | d and y | a
    for y in _divisors(a):
        for x in _divisors(d):
            if math.gcd(x, y) != 1:
                continue
            if CubicForm(*F)(x, y) == 0 or CubicForm(*F)(-x, y) == 0:
                return False
    return True


# ------------------------------------------------------------ reduction


def _reduce_quadratic(Q, exact: bool):
    """Reduce a positive definite (A, B, C) to |B| <= A <= C; return (form, gamma)."""
    A, B, C = Q
    g = IDENTITY
    tol = 0 if exact else 1e-9 * (abs(A) + abs(B) + abs(C))
    for _ in range(10_000):
        if exact:
            r = (A - B) // (2 * A)
        else:
            r = round(-B / (2 * A)) if abs(B) > A + tol else 0
        if r:
            C = A * r * r + B * r + C
            B = B + 2 * A * r
            g = _matmul(g, ((1, r), (0, 1)))
        if A > C + tol:
            A, B, C = C, -B, A
            g = _matmul(g, ((0, -1), (1, 0)))
            continue
        return (A, B, C), g
    raise RuntimeError("quadratic reduction did not terminate")


def _quad_act(Q, g: Matrix):
    A, B, C = Q
    (p, q), (r, s) = g
    return (
        A * p * p + B * p * r + C * r * r,
        2 * A * p * q + B * (p * s + q * r) + 2 * C * r * s,
        A * q * q + B * q * s + C * s * s,
    )


def _is_reduced_quadratic(Q, tol: float) -> bool:
    A, B, C = Q
    return abs(B) <= A + tol and A <= C + tol


# GL2(Z) elements with entries in {-1, 0, 1}; any two weakly reduced forms in
# one class differ by one of these.
_SMALL = tuple(
    ((p, q), (r, s))
    for p, q, r, s in itertools.product((-1, 0, 1), repeat=4)
    if abs(p * s - q * r) == 1
)


def _complex_pair_factor(F: Sequence[int]) -> tuple[float, float, float]:
    """Monic x^2 + p x y + q y^2 dividing F over R, for disc(F) < 0."""
    a, b, c, d = F
    roots = np.roots([a, b, c, d])
    theta = float(roots[np.argmin(np.abs(roots.imag))].real)
    for _ in range(3):
        f = ((a * theta + b) * theta + c) * theta + d
        df = (3 * a * theta + 2 * b) * theta + c
        if df == 0:
            break
        theta -= f / df
    p = b / a + theta
    q = c / a + theta * p
    return (1.0, p, q)


def canonical_class_rep(F: Sequence[int]) -> CubicForm:
    """Lexicographically least member of the GL2(Z)-class of F among reduced forms."""
    F = tuple(int(x) for x in F)
    D = disc_cubic(F)
    if D == 0:
        raise ValueError(f"{F} is degenerate (disc 0)")
    if not is_primitive(F) or not is_irreducible(F):
        raise ValueError(f"{F} must be primitive and irreducible")
    if D > 0:
        Q = hessian(F)
        exact = True
    else:
        Q = _complex_pair_factor(F)
        exact = False
    Qr, g = _reduce_quadratic(Q, exact)
    tol = 0 if exact else 1e-9 * (abs(Qr[0]) + abs(Qr[1]) + abs(Qr[2]))
    G = _act(F, g)
    best = None
    for s in _SMALL:
        if _is_reduced_quadratic(_quad_act(Qr, s), tol):
            cand = _act(G, s)
            if best is None or cand < best:
                best = cand
    return CubicForm(*best)


# ------------------------------------------------------------ maximality


def _complete(x: int, y: int) -> Matrix:
    """A unimodular matrix with first column (x, y), gcd(x, y) = 1."""
    _, u, v = xgcd(x, y)
    # u x + v y = 1
    return ((x, -v), (y, u))


def _projective_points(p: int):
    yield (1, 0)
    for x in range(p):
        yield (x, 1)


def non_maximal_primes(F: Sequence[int]) -> list[int]:
    """Primes p at which the cubic ring of F is not maximal."""
    D = disc_cubic(F)
    out = []
    for p, e in factorize(D).items():
        if e < 2:
            continue
        for x0, y0 in _projective_points(p):
            g = _complete(x0, y0)
            a1, b1, _, _ = _act(F, g)
            if a1 % p == 0 and b1 % p == 0 and a1 % (p * p) == 0:
                out.append(p)
                break
    return out


def is_maximal(F: Sequence[int]) -> bool:
    """Whether no prime p admits a transform with p^2 | a' and p | b'.

    Only multiple roots of F mod p can be moved to (1:0) with p | b', and
    there the value mod p^2 does not depend on the lift, so checking one
    lift per point of P^1(F_p) is exhaustive.
    """
    return not non_maximal_primes(F)


# ------------------------------------------------------------ enumeration


@dataclass
class ClassInventory:
    """Canonical class representatives with 0 < sign * disc <= X, keyed by disc."""

    X: int
    sign: int
    classes: dict[int, list[tuple[CubicForm, bool]]] = field(default_factory=dict)

    @property
    def n_maximal(self) -> int:
        return sum(m for reps in self.classes.values() for _, m in reps)

    @property
    def n_nonmaximal(self) -> int:
        return sum(not m for reps in self.classes.values() for _, m in reps)

    def __len__(self):
        return sum(len(v) for v in self.classes.values())

    def count(self, disc: int, maximal_only: bool = True) -> int:
        reps = self.classes.get(disc, [])
        return sum(1 for _, m in reps if m or not maximal_only)

    def maximal_counts(self) -> dict[int, int]:
        out = {}
        for D, reps in self.classes.items():
            k = sum(1 for _, m in reps if m)
            if k:
                out[D] = k
        return out

    def representatives(self) -> list[CubicForm]:
        return [f for D in sorted(self.classes) for f, _ in self.classes[D]]

    def rows(self) -> list[dict]:
        out = []
        for D in sorted(self.classes, key=lambda v: (abs(v), v)):
            for f, m in sorted(self.classes[D]):
                out.append({"a": f.a, "b": f.b, "c": f.c, "d": f.d, "disc": D, "maximal": int(m)})
        return out

    def to_csv(self, dest: str | os.PathLike | io.TextIOBase | None = None) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["a", "b", "c", "d", "disc", "maximal"], lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        text = buf.getvalue()
        if dest is None:
            return text
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text


def _a_bound(X: int, sign: int) -> int:
    # disc > 0: 729 a^4 <= 16 X;  disc < 0: 27 a^4 <= 16 X
    k = 729 if sign > 0 else 27
    a = 0
    while k * (a + 1) ** 4 <= 16 * X:
        a += 1
    return a


def _d_window(a, b, c, lo):
    """Integers d (a superset) with disc(a, b, c, d) >= lo."""
    # disc = -27 a^2 d^2 + (18abc - 4b^3) d + (b^2 c^2 - 4 a c^3)
    A = -27 * a * a
    B = 18 * a * b * c - 4 * b**3
    C = b * b * c * c - 4 * a * c**3 - lo
    disc = B * B - 4 * A * C
    if disc < 0:
        return range(0)
    r = math.isqrt(disc) + 1
    d1 = (-B - r) / (2 * A)
    d2 = (-B + r) / (2 * A)
    return range(math.floor(min(d1, d2)) - 1, math.ceil(max(d1, d2)) + 2)


def _candidates(X: int, sign: int, a_lo: int, a_hi: int):
    for a in range(a_lo, a_hi + 1):
        if sign > 0:
            P_lo, P_hi = 1, math.isqrt(X)
        else:
            P_lo = -math.floor(3 * (X / 4) ** (1 / 3) * a ** (2 / 3)) - 1
            P_hi = math.isqrt(X // 3) + 1
        m = 3 * a
        bmax = (3 * a + 1) // 2
        for b in range(-bmax, bmax + 1):
            # c = (b^2 - P) / 3a must be integral
            start = P_lo + ((b * b - P_lo) % m)
            for P in range(start, P_hi + 1, m):
                c = (b * b - P) // m
                for d in _d_window(a, b, c, -X if sign < 0 else 1):
                    D = disc_cubic((a, b, c, d))
                    if D == 0 or (D > 0) != (sign > 0) or abs(D) > X:
                        continue
                    yield (a, b, c, d), D


def enumerate_classes(X: int, sign: int, a_range: tuple[int, int] | None = None) -> ClassInventory:
    """Canonical representatives of all irreducible primitive classes with 0 < sign*disc <= X.

    ``a_range`` restricts the leading coefficient of the box scan, so the
    work can be split and recombined with ``merge_inventories``.
    """
    X = int(X)
    if X < 1:
        raise ValueError("X must be >= 1")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amax = _a_bound(X, sign)
    lo, hi = (1, amax) if a_range is None else (max(1, a_range[0]), min(amax, a_range[1]))
    seen: set[CubicForm] = set()
    inv = ClassInventory(X, sign)
    for F, D in _candidates(X, sign, lo, hi):
        if not is_primitive(F) or not is_irreducible(F):
            continue
        rep = canonical_class_rep(F)
        if rep in seen:
            continue
        seen.add(rep)
        inv.classes.setdefault(D, []).append((rep, is_maximal(rep)))
    for reps in inv.classes.values():
        reps.sort()
    return inv


def merge_inventories(parts: Iterable[ClassInventory]) -> ClassInventory:
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to merge")
    X, sign = parts[0].X, parts[0].sign
    if any(p.X != X or p.sign != sign for p in parts):
        raise ValueError("inventories must share X and sign")
    merged: dict[int, dict[CubicForm, bool]] = defaultdict(dict)
    for p in parts:
        for D, reps in p.classes.items():
            for f, m in reps:
                merged[D][f] = m
    return ClassInventory(X, sign, {D: sorted(v.items()) for D, v in merged.items()})


# ------------------------------------------------------------ local filters


@dataclass(frozen=True)
class LocalFilter:
    """Keep forms whose coefficients mod p^alpha_p satisfy ``allowed``."""

    p: int
    alpha_p: int
    allowed: Callable[[tuple[int, int, int, int]], bool]

    @property
    def modulus(self) -> int:
        return self.p**self.alpha_p

    def __call__(self, F: Sequence[int]) -> bool:
        q = self.modulus
        return bool(self.allowed(tuple(x % q for x in F)))


def disc_congruence_filter(p: int, alpha: int, residues: Iterable[int]) -> LocalFilter:
    """disc(F) mod p^alpha lies in ``residues``."""
    q = p**alpha
    allowed = frozenset(r % q for r in residues)
    return LocalFilter(p, alpha, lambda F: disc_cubic(F) % q in allowed)


def disc_not_divisible_filter(p: int) -> LocalFilter:
    """p^2 does not divide disc(F)."""
    q = p * p
    return LocalFilter(p, 2, lambda F: disc_cubic(F) % q != 0)


def apply_filter(inv: ClassInventory, filters: Sequence[LocalFilter]) -> ClassInventory:
    primes = [f.p for f in filters]
    if len(set(primes)) != len(primes):
        raise ValueError("filters must use distinct primes")
    out = ClassInventory(inv.X, inv.sign)
    for D, reps in inv.classes.items():
        kept = [(f, m) for f, m in reps if all(flt(f) for flt in filters)]
        if kept:
            out.classes[D] = kept
    return out


# ------------------------------------------------------------ DH identity


def _fundamentals(X: int, sign: int, pair: CongruencePair) -> np.ndarray:
    ks = np.flatnonzero(fundamental_mask(X, sign))
    D = sign * ks
    return D[(D - pair.m) % pair.N == 0]


def dh_mismatches(
    X: int,
    sign: int,
    pair: CongruencePair | None = None,
    inventory: ClassInventory | None = None,
    table: ClassGroupTable | None = None,
) -> list[tuple[int, int, int]]:
    """(d, expected, found) for every fundamental d where the class count disagrees."""
    pair = pair or CongruencePair(1, 1)
    table = default_table() if table is None else table
    inv = inventory or enumerate_classes(X, sign)
    discs = _fundamentals(X, sign, pair)
    ranks = table.p_ranks(discs, 3)
    counts = inv.maximal_counts()
    bad = []
    for d, r in zip(discs.tolist(), ranks.tolist()):
        want = (3**r - 1) // 2
        got = counts.get(d, 0)
        if want != got:
            bad.append((d, want, got))
    return bad


def dh_checksum(
    X: int,
    sign: int,
    pair: CongruencePair | None = None,
    inventory: ClassInventory | None = None,
    table: ClassGroupTable | None = None,
) -> tuple[int, int]:
    """(sum of (3^r3(d) - 1)/2, number of maximal classes) over fundamental d = m mod N, |d| <= X."""
    pair = pair or CongruencePair(1, 1)
    if not (pair.admissible or (pair.m, pair.N) == (1, 1)):
        raise ValueError(f"(m={pair.m}, N={pair.N}) is not admissible")
    table = default_table() if table is None else table
    inv = inventory or enumerate_classes(X, sign)
    discs = _fundamentals(X, sign, pair)
    ranks = table.p_ranks(discs, 3)
    lhs = int(sum((3**r - 1) // 2 for r in ranks.tolist()))
    counts = inv.maximal_counts()
    rhs = int(sum(counts.get(d, 0) for d in discs.tolist()))
    return lhs, rhs
