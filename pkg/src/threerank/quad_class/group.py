"""Class group structure from reduced forms.

The group order is the number of reduced forms (D < 0) or rho-cycles
(D > 0, narrow group). Invariant factors come from counting p^j-torsion
inside each Sylow subgroup: with exponents lambda_i of the p-part,
#G[p^j] = p^(sum_i min(lambda_i, j)), which pins down the lambda_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..core_arith import factorize, field_discriminant, is_fundamental
from .forms import (
    QuadForm,
    compose_raw,
    enumerate_reduced_definite,
    enumerate_reduced_indefinite,
    pell_minus_solvable,
    principal_form,
    reduce_definite,
    reduce_indefinite,
)

__all__ = [
    "ClassGroupInfo",
    "FormClassGroup",
    "class_group",
    "invariants_from_torsion",
    "p_rank",
    "r3",
    "class_number",
    "wide_p_rank",
]


@dataclass(frozen=True)
class ClassGroupInfo:
    disc: int
    h_narrow: int
    h: int
    invariant_factors: tuple[int, ...]
    unit_norm_minus_one: bool | None = None

    def p_rank(self, p: int) -> int:
        return p_rank(self, p)

    def to_row(self) -> dict:
        return {
            "disc": self.disc,
            "h_narrow": self.h_narrow,
            "h": self.h,
            "invariant_factors": ";".join(str(d) for d in self.invariant_factors),
        }


class FormClassGroup:
    """The class group of discriminant D with elements labelled 0..h-1.

    Element 0 is the principal class. Products are memoized, so repeated
    exponentiation over all elements stays cheap for desk-scale h.
    """

    def __init__(self, D: int):
        self.D = D
        if D < 0:
            reps = enumerate_reduced_definite(D)
            self._index = {f: i for i, f in enumerate(reps)}
            self._reduce = reduce_definite
        else:
            cycles = enumerate_reduced_indefinite(D)
            reps = [c.representative for c in cycles]
            self._index = {f: i for i, c in enumerate(cycles) for f in c.members}
            self._reduce = reduce_indefinite
        one = self.label(principal_form(D))
        # put the principal class first
        reps[0], reps[one] = reps[one], reps[0]
        self.reps = reps
        if D < 0:
            self._index = {f: i for i, f in enumerate(reps)}
        else:
            relabel = {one: 0, 0: one}
            self._index = {f: relabel.get(i, i) for f, i in self._index.items()}
        self._products: dict[tuple[int, int], int] = {}

    @property
    def order(self) -> int:
        return len(self.reps)

    def label(self, f: QuadForm) -> int:
        return self._index[self._reduce(f)]

    def mul(self, i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        key = (i, j) if i <= j else (j, i)
        out = self._products.get(key)
        if out is None:
            out = self.label(compose_raw(self.reps[i], self.reps[j]))
            self._products[key] = out
        return out

    def power(self, i: int, n: int) -> int:
        result = 0
        base = i
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def element_order(self, i: int) -> int:
        h = self.order
        n = h
        if h == 1:
            return 1
        for p in factorize(h):
            while n % p == 0 and self.power(i, n // p) == 0:
                n //= p
        return n

    def sylow_exponents(self, p: int, e: int) -> list[int]:
        """Exponents of the cyclic factors of the p-Sylow subgroup (order p^e)."""
        if e == 1:
            return [1]
        h = self.order
        cofactor = h // p**e
        # x -> x^cofactor maps G onto the Sylow subgroup with fibres of size cofactor
        levels = [0] * (e + 1)
        for x in range(h):
            y = self.power(x, cofactor)
            k = 0
            while y != 0:
                y = self.power(y, p)
                k += 1
            levels[k] += 1
        torsion = []
        running = 0
        for j in range(e + 1):
            running += levels[j]
            torsion.append(running // cofactor)
        return invariants_from_torsion(p, torsion)

    def invariant_factors(self) -> tuple[int, ...]:
        h = self.order
        if h == 1:
            return ()
        parts = {p: self.sylow_exponents(p, e) for p, e in factorize(h).items()}
        return _combine(parts)


def invariants_from_torsion(p: int, torsion: list[int]) -> list[int]:
    """Cyclic exponents of a p-group from the sizes #G[p^j], j = 0, 1, ..."""
    logs = []
    for t in torsion:
        k = 0
        while t % p == 0 and t > 1:
            t //= p
            k += 1
        if t != 1:
            raise ValueError(f"torsion count is not a power of {p}: {torsion}")
        logs.append(k)
    # at_least[j] = #{i : lambda_i >= j}
    at_least = [logs[j] - logs[j - 1] for j in range(1, len(logs))]
    exps = []
    for j, n in enumerate(at_least, start=1):
        nxt = at_least[j] if j < len(at_least) else 0
        exps.extend([j] * (n - nxt))
    return sorted(exps, reverse=True)


def _combine(parts: dict[int, list[int]]) -> tuple[int, ...]:
    """Merge Sylow exponents into invariant factors d_1 | d_2 | ... (ascending)."""
    r = max((len(v) for v in parts.values()), default=0)
    factors = []
    for i in range(r):
        d = 1
        for p, exps in parts.items():
            if i < len(exps):
                d *= p ** exps[i]
        factors.append(d)
    return tuple(sorted(factors))


@lru_cache(maxsize=4096)
def class_group(D: int) -> ClassGroupInfo:
    if not is_fundamental(D):
        raise ValueError(f"{D} is not a fundamental discriminant; apply field_discriminant first")
    G = FormClassGroup(D)
    h_narrow = G.order
    if D < 0:
        return ClassGroupInfo(D, h_narrow, h_narrow, G.invariant_factors())
    minus = pell_minus_solvable(D)
    h = h_narrow if minus else h_narrow // 2
    return ClassGroupInfo(D, h_narrow, h, G.invariant_factors(), minus)


def p_rank(info: ClassGroupInfo, p: int) -> int:
    return sum(1 for d in info.invariant_factors if d % p == 0)


def class_number(n: int) -> int:
    """h of Q(sqrt(n)); 1 for perfect squares."""
    D = field_discriminant(n)
    return 1 if D == 1 else class_group(D).h


def r3(n: int) -> int:
    """3-rank of the class group of Q(sqrt(n)) (narrow group for real fields)."""
    D = field_discriminant(n)
    if D == 1:
        return 0
    return p_rank(class_group(D), 3)


def wide_p_rank(D: int, p: int) -> int:
    """p-rank of the ordinary (wide) class group of fundamental D.

    Only p = 2 can differ from the narrow rank: the wide group is the narrow
    one modulo the order-2 class z of the negated principal form, and
    quotienting by z drops the 2-rank exactly when z is not a square.
    """
    info = class_group(D)
    if D < 0 or p != 2 or info.h == info.h_narrow:
        return p_rank(info, p)
    G = FormClassGroup(D)
    one = principal_form(D)
    z = G.label(QuadForm(-one.a, one.b, -one.c))
    squares = {G.power(x, 2) for x in range(G.order)}
    return p_rank(info, 2) - (z not in squares)
