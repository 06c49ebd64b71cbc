"""Integer sieves, fundamental discriminants and closed-form main terms.

Everything here is plain integer arithmetic backed by numpy arrays. The
sieve is the workhorse for enumerating discriminants in residue classes;
the main-term evaluators keep their coefficients as exact fractions and
only multiply by X/pi^2 at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "SquarefreeSieve",
    "CongruencePair",
    "MainTermParams",
    "build_sieve",
    "primes_up_to",
    "smallest_prime_factors",
    "factorize",
    "euler_phi",
    "squarefree_part",
    "is_squarefree",
    "is_fundamental",
    "field_discriminant",
    "field_discriminants",
    "fundamental_mask",
    "enumerate_discriminants",
    "nh_admissible",
    "s_plus_coefficient",
    "torsion_coefficient",
    "s_plus_main_term",
    "torsion_main_term",
    "c_of_N",
    "phi_ratio_tail",
]


def primes_up_to(n: int) -> np.ndarray:
    """Primes <= n via a boolean Eratosthenes sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def smallest_prime_factors(n: int) -> np.ndarray:
    """spf[k] = least prime dividing k for 2 <= k <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| by trial division."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    step = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


@dataclass(frozen=True)
class SquarefreeSieve:
    """Moebius values and squarefree parts for 1 <= n <= limit.

    Both arrays are indexed directly by n; slot 0 is a placeholder so that
    ``mu[n]`` reads naturally. Use ``mu[1:]`` for the values proper.
    """

    limit: int
    mu: np.ndarray = field(repr=False)
    sqfree_part: np.ndarray = field(repr=False)

    def is_squarefree(self, n: int) -> bool:
        return self.mu[n] != 0

    def squarefree_numbers(self) -> np.ndarray:
        return np.flatnonzero(self.mu != 0)


def build_sieve(limit: int) -> SquarefreeSieve:
    if limit < 1:
        raise ValueError(f"sieve limit must be >= 1, got {limit}")
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    sf = np.arange(limit + 1, dtype=np.int64)
    for p in primes_up_to(limit):
        p = int(p)
        mu[p::p] *= -1
        pp = p * p
        if pp > limit:
            continue
        mu[pp::pp] = 0
        k = pp
        # each p^(2j) | n strips one more p^2 from the squarefree part
        while k <= limit:
            sf[k::k] //= pp
            k *= pp
    mu.setflags(write=False)
    sf.setflags(write=False)
    return SquarefreeSieve(limit, mu, sf)


def squarefree_part(n: int) -> tuple[int, int]:
    """Write n = d * m^2 with d squarefree and sign(d) = sign(n)."""
    if n == 0:
        raise ValueError("squarefree_part(0) is undefined")
    d, m = 1, 1
    for p, e in factorize(n).items():
        m *= p ** (e // 2)
        if e % 2:
            d *= p
    return (d if n > 0 else -d), m


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(n).values())


def is_fundamental(D: int) -> bool:
    """True for discriminants of quadratic fields (D = 1 excluded)."""
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        k = D // 4
        return k % 4 in (2, 3) and is_squarefree(k)
    return False


def field_discriminant(n: int) -> int:
    """Discriminant of Q(sqrt(n)); 1 when n is a perfect square."""
    d, _ = squarefree_part(n)
    if d == 1:
        return 1
    return d if d % 4 == 1 else 4 * d


def fundamental_mask(X: int, sign: int, sieve: SquarefreeSieve | None = None) -> np.ndarray:
    """Boolean array ``ok`` with ok[k] true iff sign*k is a fundamental discriminant, 0 <= k <= X."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    X = int(X)
    ok = np.zeros(X + 1, dtype=bool)
    if X < 3:
        return ok
    if sieve is None or sieve.limit < X:
        sieve = build_sieve(X)
    sqf = sieve.mu[: X + 1] != 0
    k = np.arange(X + 1)
    D = sign * k
    ok |= (D % 4 == 1) & sqf
    quarter = np.zeros(X + 1, dtype=bool)
    q = k[4::4] // 4
    quarter[4::4] = sqf[q] & np.isin((sign * q) % 4, (2, 3))
    ok |= quarter
    ok[:2] = False
    return ok


@dataclass(frozen=True)
class CongruencePair:
    """Residue m modulo N, with a flag for the admissible classes."""

    m: int
    N: int
    admissible: bool = field(init=False)

    def __post_init__(self):
        if self.m < 1 or self.N < 1:
            raise ValueError(f"need m, N >= 1, got m={self.m}, N={self.N}")
        object.__setattr__(self, "admissible", nh_admissible(self.m, self.N))


@dataclass(frozen=True)
class MainTermParams:
    X: float
    pair: CongruencePair
    sign: int = 1

    def __post_init__(self):
        if not self.X > 0:
            raise ValueError(f"X must be positive, got {self.X}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


def nh_admissible(m: int, N: int) -> bool:
    """Congruence conditions under which the average 3-torsion over D = m mod N is unchanged."""
    if m < 1 or N < 1:
        raise ValueError("m and N must be >= 1")
    g = math.gcd(m, N)
    odd_common = [p for p in factorize(g) if p != 2] if g > 1 else []
    for p in odd_common:
        if N % (p * p) != 0 or m % (p * p) == 0:
            return False
    if N % 2 == 0:
        return (N % 4 == 0 and m % 4 == 1) or (N % 16 == 0 and m % 16 in (8, 12))
    return True


def enumerate_discriminants(params: MainTermParams, sieve: SquarefreeSieve | None = None) -> list[int]:
    """Fundamental D with sign(D) = params.sign, |D| <= X and D = m (mod N), by increasing |D|."""
    X = int(math.floor(params.X))
    if X < 1:
        raise ValueError("X must be >= 1")
    ok = fundamental_mask(X, params.sign, sieve)
    ks = np.flatnonzero(ok)
    D = params.sign * ks
    D = D[(D - params.pair.m) % params.pair.N == 0]
    return [int(v) for v in D]


def _local_product(N: int) -> Fraction:
    prod = Fraction(1)
    if N == 1:
        return prod
    for p in factorize(N):
        q = 4 if p == 2 else p
        prod *= Fraction(q, p + 1)
    return prod


def s_plus_coefficient(pair: CongruencePair) -> Fraction:
    """Exact rational c with |S(X, m, N)| ~ c * X / pi^2."""
    if not pair.admissible:
        raise ValueError(f"(m={pair.m}, N={pair.N}) is not admissible")
    return Fraction(3, euler_phi(pair.N)) * _local_product(pair.N)


def torsion_coefficient(pair: CongruencePair) -> Fraction:
    """Exact rational c with sum of 3^r3(D) over S+(X, m, N) ~ c * X / pi^2."""
    if not pair.admissible:
        raise ValueError(f"(m={pair.m}, N={pair.N}) is not admissible")
    return Fraction(4, euler_phi(pair.N)) * _local_product(pair.N)


def s_plus_main_term(params: MainTermParams) -> float:
    return float(s_plus_coefficient(params.pair)) * params.X / math.pi**2


def torsion_main_term(params: MainTermParams) -> float:
    return float(torsion_coefficient(params.pair)) * params.X / math.pi**2


def c_of_N(N: float) -> float:
    if N < 1:
        raise ValueError("N must be >= 1")
    return 1.0 / (5.0 * math.sqrt(math.log(N) ** 2 + 1.0))


def _phi_table(limit: int) -> np.ndarray:
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in primes_up_to(limit):
        p = int(p)
        phi[p::p] -= phi[p::p] // p
    return phi


def phi_ratio_tail(x: float, limit: int) -> float:
    """Fraction of 1 <= n <= limit with n / phi(n) > x."""
    if x < 1 or limit < 1:
        raise ValueError("need x >= 1 and limit >= 1")
    phi = _phi_table(limit)[1:]
    n = np.arange(1, limit + 1, dtype=np.int64)
    return float(np.count_nonzero(n > x * phi)) / limit


def field_discriminants(ns, sieve: SquarefreeSieve | None = None) -> np.ndarray:
    """Vectorized ``field_discriminant`` for an integer array (1 marks perfect squares)."""
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return ns.copy()
    if np.any(ns == 0):
        raise ValueError("0 has no field discriminant")
    top = int(np.abs(ns).max())
    if sieve is None or sieve.limit < top:
        sieve = build_sieve(max(top, 1))
    d = np.sign(ns) * sieve.sqfree_part[np.abs(ns)]
    D = np.where(d % 4 == 1, d, 4 * d)
    D[d == 1] = 1
    return D
