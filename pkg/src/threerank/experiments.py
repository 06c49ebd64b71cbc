"""Finite-range experiments on 3-divisibility of quadratic class numbers.

Each function returns plain numbers or a small report dataclass; reports
serialize to CSV and JSON with fixed column order. Bulk class numbers and
ranks come from a ``ClassGroupTable``; window hits can be re-checked with
an uncached pure-Python computation via ``verify_window``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Iterable

import numpy as np

from .core_arith import (
    CongruencePair,
    build_sieve,
    factorize,
    field_discriminant,
    field_discriminants,
    fundamental_mask,
    is_squarefree,
    primes_up_to,
)
from .quad_class.forms import (
    enumerate_reduced_definite,
    enumerate_reduced_indefinite,
    pell_minus_solvable,
)
from .quad_class.group import wide_p_rank
from .quad_class.table import ClassGroupTable, default_table

__all__ = [
    "Domain",
    "TableRow",
    "WindowReport",
    "DensityReport",
    "BiquadGridReport",
    "PUBLISHED_TABLE",
    "parse_domain",
    "avg_torsion",
    "indiv_density",
    "window_search",
    "verify_window",
    "reproduce_table",
    "scholz_check",
    "scholz_scan",
    "byeon_fraction",
    "byeon_pair_count",
    "biquad_grid",
    "gauss_parity_check",
    "composite_torsion",
    "to_csv",
    "to_json",
]

# (x, y, #D[x,y], #S[x,y]) as published
PUBLISHED_TABLE: tuple[tuple[int, int, int, int], ...] = (
    (2, 2000, 1851, 1392),
    (2001, 4000, 1839, 1358),
    (4001, 6000, 1831, 1312),
    (6001, 8000, 1819, 1274),
    (8001, 10000, 1819, 1256),
    (10001, 12000, 1803, 1213),
    (12001, 14000, 1814, 1279),
    (14001, 16000, 1801, 1190),
    (16001, 18000, 1810, 1231),
    (18001, 20000, 1809, 1266),
    (20001, 22000, 1796, 1196),
    (22001, 24000, 1807, 1230),
    (24001, 26000, 1799, 1203),
    (26001, 28000, 1790, 1186),
    (28001, 30000, 1801, 1218),
    (30001, 31000, 892, 553),
    (31001, 32000, 902, 577),
    (32001, 33000, 895, 573),
    (33001, 34000, 893, 576),
    (34001, 35000, 891, 566),
)


# ------------------------------------------------------------ domains


@dataclass(frozen=True)
class Domain:
    """Set of integers an average or density is taken over.

    ``kind`` is one of ``naturals``, ``squarefree``, ``multiples-of-3`` or
    ``fundamental``; the last uses the residue class m mod N and a sign.
    """

    kind: str
    m: int = 1
    N: int = 1
    sign: int = 1

    KINDS = ("naturals", "squarefree", "multiples-of-3", "fundamental")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown domain {self.kind!r}; expected one of {self.KINDS}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind == "fundamental" and not CongruencePair(self.m, self.N).admissible:
            raise ValueError(f"(m={self.m}, N={self.N}) is not admissible")

    @property
    def tag(self) -> str:
        if self.kind == "fundamental":
            return f"fundamental({self.m},{self.N},{'+' if self.sign > 0 else '-'})"
        return self.kind

    def members(self, X: int) -> tuple[np.ndarray, float]:
        """(integers n in the domain up to X, normalizer)."""
        X = int(X)
        if X < 1:
            raise ValueError("X must be >= 1")
        n = np.arange(1, X + 1, dtype=np.int64)
        if self.kind == "naturals":
            return n, float(X)
        if self.kind == "squarefree":
            sieve = build_sieve(X)
            return n[sieve.mu[1:] != 0], float(X)
        if self.kind == "multiples-of-3":
            return n[n % 3 == 0], X / 3
        ks = np.flatnonzero(fundamental_mask(X, self.sign))
        D = self.sign * ks
        D = D[(D - self.m) % self.N == 0]
        return D.astype(np.int64), float(D.size)

    def bound_offset(self) -> Fraction:
        """Limit of the average 3-torsion on this domain."""
        if self.kind == "fundamental" and self.sign < 0:
            return Fraction(2)
        return Fraction(4, 3)


def parse_domain(text: str) -> Domain:
    """Parse ``naturals``, ``squarefree``, ``multiples-of-3`` or ``fundamental:m:N:sign``."""
    parts = text.strip().split(":")
    if parts[0] != "fundamental":
        if len(parts) != 1:
            raise ValueError(f"bad domain {text!r}")
        return Domain(parts[0])
    if len(parts) != 4:
        raise ValueError(f"bad domain {text!r}; use fundamental:m:N:sign")
    sign = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}.get(parts[3])
    if sign is None:
        raise ValueError(f"bad sign {parts[3]!r}")
    return Domain("fundamental", int(parts[1]), int(parts[2]), sign)


def _ranks(ns: np.ndarray, p: int, table: ClassGroupTable) -> np.ndarray:
    return table.p_ranks(field_discriminants(ns), p)


# ------------------------------------------------------------ reports


@dataclass(frozen=True)
class TableRow:
    x: int
    y: int
    countD: int
    countS: int
    paperD: int | None = None
    paperS: int | None = None

    @property
    def ratio(self) -> float:
        return self.countS / self.countD if self.countD else float("nan")

    @property
    def published_ratio(self) -> float | None:
        if self.paperD is None or self.paperS is None:
            return None
        return self.paperS / self.paperD


@dataclass(frozen=True)
class DensityReport:
    X: int
    k: int
    fraction: float
    bound: float
    domain: str = "naturals"

    CSV_FIELDS = ("X", "k", "fraction", "bound")


@dataclass(frozen=True)
class WindowReport:
    domain: str
    k: int
    n: int
    hits: tuple[int, ...]
    lo: int = 0
    hi: int = 0

    def rows(self) -> list[dict]:
        return [{"domain": self.domain, "k": self.k, "n": self.n, "hit": h} for h in self.hits]

    CSV_FIELDS = ("domain", "k", "n", "hit")


@dataclass(frozen=True)
class BiquadGridReport:
    X: int
    Y: int
    count: int
    normalized: float


def _records(reports) -> tuple[list[str], list[dict]]:
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    if not reports:
        return [], []
    first = reports[0]
    if isinstance(first, WindowReport):
        rows = [r for rep in reports for r in rep.rows()]
        return list(WindowReport.CSV_FIELDS), rows
    names = list(getattr(first, "CSV_FIELDS", [f.name for f in fields(first)]))
    return names, [{k: getattr(r, k) for k in names} for r in reports]


def to_csv(reports) -> str:
    names, rows = _records(reports)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else v) for k, v in r.items()})
    return buf.getvalue()


def to_json(reports) -> str:
    if isinstance(reports, WindowReport):
        return json.dumps(asdict(reports) | {"hits": list(reports.hits)}, indent=2)
    names, rows = _records(reports)
    return json.dumps(rows, indent=2)


# ------------------------------------------------------------ averages


def avg_torsion(X: int, domain: Domain | str = "naturals", p: int = 3, table: ClassGroupTable | None = None) -> float:
    """Sum of p^r_p over the domain, divided by its normalizer.

    Normalizers: X for naturals and squarefree, X/3 for multiples of 3 and
    the domain size for fundamental discriminants. Real fields use the
    narrow class group, whose odd part is the same as the wide one; p must
    therefore be odd.
    """
    if p < 3 or factorize(p) != {p: 1}:
        raise ValueError("p must be an odd prime")
    dom = parse_domain(domain) if isinstance(domain, str) else domain
    table = default_table() if table is None else table
    ns, norm = dom.members(X)
    if norm == 0:
        raise ValueError("domain is empty")
    r = _ranks(ns, p, table)
    return float(np.sum(np.power(float(p), r))) / norm


def indiv_density(X: int, k: int, domain: Domain | str = "naturals", table: ClassGroupTable | None = None) -> DensityReport:
    """Fraction of the domain with r3 < k, next to the bound (3^k - mu)/(3^k - 1).

    mu is the limiting average of 3^r3: 4/3, or 2 for negative fundamental
    discriminants.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dom = parse_domain(domain) if isinstance(domain, str) else domain
    table = default_table() if table is None else table
    ns, _ = dom.members(X)
    if ns.size == 0:
        raise ValueError("domain is empty")
    r = _ranks(ns, 3, table)
    frac = float(np.count_nonzero(r < k)) / ns.size
    mu = dom.bound_offset()
    bound = float((3**k - mu) / (3**k - 1))
    return DensityReport(int(X), k, frac, bound, dom.tag)


def composite_torsion(X: int, m: int, table: ClassGroupTable | None = None) -> float:
    """Average over fundamental 0 < D <= X of prod_{p | m} p^r_p(D), ordinary class group."""
    if m <= 1 or not is_squarefree(m):
        raise ValueError("m must be a squarefree integer > 1")
    table = default_table() if table is None else table
    D = np.flatnonzero(fundamental_mask(int(X), 1)).astype(np.int64)
    if D.size == 0:
        raise ValueError("no fundamental discriminants up to X")
    total = np.ones(D.size, dtype=float)
    for p in sorted(factorize(m)):
        if p == 2:
            r = np.array([wide_p_rank(int(d), 2) for d in D], dtype=np.int64)
        else:
            r = table.p_ranks(D, p)
        total *= np.power(float(p), r)
    return float(total.sum()) / D.size


# ------------------------------------------------------------ windows


def _indivisible(ns: np.ndarray, k: int, table: ClassGroupTable) -> np.ndarray:
    h = table.class_numbers_of(ns)
    return h % 3**k != 0


def _window_ok(good: np.ndarray, n: int) -> np.ndarray:
    """ok[i] = all(good[i : i + n + 1])."""
    if good.size < n + 1:
        return np.zeros(0, dtype=bool)
    c = np.concatenate([[0], np.cumsum(~good)])
    return (c[n + 1 :] - c[: -(n + 1)]) == 0


def window_search(
    lo: int,
    hi: int,
    k: int,
    n: int,
    domain: str = "naturals",
    exclude_squares: bool = False,
    table: ClassGroupTable | None = None,
) -> WindowReport:
    """Starting points whose next n+1 class numbers are all prime to 3^k.

    naturals: starts d in [lo, hi], window d..d+n (a square entry has h = 1);
    ``exclude_squares`` drops square starting points.
    squarefree: starts d_i in [lo, hi] with d_i the i-th squarefree number;
    hits are the 1-based indices i.
    negatives: starts d in [lo, hi] with d + n < 0.
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if lo > hi:
        raise ValueError("empty range")
    table = default_table() if table is None else table
    if domain == "naturals":
        if lo < 1:
            raise ValueError("naturals need lo >= 1")
        ns = np.arange(lo, hi + n + 1, dtype=np.int64)
        ok = _window_ok(_indivisible(ns, k, table), n)
        starts = np.arange(lo, hi + 1, dtype=np.int64)
        if exclude_squares:
            roots = np.floor(np.sqrt(starts.astype(float))).astype(np.int64)
            ok &= ~((roots * roots == starts) | ((roots + 1) ** 2 == starts))
        hits = starts[ok]
    elif domain == "squarefree":
        if lo < 1:
            raise ValueError("squarefree needs lo >= 1")
        # enough squarefree numbers past hi to close every window
        top = hi + 4 * n + 16
        while True:
            sf = np.flatnonzero(build_sieve(top).mu != 0).astype(np.int64)
            if np.count_nonzero(sf > hi) >= n:
                break
            top *= 2
        ok = _window_ok(_indivisible(sf, k, table), n)
        idx = np.arange(1, ok.size + 1, dtype=np.int64)
        vals = sf[: ok.size]
        hits = idx[ok & (vals >= lo) & (vals <= hi)]
    elif domain == "negatives":
        hi = min(hi, -n - 1)
        if lo > hi:
            return WindowReport(domain, k, n, (), lo, hi)
        ns = np.arange(lo, hi + n + 1, dtype=np.int64)
        ok = _window_ok(_indivisible(ns, k, table), n)
        hits = np.arange(lo, hi + 1, dtype=np.int64)[ok]
    else:
        raise ValueError(f"unknown window domain {domain!r}")
    return WindowReport(domain, k, n, tuple(int(h) for h in hits), lo, hi)


def _class_number_direct(n: int) -> int:
    """h of Q(sqrt(n)) straight from reduced forms, with no caching."""
    D = field_discriminant(n)
    if D == 1:
        return 1
    if D < 0:
        return len(enumerate_reduced_definite(D))
    h_narrow = len(enumerate_reduced_indefinite(D))
    return h_narrow if pell_minus_solvable(D) else h_narrow // 2


def _squarefree_list(count: int) -> list[int]:
    out, x = [], 0
    while len(out) < count:
        x += 1
        if is_squarefree(x):
            out.append(x)
    return out


def verify_window(report: WindowReport) -> list[int]:
    """Hits that fail an independent recomputation (empty list means all verified)."""
    q = 3**report.k
    memo: dict[int, int] = {}

    def h(v: int) -> int:
        if v not in memo:
            memo[v] = _class_number_direct(v)
        return memo[v]

    bad = []
    if report.domain == "squarefree":
        sf = _squarefree_list(max(report.hits, default=0) + report.n)
        for i in report.hits:
            if any(h(sf[i - 1 + j]) % q == 0 for j in range(report.n + 1)):
                bad.append(i)
        return bad
    for d in report.hits:
        if report.domain == "negatives" and d + report.n >= 0:
            bad.append(d)
        elif any(h(d + j) % q == 0 for j in range(report.n + 1)):
            bad.append(d)
    return bad


def reproduce_table(ranges: Iterable[tuple[int, int]] | None = None, table: ClassGroupTable | None = None) -> list[TableRow]:
    """Non-square d in [x, y] and those whose five fields d..d+4 have h prime to 3."""
    ranges = [(x, y) for x, y, _, _ in PUBLISHED_TABLE] if ranges is None else list(ranges)
    table = default_table() if table is None else table
    published = {(x, y): (pd, ps) for x, y, pd, ps in PUBLISHED_TABLE}
    rows = []
    for x, y in ranges:
        if x < 1 or y < x:
            raise ValueError(f"bad range ({x}, {y})")
        squares = math.isqrt(y) - math.isqrt(x - 1)
        countD = (y - x + 1) - squares
        rep = window_search(x, y, 1, 4, "naturals", exclude_squares=True, table=table)
        pd, ps = published.get((x, y), (None, None))
        rows.append(TableRow(x, y, countD, len(rep.hits), pd, ps))
    return rows


# ------------------------------------------------------------ reflection, pairs


def scholz_check(d: int, table: ClassGroupTable | None = None) -> tuple[int, int, bool]:
    """(r3 of Q(sqrt d), r3 of Q(sqrt(-3d)), whether r <= s <= r + 1)."""
    if d < 1 or not is_squarefree(d):
        raise ValueError("d must be a positive squarefree integer")
    table = default_table() if table is None else table
    r, s = (int(v) for v in table.p_ranks_of([d, -3 * d], 3))
    return r, s, r <= s <= r + 1


def scholz_scan(X: int, table: ClassGroupTable | None = None) -> list[tuple[int, int, int]]:
    """(d, r, s) for every squarefree d <= X violating r <= s <= r + 1."""
    table = default_table() if table is None else table
    ds = np.flatnonzero(build_sieve(X).mu != 0).astype(np.int64)
    r = table.p_ranks_of(ds, 3)
    s = table.p_ranks_of(-3 * ds, 3)
    bad = ~((r <= s) & (s <= r + 1))
    return [(int(d), int(a), int(b)) for d, a, b in zip(ds[bad], r[bad], s[bad])]


def byeon_fraction(Y: int, m: int, t: int, table: ClassGroupTable | None = None) -> float:
    """Share of d in S+(Y, m, 3|t|) with 3 prime to both h(Q(sqrt d)) and h(Q(sqrt(t d))).

    The modulus is taken positive, 3|t|.
    """
    if t >= 0 or t % 2 == 0 or not is_squarefree(t):
        raise ValueError("t must be a negative odd squarefree integer")
    N = 3 * abs(t)
    if math.gcd(m, N) != 1:
        raise ValueError(f"need gcd(m, 3t) = 1, got m={m}, t={t}")
    if not CongruencePair(m % N or N, N).admissible:
        raise ValueError(f"(m={m}, N={N}) is not admissible")
    table = default_table() if table is None else table
    D = np.flatnonzero(fundamental_mask(int(Y), 1)).astype(np.int64)
    D = D[(D - m) % N == 0]
    if D.size == 0:
        raise ValueError(f"S+(Y={Y}, m={m}, N={N}) is empty")
    good = (table.class_numbers(D) % 3 != 0) & (table.class_numbers_of(t * D) % 3 != 0)
    return float(np.count_nonzero(good)) / D.size


def _pair_mask(ts: np.ndarray, ds: np.ndarray, table: ClassGroupTable) -> np.ndarray:
    ht = table.class_numbers_of(ts) % 3 != 0
    hd = table.class_numbers_of(ds) % 3 != 0
    prod = np.multiply.outer(ts, ds)
    htd = (table.class_numbers_of(prod.ravel()) % 3 != 0).reshape(prod.shape)
    return ht[:, None] & hd[None, :] & htd


def byeon_pair_count(Y: int, t: int, table: ClassGroupTable | None = None) -> int:
    """#{1 <= d <= Y : 3 prime to h(Q(sqrt t)), h(Q(sqrt d)) and h(Q(sqrt(t d)))}."""
    if t >= 0:
        raise ValueError("t must be negative")
    table = default_table() if table is None else table
    return int(_pair_mask(np.array([t], dtype=np.int64), np.arange(1, Y + 1, dtype=np.int64), table).sum())


def biquad_grid(X: int, Y: int, table: ClassGroupTable | None = None) -> BiquadGridReport:
    """Pairs -X <= t <= -1, 1 <= d <= Y with 3 prime to h at t, d and t d.

    Each such pair gives an imaginary biquadratic field with class number
    prime to 3, since that class number divides the product of the three
    quadratic ones up to a factor 2.
    """
    if X < 1 or Y < 1:
        raise ValueError("X and Y must be >= 1")
    table = default_table() if table is None else table
    ts = -np.arange(1, X + 1, dtype=np.int64)
    ds = np.arange(1, Y + 1, dtype=np.int64)
    count = int(_pair_mask(ts, ds, table).sum())
    return BiquadGridReport(int(X), int(Y), count, count / (X * Y))


def gauss_parity_check(X: int, table: ClassGroupTable | None = None) -> bool:
    """h(Q(sqrt(-p))) is odd for every prime p = 3 mod 4 up to X."""
    if X < 3:
        raise ValueError("X must be >= 3")
    table = default_table() if table is None else table
    ps = primes_up_to(X)
    ps = ps[ps % 4 == 3]
    return bool(np.all(table.class_numbers(-ps) % 2 == 1))
