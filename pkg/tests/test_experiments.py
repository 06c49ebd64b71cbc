import csv
import io
import json
import math

import numpy as np
import pytest

from threerank.core_arith import field_discriminant, is_fundamental, is_squarefree
from threerank.experiments import (
    PUBLISHED_TABLE,
    Domain,
    WindowReport,
    avg_torsion,
    biquad_grid,
    byeon_fraction,
    byeon_pair_count,
    composite_torsion,
    gauss_parity_check,
    indiv_density,
    parse_domain,
    reproduce_table,
    scholz_check,
    scholz_scan,
    to_csv,
    to_json,
    verify_window,
    window_search,
)
from threerank.quad_class import class_group, class_number, r3, wide_p_rank


def test_parse_domain():
    assert parse_domain("naturals") == Domain("naturals")
    assert parse_domain("fundamental:1:4:+") == Domain("fundamental", 1, 4, 1)
    assert parse_domain("fundamental:1:1:-").tag == "fundamental(1,1,-)"
    for bad in ("primes", "fundamental:2:4:+", "fundamental:1:4", "fundamental:1:4:x", "naturals:3"):
        with pytest.raises(ValueError):
            parse_domain(bad)


def test_domain_members():
    ns, norm = Domain("multiples-of-3").members(30)
    assert ns.tolist() == list(range(3, 31, 3)) and norm == 10
    ns, norm = Domain("squarefree").members(10)
    assert ns.tolist() == [1, 2, 3, 5, 6, 7, 10] and norm == 10
    ns, norm = Domain("fundamental", sign=-1).members(20)
    assert sorted(ns.tolist()) == [-20, -19, -15, -11, -8, -7, -4, -3] and norm == 8


@pytest.mark.parametrize("dom", ["naturals", "squarefree", "multiples-of-3", "fundamental:1:1:+", "fundamental:1:1:-", "fundamental:1:4:+"])
def test_avg_torsion_matches_brute(dom):
    X = 1500
    d = parse_domain(dom)
    ns, norm = d.members(X)
    want = sum(3 ** r3(int(n)) for n in ns) / norm
    assert avg_torsion(X, dom) == pytest.approx(want, rel=1e-12)


def test_avg_torsion_other_prime():
    X = 800
    ns = range(1, X + 1)
    want = sum(5 ** class_group(field_discriminant(n)).p_rank(5) if field_discriminant(n) != 1 else 1 for n in ns) / X
    assert avg_torsion(X, "naturals", p=5) == pytest.approx(want)
    with pytest.raises(ValueError):
        avg_torsion(100, "naturals", p=2)
    with pytest.raises(ValueError):
        avg_torsion(100, "naturals", p=9)


def test_indiv_density():
    rep = indiv_density(2000, 1)
    want = sum(1 for n in range(1, 2001) if r3(n) < 1) / 2000
    assert rep.fraction == pytest.approx(want)
    assert rep.bound == pytest.approx((3 - 4 / 3) / 2)
    neg = indiv_density(2000, 2, "fundamental:1:1:-")
    assert neg.bound == pytest.approx((9 - 2) / 8)
    with pytest.raises(ValueError):
        indiv_density(100, 0)


def test_composite_torsion():
    X = 1500
    D = [d for d in range(2, X + 1) if is_fundamental(d)]
    want6 = sum(2 ** wide_p_rank(d, 2) * 3 ** class_group(d).p_rank(3) for d in D) / len(D)
    assert composite_torsion(X, 6) == pytest.approx(want6)
    assert composite_torsion(X, 3) == pytest.approx(avg_torsion(X, "fundamental:1:1:+"))
    for bad in (1, 4, 12):
        with pytest.raises(ValueError):
            composite_torsion(X, bad)


def brute_window(lo, hi, k, n, exclude_squares=False):
    q = 3**k
    out = []
    for d in range(lo, hi + 1):
        if exclude_squares and math.isqrt(d) ** 2 == d:
            continue
        if all(class_number(d + j) % q for j in range(n + 1)):
            out.append(d)
    return out


def test_window_naturals():
    rep = window_search(2, 600, 1, 4)
    assert list(rep.hits) == brute_window(2, 600, 1, 4)
    ex = window_search(2, 600, 1, 4, exclude_squares=True)
    assert list(ex.hits) == brute_window(2, 600, 1, 4, True)
    assert verify_window(rep) == []
    assert window_search(1, 300, 2, 6).hits == tuple(brute_window(1, 300, 2, 6))


def test_window_squarefree():
    rep = window_search(1, 500, 1, 3, "squarefree")
    sf = [v for v in range(1, 700) if is_squarefree(v)]
    want = [i + 1 for i, v in enumerate(sf) if v <= 500 and all(class_number(sf[i + j]) % 3 for j in range(4))]
    assert list(rep.hits) == want
    assert verify_window(rep) == []


def test_window_negatives():
    rep = window_search(-600, -1, 1, 3, "negatives")
    assert rep.hi == -4
    want = [d for d in range(-600, -3) if all(class_number(d + j) % 3 for j in range(4))]
    assert list(rep.hits) == want
    assert verify_window(rep) == []
    assert window_search(-3, -1, 1, 5, "negatives").hits == ()


def test_verify_window_catches_forgery():
    # h(229) = 3 and h(-23) = 3, so windows containing them are not hits
    assert verify_window(WindowReport("naturals", 1, 0, (229, 5), 1, 300)) == [229]
    assert verify_window(WindowReport("naturals", 1, 2, (227,), 1, 300)) == [227]
    assert verify_window(WindowReport("negatives", 1, 1, (-24, -1), -30, -1)) == [-24, -1]


def test_window_rejects():
    with pytest.raises(ValueError):
        window_search(0, 10, 1, 2)
    with pytest.raises(ValueError):
        window_search(10, 1, 1, 2)
    with pytest.raises(ValueError):
        window_search(1, 10, 1, 2, "evens")


def test_reproduce_table_first_row():
    (row,) = reproduce_table([(2, 200)])
    assert row.countD == 199 - 13
    assert row.countS == len(brute_window(2, 200, 1, 4, True))
    assert row.paperD is None
    full = reproduce_table([PUBLISHED_TABLE[0][:2]])[0]
    assert (full.paperD, full.paperS) == (1851, 1392)
    assert full.published_ratio == pytest.approx(1392 / 1851)


def test_scholz():
    assert scholz_check(1) == (0, 0, True)
    r, s, ok = scholz_check(229)
    assert r == 1 and s in (1, 2) and ok
    assert scholz_scan(1000) == []
    with pytest.raises(ValueError):
        scholz_check(12)


def test_byeon_fraction():
    Y = 1500
    D = [d for d in range(2, Y + 1) if is_fundamental(d) and (d - 1) % 3 == 0]
    want = sum(1 for d in D if class_number(d) % 3 and class_number(-d) % 3) / len(D)
    assert byeon_fraction(Y, 1, -1) == pytest.approx(want)
    for m, t in [(1, -2), (3, -1), (1, 1), (1, -9)]:
        with pytest.raises(ValueError):
            byeon_fraction(Y, m, t)


def test_biquad():
    rep = biquad_grid(5, 300)
    want = sum(
        1
        for t in range(-5, 0)
        for d in range(1, 301)
        if class_number(t) % 3 and class_number(d) % 3 and class_number(t * d) % 3
    )
    assert rep.count == want and rep.normalized == pytest.approx(want / 1500)
    assert biquad_grid(1, 400).count == byeon_pair_count(400, -1)
    with pytest.raises(ValueError):
        biquad_grid(0, 5)
    with pytest.raises(ValueError):
        byeon_pair_count(5, 2)


def test_gauss_parity():
    assert gauss_parity_check(3000)
    with pytest.raises(ValueError):
        gauss_parity_check(2)


def test_serialization():
    rep = indiv_density(500, 1)
    rows = list(csv.DictReader(io.StringIO(to_csv(rep))))
    assert list(rows[0]) == ["X", "k", "fraction", "bound"]
    w = window_search(2, 100, 1, 2)
    text = to_csv(w)
    assert text.splitlines()[0] == "domain,k,n,hit"
    assert len(text.splitlines()) == len(w.hits) + 1
    assert json.loads(to_json(w))["hits"] == list(w.hits)
    table = reproduce_table([(2, 100), (101, 200)])
    assert to_csv(table).splitlines()[0] == "x,y,countD,countS,paperD,paperS"
    assert len(json.loads(to_json(table))) == 2


# ------------------------------------------------------------ worked examples


def test_window_contains_five():
    rep = window_search(2, 100, 1, 4)
    assert 5 in rep.hits
    assert [class_number(v) % 3 for v in range(5, 10)] == [1, 1, 1, 1, 1]


def test_window_count_matches_table_row():
    (row,) = reproduce_table([(2, 2000)])
    assert len(window_search(2, 2000, 1, 4, exclude_squares=True).hits) == row.countS


def test_table_partition_invariance():
    whole = reproduce_table([(2, 3000)])[0]
    parts = reproduce_table([(2, 1000), (1001, 2200), (2201, 3000)])
    assert sum(r.countS for r in parts) == whole.countS
    assert sum(r.countD for r in parts) == whole.countD
    assert all(r.countS <= r.countD <= r.y - r.x + 1 for r in parts)


def test_later_published_row_attached():
    row = reproduce_table([(30001, 31000)])[0]
    assert (row.paperD, row.paperS) == (892, 553)


def test_scholz_79():
    r, s, ok = scholz_check(79)
    assert r == 1 and s in (1, 2) and ok


@pytest.mark.parametrize("t, m", [(-1, 1), (-7, 1)])
def test_byeon_lower_bound(t, m):
    assert byeon_fraction(10**4, m, t) >= 1 / 3 - 0.05


def test_byeon_empty_domain():
    with pytest.raises(ValueError):
        byeon_fraction(4, 1, -1)


def test_biquad_small_pair_and_monotone():
    assert class_number(-1) == class_number(2) == class_number(-2) == 1
    assert biquad_grid(1, 2).count == 2
    counts = [biquad_grid(x, y).count for x, y in [(5, 200), (5, 400), (10, 400), (20, 800)]]
    assert counts == sorted(counts)
    assert biquad_grid(50, 2000).normalized > 0


def test_gauss_parity_small():
    assert gauss_parity_check(100) and gauss_parity_check(3)


def test_composite_torsion_values_finite():
    for m in (6, 15):
        v = composite_torsion(10**4, m)
        assert 1 < v < 10


def test_density_bounds_at_1e5():
    assert indiv_density(10**5, 1).fraction >= 5 / 6
    assert indiv_density(10**5, 1, "fundamental:1:1:+").fraction >= 5 / 6
    assert indiv_density(10**5, 1, "fundamental:1:1:-").fraction >= 1 / 2


def test_multiples_of_three_average():
    assert avg_torsion(10**5, "multiples-of-3") == pytest.approx(4 / 3, abs=0.2)


@pytest.mark.xfail(strict=True, reason="squarefree sum is about 7.7% under 8X/pi^2 at 1e5")
def test_squarefree_sum_within_seven_percent():
    X = 10**5
    total = avg_torsion(X, "squarefree") * X
    ratio = total / (8 * X / math.pi**2)
    print(f"squarefree sum / (8X/pi^2) = {ratio:.4f}")
    assert abs(ratio - 1) <= 0.07
