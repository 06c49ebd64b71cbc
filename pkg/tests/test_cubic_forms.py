import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threerank.core_arith import CongruencePair, factorize
from threerank.cubic_forms import (
    ClassInventory,
    CubicForm,
    act,
    apply_filter,
    canonical_class_rep,
    disc_congruence_filter,
    disc_cubic,
    disc_not_divisible_filter,
    dh_checksum,
    dh_mismatches,
    enumerate_classes,
    hessian,
    is_irreducible,
    is_maximal,
    is_primitive,
    merge_inventories,
    non_maximal_primes,
)

GENS = [((1, 1), (0, 1)), ((1, -1), (0, 1)), ((0, -1), (1, 0)), ((1, 0), (0, -1))]


def mul(g, h):
    return (
        (g[0][0] * h[0][0] + g[0][1] * h[1][0], g[0][0] * h[0][1] + g[0][1] * h[1][1]),
        (g[1][0] * h[0][0] + g[1][1] * h[1][0], g[1][0] * h[0][1] + g[1][1] * h[1][1]),
    )


words = st.lists(st.integers(0, 3), min_size=1, max_size=10)


def word_matrix(w):
    g = ((1, 0), (0, 1))
    for i in w:
        g = mul(g, GENS[i])
    return g


@pytest.mark.parametrize(
    "F, D", [((1, 0, -1, 0), 4), ((1, 1, -2, -1), 49), ((1, 0, 1, 1), -31), ((1, -1, 1, 1), -44), ((0, 1, 1, 0), 1)]
)
def test_disc_examples(F, D):
    assert disc_cubic(F) == D
    assert CubicForm(*F).disc == D


def test_hessian():
    assert hessian((1, 0, 0, 1)) == (0, -9, 0)
    for F in [(1, 0, 1, 1), (2, 1, 3, 5), (1, 1, -2, -1)]:
        P, Q, R = hessian(F)
        assert Q * Q - 4 * P * R == -3 * disc_cubic(F)


@settings(max_examples=300)
@given(st.tuples(*[st.integers(-6, 6)] * 4), words)
def test_act_preserves_disc(F, w):
    g = word_matrix(w)
    assert act(g, F).disc == disc_cubic(F)


def test_act_rejects_non_unimodular():
    with pytest.raises(ValueError):
        act(((2, 0), (0, 1)), (1, 0, 1, 1))


def test_predicates():
    assert is_primitive((2, 4, 6, 3)) and not is_primitive((2, 4, 6, 8))
    assert not is_irreducible((1, 0, -1, 0))
    assert not is_irreducible((2, 1, 1, -1))  # root 1/2
    assert is_irreducible((1, 0, 1, 1))


def test_irreducible_matches_root_search():
    for F in itertools.product(range(-3, 4), repeat=4):
        if F[0] == 0 or disc_cubic(F) == 0:
            continue
        has_root = any(
            CubicForm(*F)(x, y) == 0 for x in range(-30, 31) for y in range(1, 31) if math.gcd(x, y) == 1
        )
        assert is_irreducible(F) == (not has_root)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([(1, 0, 1, 1), (1, -1, 1, 1), (1, 1, -2, -1), (1, 0, -3, 1), (2, 1, 3, 5), (1, 0, -4, 1), (3, 1, -2, 7)]), words)
def test_canonical_rep_is_class_invariant(F, w):
    G = act(word_matrix(w), F)
    assert canonical_class_rep(G) == canonical_class_rep(F)


def test_canonical_rep_idempotent_and_examples():
    assert canonical_class_rep((1, 0, 1, 1)).disc == -31
    r = canonical_class_rep((1, -1, 1, 1))
    assert canonical_class_rep(r) == r
    with pytest.raises(ValueError):
        canonical_class_rep((1, 0, -1, 0))
    with pytest.raises(ValueError):
        canonical_class_rep((2, 0, 2, 2))


def naive_classes(X, sign, box=10):
    reps = set()
    for F in itertools.product(range(-box, box + 1), repeat=4):
        D = disc_cubic(F)
        if D == 0 or (D > 0) != (sign > 0) or abs(D) > X:
            continue
        if is_primitive(F) and is_irreducible(F):
            reps.add(canonical_class_rep(F))
    return reps


@pytest.mark.slow
@pytest.mark.parametrize("sign", [1, -1])
def test_enumeration_matches_box_scan(sign):
    inv = enumerate_classes(200, sign)
    assert set(inv.representatives()) == naive_classes(200, sign)


def test_small_discriminant_counts():
    neg = enumerate_classes(50, -1)
    assert neg.count(-23) == 1 and neg.count(-31) == 1 and neg.count(-44) == 1
    pos = enumerate_classes(400, 1)
    assert pos.count(49) == 1 and pos.count(81) == 1
    assert pos.count(316) == 1
    assert min(pos.classes) == 49 and max(neg.classes) == -23


def brute_nonmaximal(F, p):
    """Direct search for gamma mod p^2 putting F in the shape p^2 | a', p | b'."""
    q = p * p
    for x, y in itertools.product(range(q), repeat=2):
        if math.gcd(math.gcd(x, y), p) != 1:
            continue
        a = CubicForm(*F)(x, y) % q
        if a:
            continue
        # b' is the derivative of F at (x, y) in the direction (u, v)
        for u, v in itertools.product(range(p), repeat=2):
            if (x * v - y * u) % p == 0:
                continue
            b = (3 * F[0] * x * x * u + F[1] * (x * x * v + 2 * x * y * u) + F[2] * (2 * x * y * v + y * y * u) + 3 * F[3] * y * y * v)
            if b % p == 0:
                return True
    return False


def test_maximality_against_brute_force():
    inv = enumerate_classes(3000, 1)
    inv2 = enumerate_classes(2000, -1)
    for D, reps in list(inv.classes.items()) + list(inv2.classes.items()):
        for F, m in reps:
            bad = [p for p, e in factorize(abs(D)).items() if e >= 2 and brute_nonmaximal(F, p)]
            assert non_maximal_primes(F) == bad
            assert m == (not bad) == is_maximal(F)


def test_nonmaximal_implies_square_divisor():
    inv = enumerate_classes(2000, -1)
    for D, reps in inv.classes.items():
        for F, m in reps:
            for p in non_maximal_primes(F):
                assert D % (p * p) == 0


def test_filters_match_recount():
    inv = enumerate_classes(500, -1)
    flts = [disc_not_divisible_filter(p) for p in (2, 3, 5, 7, 11, 13)]
    kept = apply_filter(inv, flts)
    want = {D for D in inv.classes if all(D % (p * p) for p in (2, 3, 5, 7, 11, 13))}
    assert set(kept.classes) == want
    assert all(kept.classes[D] == inv.classes[D] for D in want)

    pos = enumerate_classes(200, 1)
    one4 = apply_filter(pos, [disc_congruence_filter(2, 2, [1])])
    assert set(one4.classes) == {D for D in pos.classes if D % 4 == 1}
    assert disc_congruence_filter(2, 2, [1]).modulus == 4
    with pytest.raises(ValueError):
        apply_filter(pos, [disc_not_divisible_filter(3), disc_congruence_filter(3, 1, [1])])


@pytest.mark.parametrize("sign", [1, -1])
def test_dh_identity_1000(sign):
    assert dh_mismatches(1000, sign) == []
    lhs, rhs = dh_checksum(1000, sign)
    assert lhs == rhs == (15 if sign > 0 else 84)


def test_dh_with_congruence():
    lhs, rhs = dh_checksum(2000, 1, CongruencePair(1, 4))
    assert lhs == rhs
    assert dh_mismatches(2000, -1, CongruencePair(1, 4)) == []
    with pytest.raises(ValueError):
        dh_checksum(100, 1, CongruencePair(2, 4))


def test_merge_by_a_range():
    whole = enumerate_classes(3000, -1)
    parts = [enumerate_classes(3000, -1, (1, 1)), enumerate_classes(3000, -1, (2, 100))]
    merged = merge_inventories(parts)
    assert merged.classes == whole.classes
    with pytest.raises(ValueError):
        merge_inventories([])
    with pytest.raises(ValueError):
        merge_inventories([whole, enumerate_classes(100, 1)])


def test_inventory_csv(tmp_path):
    inv = enumerate_classes(100, -1)
    text = inv.to_csv()
    lines = text.splitlines()
    assert lines[0] == "a,b,c,d,disc,maximal"
    assert len(lines) == len(inv) + 1
    assert lines[1].endswith(",-23,1")
    out = tmp_path / "inv.csv"
    inv.to_csv(out)
    assert out.read_text() == text
    assert inv.n_maximal + inv.n_nonmaximal == len(inv)


def test_enumerate_rejects():
    with pytest.raises(ValueError):
        enumerate_classes(0, 1)
    with pytest.raises(ValueError):
        enumerate_classes(10, 0)
    assert isinstance(enumerate_classes(10, 1), ClassInventory)


def test_formula_and_action_basics():
    assert disc_cubic((1, 0, 0, 1)) == -27
    F = (2, 1, 3, 5)
    assert act(((1, 0), (0, 1)), F) == F
    swapped = act(((0, 1), (1, 0)), F)
    assert swapped == (5, 3, 1, 2) and swapped.disc == disc_cubic(F)


@pytest.mark.parametrize("p, k", [(2, 1), (3, 1), (5, 2), (7, 1)])
def test_pure_cubes_nonmaximal(p, k):
    F = (1, 0, 0, p * p * k)
    assert is_irreducible(F)
    assert p in non_maximal_primes(F) and not is_maximal(F)


def test_squarefree_disc_is_maximal():
    inv = enumerate_classes(1500, -1)
    for D, reps in inv.classes.items():
        if all(e == 1 for e in factorize(-D).values()):
            assert all(m for _, m in reps)


def test_disc_minus_23_representative():
    inv = enumerate_classes(23, -1)
    ((rep, maximal),) = inv.classes[-23]
    assert maximal and canonical_class_rep(rep) == rep
    assert naive_classes(23, -1, box=4) == {rep}


def test_empty_filter_is_identity():
    inv = enumerate_classes(300, 1)
    assert apply_filter(inv, []).classes == inv.classes
