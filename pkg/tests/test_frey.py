import math
import random
from fractions import Fraction

import pytest

from classdiv.arith import ArithmeticDomainError, Factorization, is_squarefree, kronecker
from classdiv.frey import (
    CurveData,
    HypothesisError,
    UnsatisfiableClassError,
    build_class,
    check_corollary_hypotheses,
    class_member_ok,
    corollary_exponent,
    frey_admissible,
    get_curve,
    load_curves,
    point_order,
    revalidate_witness,
    s_tilde,
    sample_members,
    screen_twists,
    twist_discriminant,
    twist_sign,
    validate_curve,
    weierstrass_invariants,
)


@pytest.fixture(scope="module")
def curves():
    return load_curves()


def synthetic(**kw):
    base = dict(
        label="syn", p=3, a_invariants=(0, 0, 1, -30, 63), conductor=Factorization([(3, 3)]), sign=1,
        tate={3: False}, disc_valuations={3: 5}, j_valuations={3: 1}, torsion_point=(3, 0), alpha=0,
    )
    base.update(kw)
    return CurveData(**base)


def test_weierstrass_invariants():
    assert weierstrass_invariants((0, 0, 0, 0, 1)) == (-432, 0)
    disc, j = weierstrass_invariants((0, 0, 1, -30, 63))
    assert disc == -243 and j == -12288000
    with pytest.raises(ArithmeticDomainError):
        weierstrass_invariants((0, 0, 0, 0, 0))


def test_dataset_integrity(curves):
    assert set(curves) == {"27a4", "175a2", "574i1"}
    for c in curves.values():
        assert validate_curve(c) == []
    assert [curves[k].N for k in ("27a4", "175a2", "574i1")] == [27, 175, 574]
    assert curves["574i1"].base_twist(3).N == 574 * 3**2 * 2**3


def test_torsion_points(curves):
    for c in curves.values():
        assert point_order(c.a_invariants, c.torsion_point) == c.p
    # the point printed for 175a2 lies on the curve but is not torsion
    assert point_order(curves["175a2"].a_invariants, (-13, 17)) is None


def test_s_tilde(curves):
    assert s_tilde(curves["27a4"]) == set()
    assert s_tilde(curves["574i1"]) == {41}
    syn = synthetic(conductor=Factorization([(3, 1), (11, 1)]), tate={3: False, 11: False},
                    disc_valuations={3: 1, 11: 1}, j_valuations={3: 0, 11: -1})
    assert s_tilde(syn) == {11}
    assert s_tilde(synthetic(conductor=Factorization([(3, 2)]))) == set()


def test_corollary_exponent():
    assert corollary_exponent(3) == Fraction(7, 8)
    assert corollary_exponent(5) == Fraction(3, 4)
    assert corollary_exponent(7) == Fraction(11, 16)
    with pytest.raises(ArithmeticDomainError):
        corollary_exponent(11)


def test_hypotheses(curves):
    assert check_corollary_hypotheses(curves["27a4"], 1).ok
    rep = check_corollary_hypotheses(curves["175a2"], 1)
    assert any("v_p(N)" in f for f in rep.failures)
    rep = check_corollary_hypotheses(curves["574i1"], 3, 3)
    assert rep.failures == ["S~_E = [41] is not empty"]


def test_frey_admissible_vacuous_and_parity():
    c = synthetic()
    for D in (1, 2, 5, 7, 10, 11):
        assert frey_admissible(c, D)
    even = synthetic(conductor=Factorization([(2, 1), (3, 3)]), tate={2: False, 3: False})
    # negative convention: d = -D, so d = 1 (mod 4) when D = 3 (mod 4)
    assert not frey_admissible(even, 7)
    assert frey_admissible(even, 5)
    with pytest.raises(ArithmeticDomainError):
        frey_admissible(c, 6)
    with pytest.raises(ArithmeticDomainError):
        frey_admissible(c, 4)


def test_twist_sign_matches_stored_root_numbers(curves):
    n = 0
    for c in curves.values():
        for disc, _, w in c.twists:
            if math.gcd(disc, c.N) != 1:
                continue
            D = abs(disc) // 4 if disc % 4 == 0 else abs(disc)
            conv = "negative" if disc < 0 else "positive"
            assert twist_discriminant(D, conv) == disc
            assert twist_sign(c, D, conv) == w, (c.label, disc)
            n += 1
    assert n > 100


def test_relative_twist_sign(curves):
    c = curves["574i1"]
    checked = 0
    for disc, _, w in c.twists:
        if disc < 0 and disc % 12 == 0:
            Dp = -disc // 12
            if Dp % 4 == 3 and math.gcd(Dp, 287) == 1:
                assert twist_sign(c, 3 * Dp, base=3) == w
                checked += 1
    assert checked >= 20


def test_twist_sign_multiplicative(curves):
    c = curves["27a4"]
    rng = random.Random(5)
    done = 0
    while done < 100:
        D = rng.randrange(1, 10**6)
        if not is_squarefree(D) or D % 3 == 0:
            continue
        disc = twist_discriminant(D)
        s = twist_sign(c, D)
        assert s * s == 1
        assert s == c.sign * kronecker(disc, -1) * kronecker(disc, c.N)
        done += 1


def test_build_class_27a4(curves):
    c = curves["27a4"]
    cls = build_class(c, 1)
    assert (cls.A, cls.B) == (1, 3)
    for D in sample_members(cls, 500, seed=11):
        assert frey_admissible(c, D) and twist_sign(c, D) == 1


def test_build_class_hypothesis_error(curves):
    with pytest.raises(HypothesisError):
        build_class(curves["175a2"], 1)


def test_build_class_conflict(curves):
    with pytest.raises(UnsatisfiableClassError) as e:
        build_class(curves["175a2"], 1, check_hypotheses=False)
    assert e.value.prime == 7
    # synthetic: q = 7 forced to (d/7) = -1 by a Tate flag, and the sign with
    # an even power of p leaves no freedom
    syn = synthetic(conductor=Factorization([(3, 2), (7, 1)]), tate={3: False, 7: True}, sign=-1,
                    disc_valuations={3: 5}, j_valuations={3: 1, 7: -1})
    with pytest.raises(UnsatisfiableClassError) as e:
        build_class(syn, 1, check_hypotheses=False)
    assert e.value.prime == 7


def test_build_class_case3_574(curves):
    c = curves["574i1"]
    cls = build_class(c, 3, d=3, check_hypotheses=False, samples=200)
    assert cls.B % 8 == 0 and cls.A % 3 == 0
    for D in sample_members(cls, 200, seed=2):
        assert class_member_ok(c, cls, D)
        assert twist_sign(c, D, base=3) == 1


def test_positive_convention(curves):
    cls = build_class(curves["175a2"], 1, convention="positive", check_hypotheses=False)
    for D in sample_members(cls, 100):
        assert twist_sign(curves["175a2"], D, "positive") == 1
    with pytest.raises(ArithmeticDomainError):
        screen_twists(curves["27a4"], 1000, 1, convention="positive")


def test_screen_27a4(curves):
    c = curves["27a4"]
    cls, ws = screen_twists(c, 10**4, 1)
    assert ws
    for w in ws:
        assert revalidate_witness(c, cls, w) == []
    _, small = screen_twists(c, 30, 1)
    assert [w.D for w in small] == [D for D in (w.D for w in ws) if D <= 30]
    _, none = screen_twists(c, 1, 1)
    assert none == []
    counts = [len(screen_twists(c, X, 1, samples=0)[1]) for X in (500, 1000, 2000)]
    assert counts == sorted(counts)


def test_screen_shards_agree(curves):
    c = curves["27a4"]
    a = screen_twists(c, 3000, 1, shards=1)[1]
    b = screen_twists(c, 3000, 1, shards=8)[1]
    assert a == b


def test_get_curve_unknown():
    with pytest.raises(ArithmeticDomainError):
        get_curve("11a1")
