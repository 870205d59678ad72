from fractions import Fraction

import pytest

from outcomekit import laws
from outcomekit.semiring import (
    BOOL,
    INF,
    NAT,
    NAT_INF,
    PROB,
    CarrierError,
    Exact,
    Interval,
    Scheme,
    Undefined,
    adjoin_infinity,
    bounded_sum,
    by_name,
    format_weight,
    parse_weight,
)


def test_boolean_addition_is_disjunction():
    assert BOOL.add(Fraction(1), Fraction(1)) == Fraction(1)
    assert BOOL.add(Fraction(0), Fraction(1)) == Fraction(1)
    assert BOOL.mul(Fraction(1), Fraction(0)) == Fraction(0)


def test_probabilistic_addition_partial():
    assert PROB.add(Fraction(1, 4), Fraction(1, 4)) == Fraction(1, 2)
    with pytest.raises(Undefined):
        PROB.add(Fraction(3, 5), Fraction(3, 5))


def test_additive_identity():
    for sr in (BOOL, PROB, NAT_INF):
        for x in (sr.zero, sr.one):
            assert sr.add(sr.zero, x) == x


def test_natural_multiplication():
    assert NAT.mul(Fraction(2), Fraction(3)) == Fraction(6)


def test_infinity_absorption():
    assert NAT_INF.mul(INF, Fraction(0)) == Fraction(0)
    assert NAT_INF.mul(Fraction(0), INF) == Fraction(0)
    assert NAT_INF.mul(INF, Fraction(7)) == INF
    assert NAT_INF.mul(Fraction(7), INF) == INF
    assert NAT_INF.mul(INF, INF) == INF
    assert NAT_INF.add(INF, Fraction(5)) == INF


def test_natural_order():
    assert PROB.leq(Fraction(1, 4), Fraction(1, 2))
    assert not BOOL.leq(Fraction(1), Fraction(0))
    assert NAT_INF.leq(Fraction(7), INF)
    assert not NAT_INF.leq(INF, Fraction(7))


def test_natural_leq_witness_search():
    # u <= v iff some w with u + w = v; brute force over small naturals
    # plus the absorption axiom for the infinite element.
    for u in range(6):
        for v in range(6):
            witness = any(
                NAT_INF.add(Fraction(u), Fraction(w)) == Fraction(v) for w in range(6)
            )
            assert NAT_INF.leq(Fraction(u), Fraction(v)) == witness
        assert NAT_INF.add(Fraction(u), INF) == INF  # witness for u <= inf


def test_adjoin_infinity_classification():
    extended = adjoin_infinity(NAT)
    assert extended.scheme is Scheme.INDICATIVE
    assert extended.top == INF
    assert extended.add(INF, Fraction(5)) == INF
    with pytest.raises(Undefined):
        adjoin_infinity(PROB)  # partial
    with pytest.raises(Undefined):
        adjoin_infinity(BOOL)  # already has a strong infinity
    with pytest.raises(Undefined):
        adjoin_infinity(NAT_INF)


def test_conservative_top_sum_undefined():
    for x in (Fraction(1, 2), Fraction(1)):
        with pytest.raises(Undefined):
            PROB.add(x, PROB.top)
    assert PROB.add(Fraction(0), PROB.top) == PROB.top


def test_indicative_top_absorbing():
    for sr in (BOOL, NAT_INF):
        for x in (sr.zero, sr.one):
            assert sr.add(x, sr.top) == sr.top
        assert sr.mul(sr.one, sr.top) == sr.top


def test_bounded_sum_finite():
    terms = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    assert bounded_sum(PROB, terms, cutoff=10) == Exact(Fraction(7, 8))


def test_bounded_sum_zero_witness():
    def terms():
        yield Fraction(1, 2)
        yield Fraction(1, 4)
        yield Fraction(1, 8)
        while True:
            yield Fraction(0)

    assert bounded_sum(PROB, terms(), cutoff=100, zero_from=3) == Exact(Fraction(7, 8))


def test_bounded_sum_geometric_interval():
    terms = (Fraction(1, 2 ** (k + 1)) for k in range(1000))
    result = bounded_sum(PROB, terms, cutoff=10, residual_bound=Fraction(1, 2 ** 10))
    assert result == Interval(Fraction(1023, 1024), Fraction(1))


def test_bounded_sum_boolean_absorbs():
    count = 0

    def ones():
        nonlocal count
        while True:
            count += 1
            yield Fraction(1)

    assert bounded_sum(BOOL, ones(), cutoff=100) == Exact(Fraction(1))
    assert count == 1  # stopped after the first term


def test_bounded_sum_no_residual_bound():
    terms = (Fraction(1, 2 ** (k + 1)) for k in range(1000))
    result = bounded_sum(PROB, terms, cutoff=4)
    assert isinstance(result, Interval) and result.hi is None


def test_weight_serialization():
    for text in ("0", "1", "3/4", "inf"):
        assert format_weight(parse_weight(text)) == text
    with pytest.raises(CarrierError):
        parse_weight("-1/2")


def test_registry():
    assert by_name("bool") is BOOL
    assert by_name("prob") is PROB
    assert by_name("nat-inf") is NAT_INF


@pytest.mark.parametrize("sr", [BOOL, PROB, NAT_INF], ids=lambda s: s.name)
def test_semiring_law_suites(sr):
    results = laws.semiring_laws(sr, iters=1000, seed=11)
    for result in results:
        assert result.passed, str(result)
