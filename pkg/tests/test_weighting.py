from fractions import Fraction

import pytest

from outcomekit import laws
from outcomekit.lang import Cmp, Lit, ProgramState, TRUE, FALSE, Var
from outcomekit.semiring import BOOL, PROB
from outcomekit.weighting import (
    DIV,
    MassOverflow,
    Weighting,
    bottom,
    format_weighting,
    fusion_leq,
    kleisli_extend,
    mass,
    parse_weighting,
    project,
    scale_left,
    unit,
    wsum,
)


def w(sr, entries):
    return Weighting(sr, {k: Fraction(v) for k, v in entries.items()})


def test_unit(s0, s1):
    m = unit(PROB, s0)
    assert m.weight(s0) == Fraction(1)
    assert m.weight(s1) == Fraction(0)
    assert mass(unit(PROB, DIV)) == Fraction(1)


def test_zero_entries_pruned(s0):
    m = Weighting(PROB, {s0: Fraction(0), DIV: Fraction(1, 2)})
    assert m.support() == [DIV]


def test_mass(s0, s1):
    assert mass(w(PROB, {s0: "1/2", DIV: "1/2"})) == Fraction(1)
    assert mass(Weighting.empty(PROB)) == Fraction(0)
    assert mass(w(BOOL, {s0: 1, s1: 1})) == Fraction(1)  # 1 or 1


def test_invalid_mass_rejected(s0, s1):
    with pytest.raises(MassOverflow):
        Weighting(PROB, {s0: Fraction(3, 4), s1: Fraction(3, 4)})


def test_wsum_and_scale(s0, s1):
    assert wsum(w(PROB, {s0: "1/2"}), w(PROB, {s1: "1/2"})) == w(PROB, {s0: "1/2", s1: "1/2"})
    assert scale_left(Fraction(0), w(PROB, {s0: "1/2"})).is_empty()
    with pytest.raises(MassOverflow):
        wsum(w(PROB, {s0: "3/4"}), w(PROB, {s0: "1/2"}))


def test_kleisli_carries_divergence(s0):
    f = lambda s: unit(PROB, ProgramState.make(x=s.get("x") + 1))
    assert kleisli_extend(f, unit(PROB, DIV)) == unit(PROB, DIV)
    mixed = w(PROB, {s0: "1/2", DIV: "1/2"})
    out = kleisli_extend(f, mixed)
    assert out.weight(DIV) == Fraction(1, 2)
    assert out.weight(ProgramState.make(x=1)) == Fraction(1, 2)


def test_kleisli_right_identity(s0, s1):
    for m in (w(PROB, {s0: "1/3", s1: "1/3", DIV: "1/3"}), Weighting.empty(PROB)):
        assert kleisli_extend(lambda s: unit(PROB, s), m) == m


def test_kleisli_boolean_collapse(s0, s1):
    tau = ProgramState.make(x=9)
    f = lambda s: unit(BOOL, tau)
    m = w(BOOL, {s0: 1, s1: 1})
    assert kleisli_extend(f, m) == unit(BOOL, tau)  # 1 or 1 = 1


def test_project(s0, s1):
    m = w(PROB, {s0: "1/4", DIV: "3/4"})
    assert project(TRUE, m) == w(PROB, {s0: "1/4"})
    assert project(FALSE, m).is_empty()
    positives = Cmp(">", Var("x"), Lit(Fraction(0)))
    mixed = w(PROB, {s0: "1/2", s1: "1/2"})
    assert project(positives, mixed) == w(PROB, {s1: "1/2"})


def test_fusion_order(s0):
    assert fusion_leq(unit(PROB, DIV), unit(PROB, s0))
    assert not fusion_leq(unit(PROB, s0), unit(PROB, DIV))
    assert fusion_leq(
        w(PROB, {s0: "1/4", DIV: "3/4"}), w(PROB, {s0: "1/2", DIV: "1/2"})
    )
    assert bottom(PROB) == unit(PROB, DIV)


def test_serialization_round_trip(s0):
    m = w(PROB, {ProgramState.make(x=1, y=2): "1/2", DIV: "1/2"})
    text = format_weighting(m)
    assert text == "{ (x=1,y=2): 1/2, DIV: 1/2 }"
    assert parse_weighting(text, PROB) == m
    assert parse_weighting("{ }", PROB).is_empty()


@pytest.mark.parametrize("sr", [BOOL, PROB], ids=lambda s: s.name)
def test_monad_laws(sr):
    for result in laws.monad_laws(sr, iters=200, seed=5):
        assert result.passed, str(result)


@pytest.mark.parametrize("sr", [BOOL, PROB], ids=lambda s: s.name)
def test_bind_effect_laws(sr):
    for result in laws.bind_effect_laws(sr, iters=200, seed=5):
        assert result.passed, str(result)


@pytest.mark.parametrize("sr", [BOOL, PROB], ids=lambda s: s.name)
def test_weighting_laws(sr):
    for result in laws.weighting_laws(sr, iters=200, seed=5):
        assert result.passed, str(result)
