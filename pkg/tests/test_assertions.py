import random
from fractions import Fraction

import pytest

from outcomekit import laws
from outcomekit.assertions import (
    AlwaysDiv,
    AssertionSchema,
    Atom,
    Box,
    BoxTotal,
    Certified,
    Diamond,
    DiamondPartial,
    DivAtom,
    EMPTY_ATOM,
    ExistsIdx,
    LimitFailed,
    NotA,
    Obligation,
    OPlus,
    OPlusFamily,
    ScaleL,
    SometimesDiv,
    SplitSearchExceeded,
    Top,
    all_bool_weightings,
    assertion_equal,
    entails_guard,
    expand_modal,
    find_split,
    format_assertion,
    generate_satisfying,
    geometric_normal_form,
    implies,
    is_nonterminating,
    limit_of_family,
    parse_assertion,
    pred_implies,
    satisfies,
    simplify,
    InfConst,
)
from outcomekit.lang import (
    BoolGuard,
    Cmp,
    ConstGuard,
    Lit,
    ProgramState,
    TokenStream,
    Var,
    parse_bool,
    tokenize,
    TRUE,
)
from outcomekit.semiring import BOOL, INF, NAT_INF, PROB
from outcomekit.weighting import DIV, Weighting, unit


def pb(text):
    return parse_bool(TokenStream(tokenize(text)), allow_div=True)


def st(**kw):
    return ProgramState.make({k: Fraction(v) for k, v in kw.items()})


def wt(sr, entries):
    return Weighting(sr, {k: Fraction(v) for k, v in entries.items()})


# -- satisfaction -------------------------------------------------------------


def test_div_atom_boolean_unit():
    assert satisfies(unit(BOOL, DIV), parse_assertion("DIV^(1)"))
    assert not satisfies(unit(BOOL, st(x=0)), parse_assertion("DIV^(1)"))
    assert satisfies(Weighting.empty(BOOL), parse_assertion("DIV^(0)"))


def test_box_vs_box_total():
    m = wt(BOOL, {st(x=1): 1, DIV: 1})
    assert satisfies(m, parse_assertion("box (x=1)"))
    assert not satisfies(m, parse_assertion("boxT (x=1)"))


def test_oplus_split_probabilistic():
    m = wt(PROB, {st(x=1): "1/2", st(x=2): "1/2"})
    a = parse_assertion("(x=1)^(1/2) ++ (x=2)^(1/2)")
    assert satisfies(m, a)
    assert not satisfies(m, parse_assertion("(x=1)^(1/2) ++ (x=2)^(1/4)"))


def test_oplus_split_witness_revalidates():
    m = wt(PROB, {st(x=1): "1/2", st(x=2): "1/2"})
    parts = [
        Atom(pb("x >= 1"), Lit(Fraction(3, 4))),
        Atom(pb("x = 2"), Lit(Fraction(1, 4))),
    ]
    split = find_split(m, parts)
    assert split is not None
    total = Weighting.empty(PROB)
    from outcomekit.weighting import wsum

    for part, piece in zip(parts, split):
        assert satisfies(piece, part)
        total = wsum(total, piece)
    assert total == m


def test_oplus_boolean_overlap():
    # Boolean addition is idempotent, so summands may share support.
    m = unit(BOOL, st(x=1))
    a = OPlus((Atom(pb("x = 1"), Lit(Fraction(1))), Atom(pb("x = 1"), Lit(Fraction(1)))))
    assert satisfies(m, a)


def test_oplus_with_top_absorbs():
    m = wt(PROB, {st(x=1): "1/2", st(x=5): "1/4", DIV: "1/4"})
    a = OPlus((Atom(pb("x = 1"), Lit(Fraction(1, 2))), Top()))
    assert satisfies(m, a)


def test_split_budget_raises_not_false():
    states = {st(x=k): 1 for k in range(8)}
    m = wt(BOOL, states)
    parts = [Atom(TRUE, Lit(Fraction(1))) for _ in range(4)]
    with pytest.raises(SplitSearchExceeded):
        satisfies(m, OPlus(tuple(parts)), budget=10)


def test_scaled_assertion():
    m = wt(PROB, {st(x=1): "1/4"})
    assert satisfies(m, ScaleL(Lit(Fraction(1, 2)), Atom(pb("x=1"), Lit(Fraction(1, 2)))))
    assert not satisfies(m, ScaleL(Lit(Fraction(1, 2)), Atom(pb("x=1"), Lit(Fraction(1, 4)))))


def test_exists_and_singleton():
    assert satisfies(unit(BOOL, st(x=3)), parse_assertion("exists n in 0..5. (x=n)^(1)"))
    assert not satisfies(unit(BOOL, st(x=6)), parse_assertion("exists n in 0..5. (x=n)^(1)"))
    assert satisfies(unit(BOOL, DIV), parse_assertion("exists u in {0, 1}. DIV^(u)"))


def test_sometimes_always_div():
    assert satisfies(unit(BOOL, DIV), parse_assertion("box DIV"))
    assert satisfies(Weighting.empty(BOOL), parse_assertion("box DIV"))
    assert not satisfies(unit(BOOL, st(x=0)), parse_assertion("box DIV"))
    mixed = wt(BOOL, {st(x=0): 1, DIV: 1})
    assert satisfies(mixed, parse_assertion("dia DIV"))
    assert not satisfies(mixed, parse_assertion("box DIV"))
    # nat-inf: divergence weight must be a top multiple
    assert satisfies(Weighting(NAT_INF, {DIV: INF}), AlwaysDiv())
    assert not satisfies(Weighting(NAT_INF, {DIV: Fraction(5)}), AlwaysDiv())


def test_modal_duality_exhaustive():
    for result in laws.modal_duality_laws():
        assert result.passed, str(result)


def test_diamond_partial_on_divergence():
    assert satisfies(unit(BOOL, DIV), parse_assertion("diaP (x=1)"))
    assert not satisfies(unit(BOOL, DIV), parse_assertion("dia (x=1)"))


def test_expand_modal_forms():
    from outcomekit.assertions import SuppMeets, SuppSubset

    assert expand_modal(Box(pb("x=1"))) == SuppSubset(pb("x=1"), True)
    assert expand_modal(Diamond(pb("x=1"))) == SuppMeets(pb("x=1"), False)
    assert expand_modal(BoxTotal(pb("x=1"))) == SuppSubset(pb("x=1"), False)
    assert expand_modal(DiamondPartial(pb("x=1"))) == SuppMeets(pb("x=1"), True)


# -- entailment ---------------------------------------------------------------


def test_entails_guard_pinned():
    a = parse_assertion("(x=1 /\\ y=2)^(1)")
    result = entails_guard(a, BoolGuard(pb("x + y = 3")), PROB)
    assert result.kind == "exact" and result.weight == Fraction(1)


def test_entails_guard_divergence_refuses():
    result = entails_guard(parse_assertion("DIV^(1)"), BoolGuard(TRUE), BOOL)
    assert result.kind == "no"


def test_entails_guard_differing_values():
    domain = [st(x=0), st(x=1)]
    a = OPlus((Atom(pb("x=0"), Lit(Fraction(1, 2))), Atom(pb("x=1"), Lit(Fraction(1, 2)))))
    result = entails_guard(a, BoolGuard(pb("x=0")), PROB, domain)
    assert result.kind == "no"


def test_entails_guard_vacuous():
    result = entails_guard(parse_assertion("(tru)^(0)"), BoolGuard(pb("x=0")), PROB)
    assert result.kind == "any"


def test_entails_guard_linear_cover():
    # support not enumerable (rational-valued variables), decided by
    # predicate implication on the atom cover
    a = parse_assertion("(t - h = 1/4 /\\ k = 3)^(1/8) ++ (t - h > 1/4 /\\ k = 3)^(3/8)")
    result = entails_guard(a, BoolGuard(pb("h < t")), PROB)
    assert result.kind == "exact" and result.weight == Fraction(1)


def test_entails_guard_const():
    a = parse_assertion("(x = 1)^(1/2)")
    result = entails_guard(a, ConstGuard(Fraction(1, 2)), PROB)
    assert result.kind == "exact" and result.weight == Fraction(1, 2)


def test_entails_invariant_sampled():
    # every enumerated satisfying weighting is terminating and constant on
    # the guard value
    domain = [st(x=0, y=3), st(x=1, y=2), st(x=2, y=1)]
    a = Atom(pb("x + y = 3"), Lit(Fraction(1)))
    result = entails_guard(a, BoolGuard(pb("x + y > 1")), BOOL, domain)
    assert result.kind == "exact"
    samples = generate_satisfying(a, BOOL, domain, subsets=True)
    assert samples and len(samples) >= 7
    count = 0
    for m in samples[:200]:
        count += 1
        assert m.div_weight() == Fraction(0)
        from outcomekit.lang import eval_guard

        for s in m.states():
            assert eval_guard(BoolGuard(pb("x + y > 1")), s, BOOL) == result.weight
    assert count >= 7


# -- nontermination -----------------------------------------------------------


def test_is_nonterminating():
    assert is_nonterminating(parse_assertion("DIV^(1/2)"))
    assert is_nonterminating(parse_assertion("(tru)^(0)"))
    assert is_nonterminating(parse_assertion("box DIV"))
    assert is_nonterminating(parse_assertion("exists u in {0, 1}. DIV^(u)"))
    assert not is_nonterminating(parse_assertion("(x=1)^(1)"))
    assert not is_nonterminating(parse_assertion("dia DIV"))
    assert is_nonterminating(parse_assertion("DIV^(1) ++ (tru)^(0)"))


# -- predicate and assertion implication ---------------------------------------


def test_pred_implies_tiers():
    assert pred_implies(pb("x+y=3"), pb("x+y>1")) is True
    assert pred_implies(pb("t-h = 1/2"), pb("h < t")) is True
    assert pred_implies(pb("t-h > 1/2"), pb("h < t")) is True
    assert pred_implies(pb("x=1 /\\ y=2"), pb("x+y=3")) is True
    assert pred_implies(pb("x=1"), pb("x>3")) is False
    assert pred_implies(pb("x>1"), pb("x>=1")) is True
    assert pred_implies(pb("x<1"), pb("x<=3")) is True
    assert pred_implies(pb("x>=1"), pb("x>1")) is None
    domain = [st(x=0), st(x=1), st(x=2)]
    assert pred_implies(pb("x>=1"), pb("x>0"), domain) is True
    assert pred_implies(pb("x>=0"), pb("x>0"), domain) is False


def test_implies_lattice():
    domain = [st(x=0), st(x=1)]
    a1 = parse_assertion("(x=1)^(1/2)")
    assert implies(a1, parse_assertion("boxT (x>=1)")) is True
    assert implies(a1, parse_assertion("box (x>=1)")) is True
    assert implies(parse_assertion("boxT (x=1)"), parse_assertion("box (x=1)")) is True
    assert implies(parse_assertion("DIV^(1/2)"), parse_assertion("box DIV")) is True
    assert implies(parse_assertion("DIV^(1/2)"), parse_assertion("dia DIV")) is True
    assert implies(a1, parse_assertion("top")) is True
    # drop a conjunct into top
    assert (
        implies(
            parse_assertion("(x=1)^(1/2) ++ (x=0)^(1/2)"),
            parse_assertion("(x=1)^(1/2) ++ top"),
        )
        is True
    )
    # instantiate an existential
    assert implies(a1, ExistsIdx("n", 0, 3, parse_assertion("(x=n)^(1/2)"))) is True
    # exhaustive finite-domain fallback
    assert (
        implies(
            parse_assertion("(x=1)^(1)"),
            OPlus((BoxTotal(pb("x=1")), AlwaysDiv())),
            domain,
            BOOL,
        )
        is True
    )
    assert implies(parse_assertion("(x=0)^(1)"), parse_assertion("(x=1)^(1)"), domain, BOOL) is False


def test_predicate_cover_decomposition():
    # a terminating predicate assertion splits across covering box parts
    target = OPlus((BoxTotal(pb("x=1")), BoxTotal(pb("x=0")), AlwaysDiv()))
    assert implies(parse_assertion("(x<=1)^(1)"), target, [st(x=0), st(x=1)]) is True


# -- simplification -----------------------------------------------------------


def test_simplify_scaling_and_empty():
    a = parse_assertion("(x=1)^(1/2)")
    assert assertion_equal(ScaleL(Lit(Fraction(1, 2)), a), parse_assertion("(x=1)^(1/4)"))
    assert simplify(ScaleL(Lit(Fraction(0)), a)) == EMPTY_ATOM
    assert simplify(parse_assertion("(x=1)^(1) ++ (tru)^(0)")) == parse_assertion("(x=1)^(1)")
    assert assertion_equal(parse_assertion("(x=1)^(0)"), parse_assertion("(y=2)^(0)"))


def test_assertion_text_round_trip():
    texts = [
        "(x=1)^(1/2)",
        "DIV^(1/2)",
        "box (x + y = 3)",
        "boxT (x > 0)",
        "dia DIV",
        "exists n in 0..4. (x=n)^(1)",
        "bigoplus k. (x=k)^(1/2^(k+1))",
        "(x=1)^(1/2) ++ DIV^(1/2)",
        "~(top /\\ bot)",
    ]
    for text in texts:
        a = parse_assertion(text)
        assert parse_assertion(format_assertion(a)) == a


# -- normal forms and limits ---------------------------------------------------


def test_geometric_normal_form():
    nf = geometric_normal_form(pe("1/2^n"), "n")
    assert nf == {Fraction(1, 2): Fraction(1)}
    nf = geometric_normal_form(pe("(2^(n-1)-1)/2^n"), "n")
    assert nf == {Fraction(1): Fraction(1, 2), Fraction(1, 2): Fraction(-1)}
    assert geometric_normal_form(pe("1/2^n + (2^(n-1)-1)/2^n"), "n") == {
        Fraction(1): Fraction(1, 2)
    }
    assert geometric_normal_form(pe("n"), "n") is None


def pe(text):
    from outcomekit.lang import parse_weight_expr

    ts = TokenStream(tokenize(text))
    return parse_weight_expr(ts)


def test_limit_geometric_family_certified():
    schema = AssertionSchema(
        index="n", general=parse_assertion("(x=n)^(1/2^(n+1))"), general_from=0
    )
    declared = parse_assertion("bigoplus k. (x=k)^(1/2^(k+1))")
    outcome = limit_of_family(schema, "converge", declared, PROB)
    assert isinstance(outcome, Certified)


def test_limit_constant_mass_diverges():
    schema = AssertionSchema(
        index="n", general=parse_assertion("(x=n)^(1/2)"), general_from=0
    )
    outcome = limit_of_family(schema, "diverge", parse_assertion("DIV^(1/2)"), PROB)
    assert isinstance(outcome, Certified)
    assert "constant" in outcome.detail


def test_limit_decaying_mass_diverges_to_zero():
    schema = AssertionSchema(
        index="n", general=parse_assertion("(x=n)^(1/2^n)"), general_from=0
    )
    outcome = limit_of_family(schema, "diverge", parse_assertion("(tru)^(0)"), PROB)
    assert isinstance(outcome, Certified)
    # a wrong declared limit is refuted, not silently accepted
    outcome = limit_of_family(schema, "diverge", parse_assertion("DIV^(1/2)"), PROB)
    assert isinstance(outcome, LimitFailed)


def test_limit_eventually_zero_family():
    schema = AssertionSchema(index="n")
    schema.cases = {
        0: parse_assertion("(tru)^(0)"),
        1: parse_assertion("(t=2 /\\ h=2 /\\ k=1)^(1/2)"),
    }
    schema.general = parse_assertion("(tru)^(0)")
    schema.general_from = 2
    outcome = limit_of_family(schema, "converge", parse_assertion("(h=t)^(1/2)"), PROB)
    assert isinstance(outcome, Certified)


def test_limit_unrecognized_is_obligation():
    schema = AssertionSchema(index="n")
    schema.cases = {k: parse_assertion(f"(x={k})^(1)") for k in range(4)}
    outcome = limit_of_family(
        schema, "converge", parse_assertion("boxT (x >= 0)"), BOOL
    )
    assert isinstance(outcome, Obligation)


def test_limit_boolean_constant_one():
    schema = AssertionSchema(
        index="n", general=parse_assertion("(x=n)^(1)"), general_from=0
    )
    outcome = limit_of_family(schema, "diverge", parse_assertion("DIV^(1)"), BOOL)
    assert isinstance(outcome, Certified)


def test_always_div_limit_unconstrained():
    schema = AssertionSchema(index="n", general=BoxTotal(pb("x=0")), general_from=0)
    outcome = limit_of_family(schema, "diverge", AlwaysDiv(), BOOL)
    assert isinstance(outcome, Certified)


def test_schema_witnesses():
    schema = AssertionSchema(
        index="n",
        general=parse_assertion("(t - h = 1/2^(n-1) /\\ k = n)^(1/2^n)"),
        general_from=2,
        witnesses={"general": [{"t": pe("n+1"), "h": pe("n+1 - 1/2^(n-1)"), "k": pe("n")}]},
    )
    m = schema.witness_weighting(3, PROB)
    assert m is not None and m.mass() == Fraction(1, 8)
    state = m.states()[0]
    assert state.get("t") - state.get("h") == Fraction(1, 4)


def test_schema_witness_must_satisfy_atom():
    from outcomekit.assertions import AssertionError_

    schema = AssertionSchema(
        index="n",
        general=parse_assertion("(x = n)^(1)"),
        general_from=0,
        witnesses={"general": [{"x": pe("n + 1")}]},
    )
    with pytest.raises(AssertionError_):
        schema.witness_weighting(2, BOOL)
