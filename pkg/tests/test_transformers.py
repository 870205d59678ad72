import itertools
import random
from fractions import Fraction

import pytest

from conftest import load_corpus_program
from outcomekit.assertions import (
    Atom,
    Box,
    BoxTotal,
    Diamond,
    all_bool_weightings,
    parse_assertion,
    satisfies,
)
from outcomekit.lang import (
    Choice,
    Cmp,
    Lit,
    ProgramState,
    Var,
    parse_program,
    TRUE,
    negate,
)
from outcomekit.semantics import EvalConfig, eval_command, spost
from outcomekit.semiring import BOOL, PROB
from outcomekit.transformers import (
    FiniteDomain,
    check_triple,
    random_boolean_program,
    random_state_predicate,
    sat3,
    subsumption_oracle,
    wlp_box,
    wlpp,
    wp_total,
    wpp_diamond,
)
from outcomekit.weighting import DIV, Weighting, kleisli_extend, unit, wsum


def pb(text):
    from outcomekit.lang import TokenStream, parse_bool, tokenize

    return parse_bool(TokenStream(tokenize(text)))


def states_of(result):
    return sorted(result.included)


D4 = FiniteDomain.parse("x:0..3")


def st(**kw):
    return ProgramState.make({k: Fraction(v) for k, v in kw.items()})


def test_domain_parse_and_bound():
    d = FiniteDomain.parse("x:0..3,y:1..2")
    assert len(d.states()) == 8
    from outcomekit.transformers import DomainTooLarge

    with pytest.raises(DomainTooLarge):
        FiniteDomain.parse("x:0..1000,y:0..1000", max_states=1000).states()


def test_wlp_countdown_step():
    cmd, _ = parse_program("assume x > 0 ; x := x - 1")
    result = wlp_box(cmd, pb("x = 0"), D4)
    assert states_of(result) == [st(x=0), st(x=1)]


def test_wlp_skip_is_post():
    cmd, _ = parse_program("skip")
    result = wlp_box(cmd, pb("x = 2"), D4)
    assert states_of(result) == [st(x=2)]


def test_wlp_divergence_vacuous():
    cmd, _ = parse_program("while tru do skip")
    result = wlp_box(cmd, pb("fls"), D4)
    assert states_of(result) == D4.states()  # only outcome is divergence


def test_wpp_choice_reaches():
    cmd, _ = parse_program("(x := 1) + (x := 2)")
    result = wpp_diamond(cmd, pb("x = 2"), D4)
    assert states_of(result) == D4.states()


def test_wpp_divergence_empty():
    cmd, _ = parse_program("while tru do skip")
    result = wpp_diamond(cmd, pb("tru"), D4)
    assert states_of(result) == []


def test_wp_total_countdown():
    cmd, _ = load_corpus_program("countdown")
    result = wp_total(cmd, pb("x = 0"), D4)
    assert states_of(result) == D4.states()


def test_wp_total_divergent_branch():
    cmd, _ = parse_program("(x := 1) + (while tru do skip)")
    result = wp_total(cmd, pb("x = 1"), D4)
    assert states_of(result) == []


def test_wlpp_divergence_always():
    cmd, _ = parse_program("while tru do skip")
    result = wlpp(cmd, pb("fls"), D4)
    assert states_of(result) == D4.states()


def test_transformer_inclusions():
    rng = random.Random(99)
    domain = FiniteDomain.parse("x:0..3,y:0..3")
    cfg = EvalConfig(unroll_limit=24, support_limit=512)
    for _ in range(40):
        cmd = random_boolean_program(rng)
        post, _ = random_state_predicate(rng, domain)
        weak = wlp_box(cmd, post, domain, cfg)
        strong = wp_total(cmd, post, domain, cfg)
        assert set(strong.included) <= set(weak.included)
        possible = wpp_diamond(cmd, post, domain, cfg)
        liberal = wlpp(cmd, post, domain, cfg)
        assert set(possible.included) <= set(liberal.included)


def test_transformer_duality():
    rng = random.Random(3)
    domain = FiniteDomain.parse("x:0..3,y:0..3")
    cfg = EvalConfig(unroll_limit=24, support_limit=512)
    for _ in range(30):
        cmd = random_boolean_program(rng)
        post, _ = random_state_predicate(rng, domain)
        dia = wpp_diamond(cmd, post, domain, cfg)
        box = wlp_box(cmd, negate(post), domain, cfg)
        assert set(dia.unknown) == set(box.unknown)
        decided = set(domain.states()) - set(dia.unknown)
        for s in decided:
            assert (s in dia.included) == (s not in box.included)


def test_check_triple_false_precondition():
    cmd, _ = parse_program("while tru do skip")
    verdict = check_triple(parse_assertion("bot"), cmd, parse_assertion("bot"), BOOL, D4)
    assert verdict.kind == "valid" and verdict.checked == 0


def test_check_triple_nt_always_diverges():
    cmd, _ = load_corpus_program("nt")
    domain = FiniteDomain.parse("x:0..3,y:0..3")
    verdict = check_triple(
        parse_assertion("(tru)^(1)"), cmd, parse_assertion("box DIV"), BOOL, domain
    )
    assert verdict.kind == "valid"
    assert verdict.checked == len(domain.states())


def test_check_triple_invalid_counterexample():
    cmd, _ = parse_program("x := x + 1")
    verdict = check_triple(
        parse_assertion("(x=1)^(1)"), cmd, parse_assertion("boxT (x=3)"), BOOL, D4
    )
    assert verdict.kind == "invalid"
    m, r = verdict.counterexample
    assert m == unit(BOOL, st(x=1))
    assert r.collected == unit(BOOL, st(x=2))
    # the counterexample re-checks
    assert not satisfies(r.collected, parse_assertion("boxT (x=3)"))


def test_check_triple_cross_checks_spost():
    cmd, _ = parse_program("(x := 1) + (x := 2)")
    pre = parse_assertion("(x=0)^(1)")
    post = parse_assertion("boxT (x >= 1)")
    verdict = check_triple(pre, cmd, post, BOOL, D4)
    assert verdict.kind == "valid"
    from outcomekit.assertions import generate_satisfying

    sample = generate_satisfying(pre, BOOL, D4.states())
    for result in spost(cmd, sample):
        assert satisfies(result.weighting(), post)


def test_subsumption_skip_reduces_to_subset():
    cmd, _ = parse_program("skip")
    domain = D4
    post = pb("x <= 1")
    pre_states = domain.states()
    for theorem in ("hoare", "lisbon", "total-hoare"):
        report = subsumption_oracle(theorem, cmd, pre_states, post, domain)
        assert report.agreed
        for sigma, triple_side, transformer_side in report.per_state:
            assert triple_side == transformer_side == (sigma.get("x") <= 1)


def test_subsumption_divergent_loop():
    cmd, _ = parse_program("while tru do skip")
    report = subsumption_oracle("total-hoare", cmd, D4.states(), pb("tru"), D4)
    assert report.agreed
    assert all(row[1] is False for row in report.per_state)
    report = subsumption_oracle("hoare", cmd, D4.states(), pb("fls"), D4)
    assert report.agreed
    assert all(row[1] is True for row in report.per_state)


def test_subsumption_small_random_family():
    rng = random.Random(12345)
    domain = FiniteDomain.parse("x:0..3,y:0..3")
    cfg = EvalConfig(unroll_limit=24, support_limit=512)
    for _ in range(25):
        cmd = random_boolean_program(rng)
        post, _ = random_state_predicate(rng, domain)
        _, pre_states = random_state_predicate(rng, domain)
        for theorem in ("hoare", "lisbon", "total-hoare"):
            report = subsumption_oracle(theorem, cmd, pre_states, post, domain, cfg)
            assert report.agreed, f"{theorem} disagrees on {cmd}"


def test_boolean_powerset_isomorphism():
    """Boolean weightings are characteristic functions of outcome sets:
    the pointwise sum is union and Kleisli extension is relational image."""
    states = [st(x=0), st(x=1)]
    ms = all_bool_weightings(BOOL, states)

    def to_set(m):
        return frozenset(m.support())

    image_table = {
        states[0]: Weighting(BOOL, {states[1]: Fraction(1)}),
        states[1]: Weighting(BOOL, {states[0]: Fraction(1), DIV: Fraction(1)}),
    }
    f = lambda s: image_table[s]
    for m1 in ms:
        for m2 in ms:
            assert to_set(wsum(m1, m2)) == to_set(m1) | to_set(m2)
        expected = frozenset().union(
            *(to_set(image_table[o]) for o in m1.support() if o != DIV),
            {DIV} if DIV in m1.entries else frozenset(),
        )
        assert to_set(kleisli_extend(f, m1)) == expected


def test_sat3_three_valued():
    cmd, _ = load_corpus_program("counter")
    r = eval_command(cmd, unit(BOOL, st(x=0)), EvalConfig(unroll_limit=6))
    assert r.slack != Fraction(0)
    assert sat3(r, parse_assertion("dia (x=3)")) is True      # already witnessed
    assert sat3(r, parse_assertion("boxT (x=0)")) is False    # already violated
    assert sat3(r, parse_assertion("box (x >= 0)")) is None   # residual could leak anywhere
    assert sat3(r, parse_assertion("box DIV")) is False
