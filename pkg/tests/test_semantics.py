import itertools
from fractions import Fraction

import pytest

from conftest import load_corpus_program
from outcomekit.lang import (
    Assume,
    BoolGuard,
    Choice,
    Cmp,
    ConstGuard,
    Iter,
    Lit,
    ProgramState,
    Seq,
    Skip,
    Var,
    desugar,
    parse_program,
    TRUE,
    FALSE,
)
from outcomekit.semantics import (
    CycleDetected,
    Cutoff,
    EvalConfig,
    Stabilized,
    eval_command,
    lfp_iterate,
    lint_program,
    phi_step,
    spost,
    unroll_loop,
    unroll_trace,
)
from outcomekit.semiring import BOOL, PROB
from outcomekit.weighting import DIV, Weighting, bottom, fusion_leq, unit, wsum

CORPUS_LOOPS = {
    # name -> (semiring, loop extractor input state, cross-check depth)
    "geometric": (PROB, {"x": 0}, 20),
    "counter": (BOOL, {"x": 0}, 20),
    "nt": (BOOL, {"x": 1, "y": 2}, 20),
    "mallocdiv": (BOOL, {"p": 0}, 20),
    "countdown": (BOOL, {"x": 3}, 20),
    "tortoise": (PROB, {"t": 1, "h": 0, "k": 0}, 12),
}


def loop_of(name):
    cmd, _ = load_corpus_program(name)
    node = desugar(cmd)
    while not isinstance(node, Iter):
        node = node.second
    return node


def test_skip_identity(s0):
    m = Weighting(PROB, {s0: Fraction(1, 2), DIV: Fraction(1, 2)})
    r = eval_command(Skip(), m)
    assert r.exact() and r.collected == m


def test_assume_const_scales(s0):
    r = eval_command(Assume(ConstGuard(Fraction(1, 2))), unit(PROB, s0))
    assert r.collected == Weighting(PROB, {s0: Fraction(1, 2)})


def test_assume_carries_divergence(s0):
    m = Weighting(PROB, {s0: Fraction(1, 2), DIV: Fraction(1, 2)})
    r = eval_command(Assume(BoolGuard(FALSE)), m)
    assert r.collected == Weighting(PROB, {DIV: Fraction(1, 2)})


def test_choice_boolean(s0):
    cmd, _ = parse_program("(x := 1) + (x := 2)")
    r = eval_command(cmd, unit(BOOL, s0))
    assert r.collected == Weighting(
        BOOL, {ProgramState.make(x=1): Fraction(1), ProgramState.make(x=2): Fraction(1)}
    )


def test_choice_does_not_duplicate_divergence(s0):
    cmd, _ = parse_program("skip + skip")
    m = Weighting(BOOL, {s0: Fraction(1), DIV: Fraction(1)})
    r = eval_command(cmd, m)
    assert r.collected == m


def test_geometric_loop_exact_prefix():
    cmd, _ = load_corpus_program("geometric")
    r = eval_command(cmd, unit(PROB, ProgramState.make(x=0)), EvalConfig(unroll_limit=10))
    for k in range(10):
        assert r.collected.weight(ProgramState.make(x=k)) == Fraction(1, 2 ** (k + 1))
    assert r.slack == Fraction(1, 1024)
    bracket = r.div_bracket()
    assert (bracket.lo, bracket.hi) == (Fraction(0), Fraction(1, 1024))
    assert isinstance(r.status, Cutoff)


def test_counter_loop_residual_persists():
    loop = loop_of("counter")
    trace = unroll_trace(loop.body, loop.enter, loop.exit, unit(BOOL, ProgramState.make(x=0)), EvalConfig())
    for approx in itertools.islice(trace, 8):
        if approx.n:
            assert approx.residual.mass() == Fraction(1)
            assert approx.collected.weight(ProgramState.make(x=approx.n - 1)) == Fraction(1)


def test_while_false_stabilizes(s0):
    cmd, _ = parse_program("while fls do skip")
    r = eval_command(cmd, unit(BOOL, s0))
    assert r.status == Stabilized(1)
    assert r.collected == unit(BOOL, s0)


def test_nt_cycle_detection():
    cmd, _ = load_corpus_program("nt")
    r = eval_command(cmd, unit(BOOL, ProgramState.make(x=0, y=0)))
    assert isinstance(r.status, CycleDetected)
    assert r.status.period == 2
    assert r.collected == unit(BOOL, DIV)
    assert r.exact()


def test_mallocdiv_terminates_and_diverges():
    cmd, _ = load_corpus_program("mallocdiv")
    r = eval_command(cmd, unit(BOOL, ProgramState.make(p=0)))
    assert isinstance(r.status, CycleDetected) and r.status.period == 1
    assert r.collected.weight(ProgramState.make(p=1)) == Fraction(1)
    assert r.collected.div_weight() == Fraction(1)
    assert not r.residual.is_empty()


def test_phi_step_bottom_reenters(s0):
    bot = lambda s: bottom(BOOL)
    out = phi_step(bot, s0, Skip(), BoolGuard(TRUE), BoolGuard(FALSE), BOOL)
    assert out == bottom(BOOL)


def test_phi_step_exit_only(s0):
    f = lambda s: bottom(BOOL)
    out = phi_step(f, s0, Skip(), BoolGuard(FALSE), BoolGuard(TRUE), BOOL)
    assert out == unit(BOOL, s0)


def test_phi_step_geometric_shape():
    loop = loop_of("geometric")
    sigma = ProgramState.make(x=0)
    bot = lambda s: bottom(PROB)
    out = phi_step(bot, sigma, loop.body, loop.enter, loop.exit, PROB)
    assert out == Weighting(PROB, {sigma: Fraction(1, 2), DIV: Fraction(1, 2)})


def test_lfp_chain_ascending_and_stabilizing():
    cmd, _ = parse_program("while x > 0 do x := x - 1")
    loop = desugar(cmd)
    chain = lfp_iterate(loop.body, loop.enter, loop.exit, ProgramState.make(x=2), 6, BOOL)
    for a, b in zip(chain, chain[1:]):
        assert fusion_leq(a, b)
    assert chain[3] == unit(BOOL, ProgramState.make(x=0))
    assert chain[3] == chain[6]


def test_geometric_chain_divergence_by_hand():
    loop = loop_of("geometric")
    chain = lfp_iterate(loop.body, loop.enter, loop.exit, ProgramState.make(x=0), 3, PROB)
    assert chain[3].div_weight() == Fraction(1, 8)


@pytest.mark.parametrize("name", sorted(CORPUS_LOOPS))
def test_unrolling_cross_check(name):
    """The unrolled collected/residual data reconstructs the Kleene chain
    exactly: terminating entries are the partial exit sums, the divergence
    entry is the residual mass pushed onto divergence."""
    sr, bindings, depth = CORPUS_LOOPS[name]
    loop = loop_of(name)
    sigma = ProgramState.make({k: Fraction(v) for k, v in bindings.items()})
    cfg = EvalConfig(unroll_limit=depth + 2, support_limit=1 << 14)
    chain = lfp_iterate(loop.body, loop.enter, loop.exit, sigma, depth, sr, cfg)
    trace = list(itertools.islice(
        unroll_trace(loop.body, loop.enter, loop.exit, unit(sr, sigma), cfg), depth + 1
    ))
    for n in range(1, depth + 1):
        approx = trace[n]
        expected_div = sr.add_saturating(
            sr.mul(approx.residual.mass(), sr.top), approx.inner_div
        )
        reconstructed = approx.collected
        if expected_div != sr.zero:
            reconstructed = wsum(
                reconstructed, Weighting(sr, {DIV: expected_div})
            )
        assert reconstructed == chain[n], f"{name} diverges from the chain at n={n}"


def test_conservative_mass_conservation():
    for name in ("geometric", "tortoise"):
        loop = loop_of(name)
        start = {"geometric": {"x": 0}, "tortoise": {"t": 1, "h": 0, "k": 0}}[name]
        sigma = ProgramState.make({k: Fraction(v) for k, v in start.items()})
        trace = unroll_trace(
            loop.body, loop.enter, loop.exit, unit(PROB, sigma), EvalConfig(support_limit=2048)
        )
        for approx in itertools.islice(trace, 10):
            total = PROB.add(
                PROB.add(approx.collected.mass(), approx.residual.mass()), approx.inner_div
            )
            assert total == Fraction(1)


@pytest.mark.parametrize("name", sorted(CORPUS_LOOPS))
def test_divergence_pass_through(name):
    cmd, _ = load_corpus_program(name)
    sr = CORPUS_LOOPS[name][0]
    r = eval_command(cmd, unit(sr, DIV), EvalConfig(unroll_limit=8))
    assert r.exact() and r.collected == unit(sr, DIV)


def test_interval_soundness_geometric():
    cmd, _ = load_corpus_program("geometric")
    r = eval_command(cmd, unit(PROB, ProgramState.make(x=0)), EvalConfig(unroll_limit=6))
    # true limit values are known in closed form
    for k in range(12):
        true_value = Fraction(1, 2 ** (k + 1))
        bracket = r.bracket(ProgramState.make(x=k))
        if hasattr(bracket, "value"):
            assert bracket.value == true_value
        else:
            assert bracket.lo <= true_value <= bracket.hi
    div = r.div_bracket()
    assert div.lo <= Fraction(0) <= div.hi


def test_spost_examples(s0):
    ms = [unit(BOOL, s0)]
    results = spost(Skip(), ms)
    assert results[0].collected == ms[0]
    results = spost(parse_program("x := 1")[0], [unit(BOOL, ProgramState.make(x=0))])
    assert results[0].collected == unit(BOOL, ProgramState.make(x=1))
    choice, _ = parse_program("(x := 1) + (x := 2)")
    results = spost(choice, [unit(BOOL, s0)])
    assert results[0].collected == Weighting(
        BOOL, {ProgramState.make(x=1): Fraction(1), ProgramState.make(x=2): Fraction(1)}
    )


def test_lint_flags_bare_weight_assume():
    cmd, _ = parse_program("assume 1/2 ; x := 1")
    warnings = lint_program(cmd, PROB)
    assert len(warnings) == 1
    cmd, _ = load_corpus_program("tortoise")
    assert lint_program(cmd, PROB) == []
    assert lint_program(parse_program("assume 1/2")[0], BOOL) == []


def test_support_limit_cutoff():
    cmd, _ = load_corpus_program("tortoise")
    r = eval_command(
        cmd, unit(PROB, ProgramState.make(t=0, h=0, k=0)),
        EvalConfig(unroll_limit=50, support_limit=64),
    )
    assert isinstance(r.status, Cutoff) and r.status.reason == "support-limit"
    assert r.collected.mass() == Fraction(1, 2)
