import itertools
from fractions import Fraction

import pytest

from conftest import load_corpus_program
from outcomekit.lang import (
    Assign,
    Assume,
    BoolGuard,
    Choice,
    Cmp,
    ConstGuard,
    If,
    Iter,
    Lit,
    ParseError,
    ProbChoice,
    ProgramState,
    Seq,
    Skip,
    UnboundVariable,
    Var,
    While,
    desugar,
    eval_arith,
    eval_bool,
    eval_guard,
    format_command,
    is_desugared,
    negate,
    parse_program,
    TRUE,
    FALSE,
    And,
    Not,
    Or,
    BinOp,
)
from outcomekit.semiring import BOOL, PROB


def test_parse_skip():
    cmd, _ = parse_program("skip")
    assert cmd == Skip()


def test_parse_seq_while():
    cmd, decl = parse_program("x := 0 ; while x < 2 do x := x + 1")
    assert isinstance(cmd, Seq)
    assert isinstance(cmd.first, Assign)
    assert isinstance(cmd.second, While)
    assert decl == ["x"]


def test_parse_prob_choice():
    cmd, _ = parse_program("(h := h + 1) +[1/2] (h := h + 1 + 2^(0 - k))")
    assert isinstance(cmd, ProbChoice)
    assert cmd.weight == Fraction(1, 2)


def test_parse_iter_guards():
    cmd, _ = parse_program("iter (x := x + 1) [1/2][1/2]")
    assert isinstance(cmd, Iter)
    assert cmd.enter == ConstGuard(Fraction(1, 2))


def test_parse_boolean_iter_guards():
    cmd, _ = parse_program("iter (x := x + 1) [x < 3][x >= 3]")
    assert isinstance(cmd.enter, BoolGuard)


def test_vars_header_checks_bindings():
    with pytest.raises(UnboundVariable):
        parse_program("vars x\n y := 1")
    cmd, decl = parse_program("vars x, y\n y := 1")
    assert decl == ["x", "y"]


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse_program("x := ")
    assert err.value.line == 1


def test_division_absent_from_programs():
    with pytest.raises(ParseError):
        parse_program("x := y / 2")
    cmd, _ = parse_program("x := 1/2")  # rational literal is fine
    assert cmd == Assign("x", Lit(Fraction(1, 2)))


def test_desugar_if():
    cond = Cmp(">", Var("x"), Lit(Fraction(0)))
    out = desugar(If(cond, Skip(), Skip()))
    assert out == Choice(
        Seq(Assume(BoolGuard(cond)), Skip()),
        Seq(Assume(BoolGuard(Not(cond))), Skip()),
    )


def test_desugar_while():
    cond = Cmp(">", Var("x"), Lit(Fraction(0)))
    out = desugar(While(cond, Skip()))
    assert out == Iter(Skip(), BoolGuard(cond), BoolGuard(Not(cond)))


def test_desugar_prob_choice_complement():
    out = desugar(ProbChoice(Fraction(1, 3), Skip(), Skip()))
    assert out == Choice(
        Seq(Assume(ConstGuard(Fraction(1, 3))), Skip()),
        Seq(Assume(ConstGuard(Fraction(2, 3))), Skip()),
    )


def test_desugar_rejects_bad_choice_weight():
    from outcomekit.semiring import CarrierError

    with pytest.raises(CarrierError):
        desugar(ProbChoice(Fraction(3, 2), Skip(), Skip()))


@pytest.mark.parametrize(
    "name",
    ["geometric", "counter", "nt", "mallocdiv", "tortoise", "countdown", "partition3"],
)
def test_desugar_idempotent_and_sugar_free(name):
    cmd, _ = load_corpus_program(name)
    core = desugar(cmd)
    assert is_desugared(core)
    assert desugar(core) == core


@pytest.mark.parametrize(
    "name",
    ["geometric", "counter", "nt", "mallocdiv", "tortoise", "countdown", "partition3"],
)
def test_pretty_print_round_trip(name):
    cmd, _ = load_corpus_program(name)
    core = desugar(cmd)
    reparsed, _ = parse_program(format_command(core))
    assert reparsed == core


def test_eval_bool_basics(s0):
    assert eval_bool(TRUE, s0)
    contr = And(Cmp(">", Var("x"), Lit(Fraction(0))), Not(Cmp(">", Var("x"), Lit(Fraction(0)))))
    assert not eval_bool(contr, s0)
    sigma = ProgramState.make(x=1, y=2)
    assert eval_bool(Cmp("=", BinOp("+", Var("x"), Var("y")), Lit(Fraction(3))), sigma)


def test_eval_bool_homomorphism_exhaustive():
    # Boolean connectives agree with the semiring operations on {0, 1}.
    atoms = {True: TRUE, False: FALSE}
    sigma = ProgramState.make()
    to_w = lambda b: BOOL.one if b else BOOL.zero
    for a, b in itertools.product([True, False], repeat=2):
        assert to_w(eval_bool(Or(atoms[a], atoms[b]), sigma)) == BOOL.add(to_w(a), to_w(b))
        assert to_w(eval_bool(And(atoms[a], atoms[b]), sigma)) == BOOL.mul(to_w(a), to_w(b))
        assert to_w(eval_bool(Not(atoms[a]), sigma)) == (BOOL.one if not a else BOOL.zero)
        assert eval_bool(negate(atoms[a]), sigma) == (not a)


def test_eval_guard(s0):
    assert eval_guard(ConstGuard(Fraction(1, 2)), s0, PROB) == Fraction(1, 2)
    assert eval_guard(BoolGuard(FALSE), s0, PROB) == Fraction(0)
    sigma = ProgramState.make(i=3, j=3)
    assert eval_guard(BoolGuard(Cmp("<=", Var("i"), Var("j"))), sigma, BOOL) == Fraction(1)


def test_eval_guard_unbound():
    with pytest.raises(UnboundVariable):
        eval_guard(BoolGuard(Cmp("=", Var("z"), Lit(Fraction(0)))), ProgramState.make(x=0), BOOL)


def test_negative_exponent():
    sigma = ProgramState.make(k=3)
    expr = BinOp("^", Lit(Fraction(2)), BinOp("-", Lit(Fraction(0)), Var("k")))
    assert eval_arith(expr, sigma) == Fraction(1, 8)


def test_state_canonical_order():
    a = ProgramState.make(y=2, x=1)
    b = ProgramState.make(x=1, y=2)
    assert a == b
    assert str(a) == "(x=1,y=2)"
    assert sorted([ProgramState.make(x=2), ProgramState.make(x=1)])[0] == ProgramState.make(x=1)
