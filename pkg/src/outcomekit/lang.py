"""Syntax of the weighted imperative language: AST, parser, desugaring,
and guard/expression evaluation over exact rational program states.

Grammar (UTF-8 text, ``//`` comments)::

    program  := [ 'vars' NAME (',' NAME)* [';'] ] command
    command  := seq ( '+' seq | '+[' weight ']' seq )*
    seq      := atom ( ';' atom )*
    atom     := 'skip' | 'assume' guard | NAME ':=' aexpr
              | NAME ':=' 'nondet_flag'
              | 'if' bexpr 'then' atom 'else' atom
              | 'while' bexpr 'do' atom
              | 'iter' atom '[' guard ']' '[' guard ']'
              | '(' command ')'

``;`` binds tighter than ``+``; the bodies of ``if``/``while``/``iter`` are
single commands, so compound bodies need parentheses. Arithmetic is exact
rational; ``a/b`` with integer literals is a rational constant (there is no
division operator in programs). ``^`` is exponentiation with an
integer-valued exponent; negative exponents invert the base.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from .semiring import (
    CarrierError,
    OutcomeKitError,
    Weight,
    format_weight,
    is_inf,
    INF,
)


class LangError(OutcomeKitError):
    pass


class ParseError(LangError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UnboundVariable(LangError):
    pass


class EvalError(LangError):
    pass


# ---------------------------------------------------------------------------
# Program states


@dataclass(frozen=True, order=True)
class ProgramState:
    """Immutable variable binding, canonically ordered by variable name."""

    items: Tuple[Tuple[str, Fraction], ...]

    def __post_init__(self):
        # Fraction hashing is expensive; states are used as dict keys in
        # every engine step, so cache the hash once.
        object.__setattr__(self, "_hash", hash(self.items))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    @staticmethod
    def make(bindings: Optional[Dict[str, Fraction]] = None, **kw) -> "ProgramState":
        merged = dict(bindings or {})
        merged.update({k: Fraction(v) for k, v in kw.items()})
        return ProgramState(tuple(sorted((k, Fraction(v)) for k, v in merged.items())))

    def get(self, name: str) -> Fraction:
        for k, v in self.items:
            if k == name:
                return v
        raise UnboundVariable(f"variable {name!r} is not bound")

    def set(self, name: str, value: Fraction) -> "ProgramState":
        rest = tuple((k, v) for k, v in self.items if k != name)
        return ProgramState(tuple(sorted(rest + ((name, Fraction(value)),))))

    def names(self) -> Tuple[str, ...]:
        return tuple(k for k, _ in self.items)

    def __str__(self) -> str:
        inner = ",".join(f"{k}={_fmt_value(v)}" for k, v in self.items)
        return f"({inner})"


def _fmt_value(v: Fraction) -> str:
    return str(v)


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/', '^'
    left: "ArithExpr"
    right: "ArithExpr"


ArithExpr = Union[Var, Lit, BinOp]


@dataclass(frozen=True)
class BTrue:
    pass


@dataclass(frozen=True)
class BFalse:
    pass


@dataclass(frozen=True)
class Cmp:
    op: str  # '=', '!=', '<', '<=', '>', '>='
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True)
class Not:
    arg: "BoolExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


BoolExpr = Union[BTrue, BFalse, Cmp, Not, And, Or]

TRUE = BTrue()
FALSE = BFalse()


def eval_arith(e: ArithExpr, sigma: ProgramState) -> Fraction:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return sigma.get(e.name)
    if isinstance(e, BinOp):
        a = eval_arith(e.left, sigma)
        b = eval_arith(e.right, sigma)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0:
                raise EvalError("division by zero")
            return a / b
        if e.op == "^":
            if b.denominator != 1:
                raise EvalError(f"exponent must be an integer, got {b}")
            n = b.numerator
            if n >= 0:
                return a ** n
            if a == 0:
                raise EvalError("zero base with negative exponent")
            return Fraction(1) / (a ** (-n))
    raise EvalError(f"bad arithmetic expression: {e!r}")


def eval_bool(b: BoolExpr, sigma: ProgramState) -> bool:
    if isinstance(b, BTrue):
        return True
    if isinstance(b, BFalse):
        return False
    if isinstance(b, Not):
        return not eval_bool(b.arg, sigma)
    if isinstance(b, And):
        return eval_bool(b.left, sigma) and eval_bool(b.right, sigma)
    if isinstance(b, Or):
        return eval_bool(b.left, sigma) or eval_bool(b.right, sigma)
    if isinstance(b, Cmp):
        a = eval_arith(b.left, sigma)
        c = eval_arith(b.right, sigma)
        return {
            "=": a == c,
            "!=": a != c,
            "<": a < c,
            "<=": a <= c,
            ">": a > c,
            ">=": a >= c,
        }[b.op]
    raise EvalError(f"bad boolean expression: {b!r}")


# ---------------------------------------------------------------------------
# Guards


@dataclass(frozen=True)
class BoolGuard:
    expr: BoolExpr


@dataclass(frozen=True)
class ConstGuard:
    weight: Weight


Guard = Union[BoolGuard, ConstGuard]


def eval_guard(e: Guard, sigma: ProgramState, semiring) -> Weight:
    if isinstance(e, ConstGuard):
        return semiring.check(e.weight)
    if isinstance(e, BoolGuard):
        return semiring.one if eval_bool(e.expr, sigma) else semiring.zero
    raise EvalError(f"bad guard: {e!r}")


def negate(b: BoolExpr) -> BoolExpr:
    if isinstance(b, Not):
        return b.arg
    if isinstance(b, BTrue):
        return FALSE
    if isinstance(b, BFalse):
        return TRUE
    return Not(b)


# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assume:
    guard: Guard


@dataclass(frozen=True)
class Assign:
    var: str
    expr: ArithExpr


@dataclass(frozen=True)
class NondetFlag:
    """Atomic action setting ``var`` to 0 or 1 nondeterministically.

    Models an allocator-style success flag; Boolean semiring only.
    """

    var: str


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class Choice:
    left: "Command"
    right: "Command"


@dataclass(frozen=True)
class Iter:
    body: "Command"
    enter: Guard
    exit: Guard


@dataclass(frozen=True)
class If:
    cond: BoolExpr
    then: "Command"
    orelse: "Command"


@dataclass(frozen=True)
class While:
    cond: BoolExpr
    body: "Command"


@dataclass(frozen=True)
class ProbChoice:
    weight: Weight
    left: "Command"
    right: "Command"


Command = Union[Skip, Assume, Assign, NondetFlag, Seq, Choice, Iter, If, While, ProbChoice]


def desugar(c: Command) -> Command:
    """Rewrite sugar nodes into the core language.

    ``if b then C1 else C2`` becomes ``(assume b ; C1) + (assume !b ; C2)``,
    ``while b do C`` becomes ``iter C [b][!b]``, and ``C1 +[p] C2`` becomes
    ``(assume p ; C1) + (assume 1-p ; C2)``.
    """
    if isinstance(c, (Skip, Assume, Assign, NondetFlag)):
        return c
    if isinstance(c, Seq):
        return Seq(desugar(c.first), desugar(c.second))
    if isinstance(c, Choice):
        return Choice(desugar(c.left), desugar(c.right))
    if isinstance(c, Iter):
        return Iter(desugar(c.body), c.enter, c.exit)
    if isinstance(c, If):
        return Choice(
            Seq(Assume(BoolGuard(c.cond)), desugar(c.then)),
            Seq(Assume(BoolGuard(negate(c.cond))), desugar(c.orelse)),
        )
    if isinstance(c, While):
        return Iter(desugar(c.body), BoolGuard(c.cond), BoolGuard(negate(c.cond)))
    if isinstance(c, ProbChoice):
        p = c.weight
        if is_inf(p) or p < 0 or p > 1:
            raise CarrierError(f"choice weight {format_weight(p)} has no complement")
        return Choice(
            Seq(Assume(ConstGuard(p)), desugar(c.left)),
            Seq(Assume(ConstGuard(Fraction(1) - p)), desugar(c.right)),
        )
    raise LangError(f"bad command: {c!r}")


def is_desugared(c: Command) -> bool:
    if isinstance(c, (Skip, Assume, Assign, NondetFlag)):
        return True
    if isinstance(c, Seq):
        return is_desugared(c.first) and is_desugared(c.second)
    if isinstance(c, Choice):
        return is_desugared(c.left) and is_desugared(c.right)
    if isinstance(c, Iter):
        return is_desugared(c.body)
    return False


def command_variables(c: Command) -> set:
    """All variable names referenced (read or written) by a command."""
    out: set = set()

    def expr_vars(e) -> None:
        if isinstance(e, Var):
            out.add(e.name)
        elif isinstance(e, BinOp):
            expr_vars(e.left)
            expr_vars(e.right)

    def bool_vars(b) -> None:
        if isinstance(b, Cmp):
            expr_vars(b.left)
            expr_vars(b.right)
        elif isinstance(b, Not):
            bool_vars(b.arg)
        elif isinstance(b, (And, Or)):
            bool_vars(b.left)
            bool_vars(b.right)

    def guard_vars(g: Guard) -> None:
        if isinstance(g, BoolGuard):
            bool_vars(g.expr)

    def walk(cmd: Command) -> None:
        if isinstance(cmd, Assume):
            guard_vars(cmd.guard)
        elif isinstance(cmd, Assign):
            out.add(cmd.var)
            expr_vars(cmd.expr)
        elif isinstance(cmd, NondetFlag):
            out.add(cmd.var)
        elif isinstance(cmd, Seq):
            walk(cmd.first)
            walk(cmd.second)
        elif isinstance(cmd, (Choice, ProbChoice)):
            walk(cmd.left)
            walk(cmd.right)
        elif isinstance(cmd, Iter):
            walk(cmd.body)
            guard_vars(cmd.enter)
            guard_vars(cmd.exit)
        elif isinstance(cmd, If):
            bool_vars(cmd.cond)
            walk(cmd.then)
            walk(cmd.orelse)
        elif isinstance(cmd, While):
            bool_vars(cmd.cond)
            walk(cmd.body)

    walk(c)
    return out


# ---------------------------------------------------------------------------
# Tokenizer

_PUNCT = [
    ":=", "++", "+[", "<=", ">=", "!=", "==", "=>", "/\\", "\\/", "||", "&&",
    "..", "(", ")", "[", "]", "{", "}", ";", "+", "-", "*", "/", "^",
    "<", ">", "=", ",", "~", "!", ".", ":",
]


@dataclass
class Token:
    kind: str  # 'name', 'int', 'punct', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    line, col = 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_punct(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text in texts

    def at_name(self, *names: str) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.text in names

    def expect_punct(self, text: str) -> Token:
        tok = self.peek()
        if not self.at_punct(text):
            raise ParseError(f"expected {text!r}, got {tok.text!r}", tok.line, tok.col)
        return self.next()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind != "name":
            raise ParseError(f"expected a name, got {tok.text!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)


_KEYWORDS = {
    "skip", "assume", "if", "then", "else", "while", "do", "iter", "vars",
    "tru", "fls", "true", "false", "not", "and", "or", "inf", "nondet_flag",
}


# ---------------------------------------------------------------------------
# Expression parsing (shared with the assertion grammar)


def parse_arith(ts: TokenStream, allow_div: bool = False) -> ArithExpr:
    return _parse_additive(ts, allow_div)


def _parse_additive(ts: TokenStream, allow_div: bool) -> ArithExpr:
    e = _parse_multiplicative(ts, allow_div)
    while ts.at_punct("+", "-"):
        op = ts.next().text
        e = BinOp(op, e, _parse_multiplicative(ts, allow_div))
    return e


def _parse_multiplicative(ts: TokenStream, allow_div: bool) -> ArithExpr:
    e = _parse_power(ts, allow_div)
    while ts.at_punct("*") or (allow_div and ts.at_punct("/")):
        op = ts.next().text
        e = BinOp(op, e, _parse_power(ts, allow_div))
    return e


def _parse_power(ts: TokenStream, allow_div: bool) -> ArithExpr:
    e = _parse_atom_expr(ts, allow_div)
    if ts.at_punct("^"):
        ts.next()
        # right-associative
        return BinOp("^", e, _parse_power(ts, allow_div))
    return e


def _parse_atom_expr(ts: TokenStream, allow_div: bool) -> ArithExpr:
    tok = ts.peek()
    if ts.at_punct("-"):
        ts.next()
        return BinOp("-", Lit(Fraction(0)), _parse_atom_expr(ts, allow_div))
    if ts.at_punct("("):
        ts.next()
        e = _parse_additive(ts, allow_div)
        ts.expect_punct(")")
        return e
    if tok.kind == "int":
        ts.next()
        value = Fraction(int(tok.text))
        # Rational literal a/b: only when both sides are bare integers.
        if (
            not allow_div
            and ts.at_punct("/")
            and ts.tokens[ts.pos + 1].kind == "int"
        ):
            ts.next()
            denom = int(ts.next().text)
            if denom == 0:
                raise ParseError("zero denominator", tok.line, tok.col)
            value = value / denom
        return Lit(value)
    if tok.kind == "name" and tok.text not in _KEYWORDS:
        ts.next()
        return Var(tok.text)
    raise ts.error(f"expected an expression, got {tok.text!r}")


_CMP_OPS = {"=": "=", "==": "=", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def parse_bool(ts: TokenStream, allow_div: bool = False) -> BoolExpr:
    return _parse_or(ts, allow_div)


def _parse_or(ts: TokenStream, allow_div: bool) -> BoolExpr:
    e = _parse_and(ts, allow_div)
    while ts.at_punct("\\/", "||") or ts.at_name("or"):
        ts.next()
        e = Or(e, _parse_and(ts, allow_div))
    return e


def _parse_and(ts: TokenStream, allow_div: bool) -> BoolExpr:
    e = _parse_bool_atom(ts, allow_div)
    while ts.at_punct("/\\", "&&") or ts.at_name("and"):
        ts.next()
        e = And(e, _parse_bool_atom(ts, allow_div))
    return e


def _parse_bool_atom(ts: TokenStream, allow_div: bool) -> BoolExpr:
    tok = ts.peek()
    if ts.at_punct("~", "!") or ts.at_name("not"):
        ts.next()
        return Not(_parse_bool_atom(ts, allow_div))
    if ts.at_name("tru", "true"):
        ts.next()
        return TRUE
    if ts.at_name("fls", "false"):
        ts.next()
        return FALSE
    if ts.at_punct("("):
        # Could be a parenthesized boolean or the left side of a comparison.
        save = ts.pos
        ts.next()
        try:
            inner = _parse_or(ts, allow_div)
            ts.expect_punct(")")
            if ts.at_punct(*_CMP_OPS):
                raise ParseError("comparison of boolean", tok.line, tok.col)
            return inner
        except ParseError:
            ts.pos = save
    left = parse_arith(ts, allow_div)
    op_tok = ts.peek()
    if op_tok.kind == "punct" and op_tok.text in _CMP_OPS:
        ts.next()
        right = parse_arith(ts, allow_div)
        return Cmp(_CMP_OPS[op_tok.text], left, right)
    raise ts.error(f"expected a comparison, got {op_tok.text!r}")


def parse_weight_expr(ts: TokenStream) -> ArithExpr:
    """Weight expressions allow full division (used in assertions)."""
    return parse_arith(ts, allow_div=True)


def parse_guard(ts: TokenStream) -> Guard:
    tok = ts.peek()
    if ts.at_name("inf"):
        ts.next()
        return ConstGuard(INF)
    if tok.kind == "int":
        # Weight constant unless it starts a comparison (e.g. "1 < x").
        save = ts.pos
        e = parse_arith(ts)
        if ts.peek().kind == "punct" and ts.peek().text in _CMP_OPS:
            ts.pos = save
            return BoolGuard(parse_bool(ts))
        if not isinstance(e, Lit):
            raise ParseError("bad weight literal", tok.line, tok.col)
        return ConstGuard(e.value)
    return BoolGuard(parse_bool(ts))


# ---------------------------------------------------------------------------
# Command parsing


def parse_command(ts: TokenStream) -> Command:
    return _parse_choice(ts)


def _parse_choice(ts: TokenStream) -> Command:
    e = _parse_seq(ts)
    while ts.at_punct("+", "+["):
        tok = ts.next()
        if tok.text == "+[":
            w_expr = parse_weight_expr(ts)
            ts.expect_punct("]")
            w = _const_weight(w_expr, tok)
            e = ProbChoice(w, e, _parse_seq(ts))
        else:
            e = Choice(e, _parse_seq(ts))
    return e


def _const_weight(e: ArithExpr, tok: Token) -> Weight:
    try:
        return eval_arith(e, ProgramState.make())
    except LangError:
        raise ParseError("choice weight must be a constant", tok.line, tok.col)


def _parse_seq(ts: TokenStream) -> Command:
    parts = [_parse_atom_command(ts)]
    while ts.at_punct(";"):
        ts.next()
        if ts.peek().kind == "eof" or ts.at_punct(")"):
            break  # tolerate a trailing semicolon
        parts.append(_parse_atom_command(ts))
    cmd = parts[-1]
    for part in reversed(parts[:-1]):
        cmd = Seq(part, cmd)
    return cmd


def _parse_atom_command(ts: TokenStream) -> Command:
    tok = ts.peek()
    if ts.at_punct("("):
        ts.next()
        cmd = parse_command(ts)
        ts.expect_punct(")")
        return cmd
    if ts.at_name("skip"):
        ts.next()
        return Skip()
    if ts.at_name("assume"):
        ts.next()
        return Assume(parse_guard(ts))
    if ts.at_name("if"):
        ts.next()
        cond = parse_bool(ts)
        if not ts.at_name("then"):
            raise ts.error("expected 'then'")
        ts.next()
        then = _parse_atom_command(ts)
        if not ts.at_name("else"):
            raise ts.error("expected 'else'")
        ts.next()
        orelse = _parse_atom_command(ts)
        return If(cond, then, orelse)
    if ts.at_name("while"):
        ts.next()
        cond = parse_bool(ts)
        if not ts.at_name("do"):
            raise ts.error("expected 'do'")
        ts.next()
        return While(cond, _parse_atom_command(ts))
    if ts.at_name("iter"):
        ts.next()
        body = _parse_atom_command(ts)
        ts.expect_punct("[")
        enter = parse_guard(ts)
        ts.expect_punct("]")
        ts.expect_punct("[")
        exit_ = parse_guard(ts)
        ts.expect_punct("]")
        return Iter(body, enter, exit_)
    if tok.kind == "name" and tok.text not in _KEYWORDS:
        name = ts.next().text
        ts.expect_punct(":=")
        if ts.at_name("nondet_flag"):
            ts.next()
            return NondetFlag(name)
        return Assign(name, parse_arith(ts))
    raise ts.error(f"expected a command, got {tok.text!r}")


def parse_program(text: str) -> Tuple[Command, List[str]]:
    """Parse a program. Returns the command and the declared variable list.

    A ``vars`` header, when present, declares the program's variables; any
    other variable reference is rejected. Without the header the declared
    list is inferred from the program text.
    """
    ts = TokenStream(tokenize(text))
    declared: List[str] = []
    have_header = False
    if ts.at_name("vars"):
        have_header = True
        ts.next()
        declared.append(ts.expect_name().text)
        while ts.at_punct(","):
            ts.next()
            declared.append(ts.expect_name().text)
        if ts.at_punct(";"):
            ts.next()
    cmd = parse_command(ts)
    tok = ts.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    used = command_variables(cmd)
    if have_header:
        undeclared = sorted(used - set(declared))
        if undeclared:
            raise UnboundVariable(
                f"variables not declared in vars header: {', '.join(undeclared)}"
            )
    else:
        declared = sorted(used)
    return cmd, declared


# ---------------------------------------------------------------------------
# Pretty printer (inverse of the parser on desugared commands)


def format_arith(e: ArithExpr) -> str:
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        return f"({format_arith(e.left)} {e.op} {format_arith(e.right)})"
    raise LangError(f"bad expression: {e!r}")


def format_bool(b: BoolExpr) -> str:
    if isinstance(b, BTrue):
        return "tru"
    if isinstance(b, BFalse):
        return "fls"
    if isinstance(b, Not):
        return f"~{format_bool(b.arg)}"
    if isinstance(b, And):
        return f"({format_bool(b.left)} /\\ {format_bool(b.right)})"
    if isinstance(b, Or):
        return f"({format_bool(b.left)} \\/ {format_bool(b.right)})"
    if isinstance(b, Cmp):
        return f"{format_arith(b.left)} {b.op} {format_arith(b.right)}"
    raise LangError(f"bad boolean expression: {b!r}")


def format_guard(g: Guard) -> str:
    if isinstance(g, ConstGuard):
        return format_weight(g.weight)
    return format_bool(g.expr)


def format_command(c: Command) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Assume):
        return f"assume {format_guard(c.guard)}"
    if isinstance(c, Assign):
        return f"{c.var} := {format_arith(c.expr)}"
    if isinstance(c, NondetFlag):
        return f"{c.var} := nondet_flag"
    if isinstance(c, Seq):
        return f"({format_command(c.first)} ; {format_command(c.second)})"
    if isinstance(c, Choice):
        return f"({format_command(c.left)} + {format_command(c.right)})"
    if isinstance(c, Iter):
        return (
            f"iter ({format_command(c.body)}) "
            f"[{format_guard(c.enter)}][{format_guard(c.exit)}]"
        )
    if isinstance(c, If):
        return (
            f"if {format_bool(c.cond)} then ({format_command(c.then)}) "
            f"else ({format_command(c.orelse)})"
        )
    if isinstance(c, While):
        return f"while {format_bool(c.cond)} do ({format_command(c.body)})"
    if isinstance(c, ProbChoice):
        return (
            f"({format_command(c.left)} +[{format_weight(c.weight)}] "
            f"{format_command(c.right)})"
        )
    raise LangError(f"bad command: {c!r}")
