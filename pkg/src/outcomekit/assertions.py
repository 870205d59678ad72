"""Outcome assertions: syntax, satisfaction, entailment, modal sugar, and
limit recognition for indexed assertion families.

An assertion denotes a set of weightings. Satisfaction is decided exactly
on finite-support weightings; the one search involved (splitting a
weighting across an outcome conjunction) is budgeted and reports
``SplitSearchExceeded`` rather than guessing.

Weights inside assertions are arithmetic expressions that may mention the
family index (written ``n`` by convention), e.g. ``(x=n)^(1/2^(n+1))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from . import lang
from .lang import (
    And,
    ArithExpr,
    BinOp,
    BoolExpr,
    BoolGuard,
    Cmp,
    ConstGuard,
    Guard,
    Lit,
    Not,
    Or,
    ProgramState,
    TokenStream,
    TRUE,
    FALSE,
    Var,
    eval_arith,
    eval_bool,
    format_bool,
    parse_bool,
    parse_weight_expr,
    tokenize,
)
from .semiring import (
    INF,
    Infinity,
    OutcomeKitError,
    Semiring,
    Undefined,
    Weight,
    format_weight,
    is_inf,
)
from .weighting import DIV, Divergence, Outcome, Weighting, scale_left, unit, wsum


class SplitSearchExceeded(OutcomeKitError):
    """The split/satisfaction search ran out of budget; verdict unknown."""


class AssertionError_(OutcomeKitError):
    pass


# ---------------------------------------------------------------------------
# Weight expressions


@dataclass(frozen=True)
class InfConst:
    def __repr__(self) -> str:
        return "inf"


WeightExpr = Union[ArithExpr, InfConst]


def eval_weight_expr(e: WeightExpr, env: Optional[Dict[str, Fraction]] = None) -> Weight:
    if isinstance(e, InfConst):
        return INF
    sigma = ProgramState.make(env or {})
    return eval_arith(e, sigma)


def weight_expr_of(w: Weight) -> WeightExpr:
    return InfConst() if is_inf(w) else Lit(w)


def subst_arith(e: ArithExpr, name: str, value: Fraction) -> ArithExpr:
    if isinstance(e, Var):
        return Lit(value) if e.name == name else e
    if isinstance(e, BinOp):
        return BinOp(e.op, subst_arith(e.left, name, value), subst_arith(e.right, name, value))
    return e


def subst_weight(e: WeightExpr, name: str, value: Fraction) -> WeightExpr:
    if isinstance(e, InfConst):
        return e
    return subst_arith(e, name, value)


def subst_bool(b: BoolExpr, name: str, value: Fraction) -> BoolExpr:
    if isinstance(b, Cmp):
        return Cmp(b.op, subst_arith(b.left, name, value), subst_arith(b.right, name, value))
    if isinstance(b, Not):
        return Not(subst_bool(b.arg, name, value))
    if isinstance(b, And):
        return And(subst_bool(b.left, name, value), subst_bool(b.right, name, value))
    if isinstance(b, Or):
        return Or(subst_bool(b.left, name, value), subst_bool(b.right, name, value))
    return b


def arith_vars(e: WeightExpr) -> Set[str]:
    if isinstance(e, InfConst) or isinstance(e, Lit):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return arith_vars(e.left) | arith_vars(e.right)
    return set()


def bool_vars(b: BoolExpr) -> Set[str]:
    if isinstance(b, Cmp):
        return arith_vars(b.left) | arith_vars(b.right)
    if isinstance(b, Not):
        return bool_vars(b.arg)
    if isinstance(b, (And, Or)):
        return bool_vars(b.left) | bool_vars(b.right)
    return set()


# Geometric normal form: a weight expression as sum(c_r * r^n) over bases r,
# with the constant part stored under base 1. Returns None when the
# expression is not of that shape.

NormalForm = Dict[Fraction, Fraction]


def _linear_in(e: ArithExpr, name: str) -> Optional[Tuple[Fraction, Fraction]]:
    """Decompose e as slope*name + intercept with rational slope."""
    if isinstance(e, Lit):
        return (Fraction(0), e.value)
    if isinstance(e, Var):
        if e.name == name:
            return (Fraction(1), Fraction(0))
        return None
    if isinstance(e, BinOp):
        l = _linear_in(e.left, name)
        r = _linear_in(e.right, name)
        if e.op == "+" and l and r:
            return (l[0] + r[0], l[1] + r[1])
        if e.op == "-" and l and r:
            return (l[0] - r[0], l[1] - r[1])
        if e.op == "*" and l and r:
            if l[0] == 0:
                return (l[1] * r[0], l[1] * r[1])
            if r[0] == 0:
                return (r[1] * l[0], r[1] * l[1])
        if e.op == "/" and l and r and r[0] == 0 and r[1] != 0:
            return (l[0] / r[1], l[1] / r[1])
    return None


def geometric_normal_form(e: WeightExpr, index: str) -> Optional[NormalForm]:
    if isinstance(e, InfConst):
        return None
    if isinstance(e, Lit):
        return {Fraction(1): e.value} if e.value != 0 else {}
    if isinstance(e, Var):
        return None  # a bare index is not a geometric shape
    if isinstance(e, BinOp):
        if e.op in ("+", "-"):
            a = geometric_normal_form(e.left, index)
            b = geometric_normal_form(e.right, index)
            if a is None or b is None:
                return None
            out = dict(a)
            for r, c in b.items():
                c2 = out.get(r, Fraction(0)) + (c if e.op == "+" else -c)
                if c2 == 0:
                    out.pop(r, None)
                else:
                    out[r] = c2
            return out
        if e.op == "*":
            a = geometric_normal_form(e.left, index)
            b = geometric_normal_form(e.right, index)
            if a is None or b is None:
                return None
            out: NormalForm = {}
            for r1, c1 in a.items():
                for r2, c2 in b.items():
                    r = r1 * r2
                    c = out.get(r, Fraction(0)) + c1 * c2
                    if c == 0:
                        out.pop(r, None)
                    else:
                        out[r] = c
            return out
        if e.op == "/":
            a = geometric_normal_form(e.left, index)
            b = geometric_normal_form(e.right, index)
            if a is None or b is None or len(b) != 1:
                return None
            (rb, cb), = b.items()
            if cb == 0:
                return None
            out = {}
            for r, c in a.items():
                out[r / rb] = c / cb
            return out
        if e.op == "^":
            base = geometric_normal_form(e.left, index)
            if base is None or len(base) > 1:
                return None
            if base == {}:
                base_val = Fraction(0)
            else:
                (rb, cb), = base.items()
                if rb != 1:
                    return None
                base_val = cb
            lin = _linear_in(e.right, index)
            if lin is None:
                return None
            slope, intercept = lin
            if slope.denominator != 1 or intercept.denominator != 1:
                return None
            if base_val <= 0:
                return None
            a_int = int(slope)
            b_int = int(intercept)
            r = base_val ** a_int if a_int >= 0 else Fraction(1) / (base_val ** (-a_int))
            c = base_val ** b_int if b_int >= 0 else Fraction(1) / (base_val ** (-b_int))
            if a_int == 0:
                return {Fraction(1): c} if c != 0 else {}
            return {r: c}
    return None


def normal_form_value(nf: NormalForm, n: int) -> Fraction:
    return sum((c * (r ** n) for r, c in nf.items()), Fraction(0))


# ---------------------------------------------------------------------------
# Assertion syntax tree


@dataclass(frozen=True)
class Atom:
    """States covered by ``pred`` with total mass ``weight``."""

    pred: BoolExpr
    weight: WeightExpr


@dataclass(frozen=True)
class DivAtom:
    """Exactly the weighting putting ``weight * top`` on divergence."""

    weight: WeightExpr


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class NotA:
    arg: "Assertion"


@dataclass(frozen=True)
class AndA:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class OrA:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class ImpliesA:
    left: "Assertion"
    right: "Assertion"


@dataclass(frozen=True)
class OPlus:
    parts: Tuple["Assertion", ...]


@dataclass(frozen=True)
class ScaleL:
    weight: WeightExpr
    arg: "Assertion"


@dataclass(frozen=True)
class ScaleR:
    arg: "Assertion"
    weight: WeightExpr


@dataclass(frozen=True)
class ExistsIdx:
    var: str
    lo: int
    hi: int
    body: "Assertion"


@dataclass(frozen=True)
class ExistsWeight:
    var: str
    choices: Tuple[Weight, ...]
    body: "Assertion"


@dataclass(frozen=True)
class OPlusFamily:
    """Outcome conjunction over all naturals: one summand per index value."""

    var: str
    body: "Assertion"


@dataclass(frozen=True)
class Box:
    pred: BoolExpr


@dataclass(frozen=True)
class Diamond:
    pred: BoolExpr


@dataclass(frozen=True)
class BoxTotal:
    pred: BoolExpr


@dataclass(frozen=True)
class DiamondPartial:
    pred: BoolExpr


@dataclass(frozen=True)
class AlwaysDiv:
    """All weight, if any, sits on divergence (a top multiple)."""


@dataclass(frozen=True)
class SometimesDiv:
    """Divergence carries an irreducible nonzero share of weight."""


@dataclass(frozen=True)
class Singleton:
    m: Weighting


@dataclass(frozen=True)
class SuppSubset:
    """Extensional form: support contained in the predicate's states,
    optionally together with divergence."""

    pred: BoolExpr
    include_div: bool


@dataclass(frozen=True)
class SuppMeets:
    """Extensional form: support meets the predicate's states (or
    divergence, when included)."""

    pred: BoolExpr
    include_div: bool


Assertion = Union[
    Atom, DivAtom, Top, Bot, NotA, AndA, OrA, ImpliesA, OPlus, ScaleL, ScaleR,
    ExistsIdx, ExistsWeight, OPlusFamily, Box, Diamond, BoxTotal,
    DiamondPartial, AlwaysDiv, SometimesDiv, Singleton, SuppSubset, SuppMeets,
]

EMPTY_ATOM = Atom(TRUE, Lit(Fraction(0)))


def subst_assertion(a: Assertion, name: str, value: Fraction) -> Assertion:
    s = lambda x: subst_assertion(x, name, value)
    if isinstance(a, Atom):
        return Atom(subst_bool(a.pred, name, value), subst_weight(a.weight, name, value))
    if isinstance(a, DivAtom):
        return DivAtom(subst_weight(a.weight, name, value))
    if isinstance(a, NotA):
        return NotA(s(a.arg))
    if isinstance(a, AndA):
        return AndA(s(a.left), s(a.right))
    if isinstance(a, OrA):
        return OrA(s(a.left), s(a.right))
    if isinstance(a, ImpliesA):
        return ImpliesA(s(a.left), s(a.right))
    if isinstance(a, OPlus):
        return OPlus(tuple(s(p) for p in a.parts))
    if isinstance(a, ScaleL):
        return ScaleL(subst_weight(a.weight, name, value), s(a.arg))
    if isinstance(a, ScaleR):
        return ScaleR(s(a.arg), subst_weight(a.weight, name, value))
    if isinstance(a, ExistsIdx):
        if a.var == name:
            return a
        return ExistsIdx(a.var, a.lo, a.hi, s(a.body))
    if isinstance(a, ExistsWeight):
        if a.var == name:
            return a
        return ExistsWeight(a.var, a.choices, s(a.body))
    if isinstance(a, OPlusFamily):
        if a.var == name:
            return a
        return OPlusFamily(a.var, s(a.body))
    if isinstance(a, (Box, Diamond, BoxTotal, DiamondPartial)):
        return type(a)(subst_bool(a.pred, name, value))
    if isinstance(a, (SuppSubset, SuppMeets)):
        return type(a)(subst_bool(a.pred, name, value), a.include_div)
    return a


def assertion_free_index(a: Assertion, name: str) -> bool:
    """Does ``name`` occur free in predicates or weights of ``a``?"""
    if isinstance(a, Atom):
        return name in bool_vars(a.pred) or name in arith_vars(a.weight)
    if isinstance(a, DivAtom):
        return name in arith_vars(a.weight)
    if isinstance(a, NotA):
        return assertion_free_index(a.arg, name)
    if isinstance(a, (AndA, OrA, ImpliesA)):
        return assertion_free_index(a.left, name) or assertion_free_index(a.right, name)
    if isinstance(a, OPlus):
        return any(assertion_free_index(p, name) for p in a.parts)
    if isinstance(a, ScaleL):
        return name in arith_vars(a.weight) or assertion_free_index(a.arg, name)
    if isinstance(a, ScaleR):
        return name in arith_vars(a.weight) or assertion_free_index(a.arg, name)
    if isinstance(a, (ExistsIdx, ExistsWeight, OPlusFamily)):
        if a.var == name:
            return False
        return assertion_free_index(a.body, name)
    if isinstance(a, (Box, Diamond, BoxTotal, DiamondPartial, SuppSubset, SuppMeets)):
        return name in bool_vars(a.pred)
    return False


# ---------------------------------------------------------------------------
# Simplification and equality


def _ground_weight(e: WeightExpr) -> Optional[Weight]:
    if isinstance(e, InfConst):
        return INF
    if not arith_vars(e):
        try:
            return eval_weight_expr(e)
        except lang.LangError:
            return None
    return None


def simplify(a: Assertion) -> Assertion:
    if isinstance(a, (Atom, DivAtom)):
        w = _ground_weight(a.weight)
        if w is not None:
            if not is_inf(w) and w == 0:
                return EMPTY_ATOM
            a = type(a)(a.pred, weight_expr_of(w)) if isinstance(a, Atom) else DivAtom(weight_expr_of(w))
        return a
    if isinstance(a, NotA):
        return NotA(simplify(a.arg))
    if isinstance(a, (AndA, OrA, ImpliesA)):
        return type(a)(simplify(a.left), simplify(a.right))
    if isinstance(a, OPlus):
        parts: List[Assertion] = []
        for p in a.parts:
            p = simplify(p)
            if isinstance(p, OPlus):
                parts.extend(p.parts)
            elif p != EMPTY_ATOM:
                parts.append(p)
        parts.sort(key=repr)
        if not parts:
            return EMPTY_ATOM
        if len(parts) == 1:
            return parts[0]
        return OPlus(tuple(parts))
    if isinstance(a, (ScaleL, ScaleR)):
        inner = simplify(a.arg)
        w = _ground_weight(a.weight)
        if w is not None and not is_inf(w):
            if w == 1:
                return inner
            if w == 0 and isinstance(inner, (Top, Atom, DivAtom)):
                # 0 * phi is the empty weighting whenever phi is satisfiable;
                # Top and ground atoms are.
                return EMPTY_ATOM
        if isinstance(inner, OPlus):
            # scaling distributes over the pointwise sum
            if isinstance(a, ScaleL):
                return simplify(OPlus(tuple(ScaleL(a.weight, p) for p in inner.parts)))
            return simplify(OPlus(tuple(ScaleR(p, a.weight) for p in inner.parts)))
        if isinstance(inner, Atom):
            mul_expr = (
                BinOp("*", a.weight, inner.weight)
                if isinstance(a, ScaleL)
                else BinOp("*", inner.weight, a.weight)
            )
            return simplify(Atom(inner.pred, mul_expr))
        if isinstance(inner, DivAtom):
            return simplify(DivAtom(BinOp("*", a.weight, inner.weight)))
        return type(a)(a.weight, inner) if isinstance(a, ScaleL) else ScaleR(inner, a.weight)
    if isinstance(a, ExistsIdx):
        return ExistsIdx(a.var, a.lo, a.hi, simplify(a.body))
    if isinstance(a, ExistsWeight):
        return ExistsWeight(a.var, a.choices, simplify(a.body))
    if isinstance(a, OPlusFamily):
        return OPlusFamily(a.var, simplify(a.body))
    return a


def assertion_equal(a: Assertion, b: Assertion) -> bool:
    return simplify(a) == simplify(b)


# ---------------------------------------------------------------------------
# Modal expansion


def expand_modal(a: Assertion) -> Assertion:
    """Rewrite modal sugar into extensional support characterizations,
    which are directly decidable on finite-support weightings.

    The always modality makes no termination guarantee, so divergence is
    admitted into the support; the total variant excludes it, and the two
    sometimes modalities are their De Morgan duals.
    """
    if isinstance(a, Box):
        return SuppSubset(a.pred, include_div=True)
    if isinstance(a, BoxTotal):
        return SuppSubset(a.pred, include_div=False)
    if isinstance(a, Diamond):
        return SuppMeets(a.pred, include_div=False)
    if isinstance(a, DiamondPartial):
        return SuppMeets(a.pred, include_div=True)
    if isinstance(a, NotA):
        return NotA(expand_modal(a.arg))
    if isinstance(a, (AndA, OrA, ImpliesA)):
        return type(a)(expand_modal(a.left), expand_modal(a.right))
    if isinstance(a, OPlus):
        return OPlus(tuple(expand_modal(p) for p in a.parts))
    if isinstance(a, ScaleL):
        return ScaleL(a.weight, expand_modal(a.arg))
    if isinstance(a, ScaleR):
        return ScaleR(expand_modal(a.arg), a.weight)
    if isinstance(a, ExistsIdx):
        return ExistsIdx(a.var, a.lo, a.hi, expand_modal(a.body))
    if isinstance(a, ExistsWeight):
        return ExistsWeight(a.var, a.choices, expand_modal(a.body))
    if isinstance(a, OPlusFamily):
        return OPlusFamily(a.var, expand_modal(a.body))
    return a


# ---------------------------------------------------------------------------
# Satisfaction


DEFAULT_BUDGET = 50000


def _is_top_multiple(sr: Semiring, w: Weight) -> bool:
    # {u * top : u in carrier}: everything when top == one, otherwise only
    # zero and top itself (strong infinity).
    if w == sr.zero:
        return True
    if sr.top == sr.one:
        return True
    return w == sr.top


def _div_indicates(sr: Semiring, w: Weight) -> bool:
    # Is there a nonzero u with u * top <= w?
    if sr.top == sr.one:
        return w != sr.zero
    return w == sr.top


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def spend(self, amount: int = 1) -> None:
        self.left -= amount
        if self.left < 0:
            raise SplitSearchExceeded("split search budget exceeded")


def satisfies(m: Weighting, a: Assertion, budget: int = DEFAULT_BUDGET) -> bool:
    """Decide membership of ``m`` in the assertion's denoted set.

    Raises :class:`SplitSearchExceeded` when the outcome-conjunction split
    search cannot be completed within the budget; never returns a wrong
    verdict.
    """
    return _sat(m, simplify(a), _Budget(budget))


def _sat(m: Weighting, a: Assertion, budget: _Budget) -> bool:
    sr = m.semiring
    budget.spend()
    if isinstance(a, Top):
        return True
    if isinstance(a, Bot):
        return False
    if isinstance(a, NotA):
        return not _sat(m, a.arg, budget)
    if isinstance(a, AndA):
        return _sat(m, a.left, budget) and _sat(m, a.right, budget)
    if isinstance(a, OrA):
        return _sat(m, a.left, budget) or _sat(m, a.right, budget)
    if isinstance(a, ImpliesA):
        return (not _sat(m, a.left, budget)) or _sat(m, a.right, budget)
    if isinstance(a, Atom):
        w = _require_ground(a.weight)
        if m.div_weight() != sr.zero:
            return False
        if m.mass() != w:
            return False
        return all(eval_bool(a.pred, s) for s in m.states())
    if isinstance(a, DivAtom):
        w = _require_ground(a.weight)
        target = scale_left(sr.mul(sr.check(w), sr.top), unit(sr, DIV))
        return m == target
    if isinstance(a, (Box, BoxTotal, Diamond, DiamondPartial)):
        return _sat(m, expand_modal(a), budget)
    if isinstance(a, SuppSubset):
        if not a.include_div and m.div_weight() != sr.zero:
            return False
        return all(eval_bool(a.pred, s) for s in m.states())
    if isinstance(a, SuppMeets):
        if a.include_div and m.div_weight() != sr.zero:
            return True
        return any(eval_bool(a.pred, s) for s in m.states())
    if isinstance(a, AlwaysDiv):
        return not m.states() and _is_top_multiple(sr, m.div_weight())
    if isinstance(a, SometimesDiv):
        return _div_indicates(sr, m.div_weight())
    if isinstance(a, Singleton):
        return m == a.m
    if isinstance(a, ExistsIdx):
        return any(
            _sat(m, simplify(subst_assertion(a.body, a.var, Fraction(k))), budget)
            for k in range(a.lo, a.hi + 1)
        )
    if isinstance(a, ExistsWeight):
        for w in a.choices:
            inst = _subst_weight_var(a.body, a.var, w)
            if _sat(m, simplify(inst), budget):
                return True
        return False
    if isinstance(a, OPlus):
        return find_split(m, list(a.parts), budget) is not None
    if isinstance(a, (ScaleL, ScaleR)):
        return _sat_scaled(m, a, budget)
    if isinstance(a, OPlusFamily):
        return _sat_family(m, a, budget)
    raise AssertionError_(f"cannot decide assertion: {a!r}")


def _subst_weight_var(a: Assertion, var: str, w: Weight) -> Assertion:
    if is_inf(w):
        # Substitute an explicit infinity: rewrite weights Var(var) -> inf.
        def subst_inf(x: Assertion) -> Assertion:
            if isinstance(x, Atom) and x.weight == Var(var):
                return Atom(x.pred, InfConst())
            if isinstance(x, DivAtom) and x.weight == Var(var):
                return DivAtom(InfConst())
            if isinstance(x, OPlus):
                return OPlus(tuple(subst_inf(p) for p in x.parts))
            return x

        return subst_inf(a)
    return subst_assertion(a, var, w)


def _require_ground(e: WeightExpr) -> Weight:
    w = _ground_weight(e)
    if w is None:
        raise AssertionError_(f"assertion weight is not ground: {e!r}")
    return w


def _sat_scaled(m: Weighting, a: Union[ScaleL, ScaleR], budget: _Budget) -> bool:
    sr = m.semiring
    u = _require_ground(a.weight)
    inner = a.arg
    if not is_inf(u) and u == 0:
        if not m.is_empty():
            return False
        if _sat(Weighting.empty(sr), inner, budget):
            return True
        if isinstance(inner, Top):
            return True
        raise SplitSearchExceeded("0-scaled assertion with nontrivial body")
    if is_inf(u):
        if any(not is_inf(w) for w in m.entries.values()):
            return False
        candidate = Weighting(sr, {o: sr.one for o in m.entries})
        if _sat(candidate, inner, budget):
            return True
        raise SplitSearchExceeded("inf-scaled assertion not decided")
    # u is finite and nonzero: solve u * m' = m by exact division.
    entries = {}
    for o, w in m.entries.items():
        if is_inf(w):
            entries[o] = INF
            continue
        q = w / u
        if not sr.contains(q):
            return False
        entries[o] = q
    try:
        m2 = Weighting(sr, entries)
    except OutcomeKitError:
        return False
    from .weighting import scale_right

    rescaled = scale_left(u, m2) if isinstance(a, ScaleL) else scale_right(m2, u)
    if rescaled != m:
        return False
    return _sat(m2, inner, budget)


def _sat_family(m: Weighting, a: OPlusFamily, budget: _Budget) -> bool:
    # Decidable only when all summands beyond some bound are satisfied by
    # the empty weighting; then the family reduces to a finite conjunction.
    body = a.body
    if isinstance(body, Atom):
        nf = geometric_normal_form(body.weight, a.var)
        if nf == {}:
            return _sat(m, EMPTY_ATOM, budget)
    bound = _family_zero_bound(a)
    if bound is None:
        raise SplitSearchExceeded("infinite outcome conjunction not reducible")
    parts = [simplify(subst_assertion(body, a.var, Fraction(k))) for k in range(bound)]
    return find_split(m, parts, budget) is not None


def _family_zero_bound(a: OPlusFamily) -> Optional[int]:
    # A bound B with: for all k >= B the k-th summand admits the empty
    # weighting. Recognized for atoms whose weight is identically zero
    # from B on(found by inspecting the normal form), which covers the
    # eventually-zero families used in practice.
    body = a.body
    if isinstance(body, Atom):
        nf = geometric_normal_form(body.weight, a.var)
        if nf == {}:
            return 0
    return None


# ---------------------------------------------------------------------------
# Outcome-conjunction split search


def find_split(
    m: Weighting, parts: List[Assertion], budget: Union[int, _Budget] = DEFAULT_BUDGET
) -> Optional[List[Weighting]]:
    """Find sub-weightings summing to ``m`` with each part satisfied.

    Probabilistic and counting semirings use an exact transportation-flow
    argument when all parts are mass-determined atoms; the Boolean
    semiring enumerates support covers (addition is idempotent, so
    summands may overlap). Returns the witness split or None.
    """
    if isinstance(budget, int):
        budget = _Budget(budget)
    sr = m.semiring
    parts = [simplify(p) for p in parts]
    if not parts:
        return [] if m.is_empty() else None
    if len(parts) == 1:
        return [m] if _sat(m, parts[0], budget) else None
    if sr.name == "bool":
        return _split_bool(m, parts, budget)
    if all(isinstance(p, (Atom, DivAtom, Top)) for p in parts):
        return _split_flow(m, parts, budget)
    raise SplitSearchExceeded("conjunction too rich for the split solver")


def _max_flow(
    supplies: List[Fraction],
    demands: List[Fraction],
    allowed: List[List[bool]],
    budget: _Budget,
) -> Optional[List[List[Fraction]]]:
    """Exact transportation max-flow (BFS augmenting paths on rationals).

    Returns the flow matrix when every demand can be met from the
    supplies along allowed edges, else None.
    """
    ns, nd = len(supplies), len(demands)
    flow = [[Fraction(0)] * nd for _ in range(ns)]
    used_supply = [Fraction(0)] * ns
    used_demand = [Fraction(0)] * nd
    total_demand = sum(demands, Fraction(0))
    pushed = Fraction(0)
    while pushed < total_demand:
        budget.spend()
        # BFS over the residual graph: source -> supplies -> demands.
        parent: Dict[Tuple[str, int], Tuple[str, int]] = {}
        queue: List[Tuple[str, int]] = []
        for i in range(ns):
            if used_supply[i] < supplies[i]:
                parent[("s", i)] = ("src", -1)
                queue.append(("s", i))
        goal = None
        while queue and goal is None:
            kind, idx = queue.pop(0)
            if kind == "s":
                for j in range(nd):
                    if allowed[idx][j] and ("d", j) not in parent:
                        parent[("d", j)] = ("s", idx)
                        if used_demand[j] < demands[j]:
                            goal = ("d", j)
                            break
                        queue.append(("d", j))
            else:
                for i in range(ns):
                    if flow[i][idx] > 0 and ("s", i) not in parent:
                        parent[("s", i)] = ("d", idx)
                        queue.append(("s", i))
        if goal is None:
            return None
        # Find the bottleneck along the augmenting path.
        path: List[Tuple[str, int]] = [goal]
        node = goal
        while parent[node][0] != "src":
            node = parent[node]
            path.append(node)
        path.reverse()
        bottleneck: Optional[Fraction] = None

        def consider(x: Fraction) -> None:
            nonlocal bottleneck
            bottleneck = x if bottleneck is None else min(bottleneck, x)

        consider(supplies[path[0][1]] - used_supply[path[0][1]])
        consider(demands[goal[1]] - used_demand[goal[1]])
        for a, b in zip(path, path[1:]):
            if a[0] == "d" and b[0] == "s":
                consider(flow[b[1]][a[1]])
        assert bottleneck is not None and bottleneck > 0
        used_supply[path[0][1]] += bottleneck
        used_demand[goal[1]] += bottleneck
        for a, b in zip(path, path[1:]):
            if a[0] == "s" and b[0] == "d":
                flow[a[1]][b[1]] += bottleneck
            elif a[0] == "d" and b[0] == "s":
                flow[b[1]][a[1]] -= bottleneck
        pushed += bottleneck
    return flow


def _split_flow(
    m: Weighting, parts: List[Assertion], budget: _Budget
) -> Optional[List[Weighting]]:
    sr = m.semiring
    if any(is_inf(w) for w in m.entries.values()):
        raise SplitSearchExceeded("flow split does not handle infinite weights")
    outcomes = m.support()
    demands: List[Optional[Weight]] = []
    for p in parts:
        if isinstance(p, Atom):
            demands.append(_require_ground(p.weight))
        elif isinstance(p, DivAtom):
            demands.append(sr.mul(sr.check(_require_ground(p.weight)), sr.top))
        else:
            demands.append(None)  # Top absorbs leftovers
    if any(d is not None and is_inf(d) for d in demands):
        raise SplitSearchExceeded("flow split does not handle infinite weights")

    def edge_ok(o: Outcome, p: Assertion) -> bool:
        if isinstance(p, Top):
            return True
        if isinstance(p, DivAtom):
            return isinstance(o, Divergence)
        if isinstance(o, Divergence):
            return False
        return eval_bool(p.pred, o)

    atom_idx = [i for i, d in enumerate(demands) if d is not None]
    supplies = [m.entries[o] for o in outcomes]
    atom_demands = [demands[i] for i in atom_idx]
    allowed = [[edge_ok(o, parts[i]) for i in atom_idx] for o in outcomes]
    flow = _max_flow(supplies, atom_demands, allowed, budget)
    if flow is None:
        return None
    remaining = {
        o: m.entries[o] - sum((flow[k][j] for j in range(len(atom_idx))), Fraction(0))
        for k, o in enumerate(outcomes)
    }
    leftover = {o: w for o, w in remaining.items() if w > 0}
    top_idx = [i for i, d in enumerate(demands) if d is None]
    if leftover and not top_idx:
        return None
    split: List[Weighting] = []
    for i, p in enumerate(parts):
        entries: Dict[Outcome, Weight] = {}
        if i in atom_idx:
            j = atom_idx.index(i)
            entries = {
                o: flow[k][j] for k, o in enumerate(outcomes) if flow[k][j] > 0
            }
        elif top_idx and i == top_idx[0] and leftover:
            entries = dict(leftover)
        split.append(Weighting(sr, entries))
    for mi, p in zip(split, parts):
        if not _sat(mi, p, budget):
            return None
    return split


def _split_bool(
    m: Weighting, parts: List[Assertion], budget: _Budget
) -> Optional[List[Weighting]]:
    sr = m.semiring
    outcomes = m.support()

    def precheck(o: Outcome, p: Assertion) -> bool:
        if isinstance(p, Atom):
            w = _ground_weight(p.weight)
            if w == 0:
                return False
            return not isinstance(o, Divergence) and eval_bool(p.pred, o)
        if isinstance(p, DivAtom):
            w = _ground_weight(p.weight)
            if w == 0:
                return False
            return isinstance(o, Divergence)
        if isinstance(p, BoxTotal):
            return not isinstance(o, Divergence) and eval_bool(p.pred, o)
        if isinstance(p, Box):
            return isinstance(o, Divergence) or eval_bool(p.pred, o)
        return True

    options: List[List[Tuple[int, ...]]] = []
    for o in outcomes:
        compatible = [i for i in range(len(parts)) if precheck(o, parts[i])]
        if not compatible:
            return None
        subsets = []
        for r in range(1, len(compatible) + 1):
            subsets.extend(itertools.combinations(compatible, r))
        options.append(subsets)

    assignment: List[Tuple[int, ...]] = []

    def backtrack(k: int) -> Optional[List[Weighting]]:
        if k == len(outcomes):
            budget.spend(len(parts))
            split = []
            for i, p in enumerate(parts):
                entries = {
                    outcomes[j]: sr.one
                    for j in range(len(outcomes))
                    if i in assignment[j]
                }
                split.append(Weighting(sr, entries))
            for mi, p in zip(split, parts):
                if not _sat(mi, p, budget):
                    return None
            return split
        for subset in options[k]:
            budget.spend()
            assignment.append(subset)
            result = backtrack(k + 1)
            if result is not None:
                return result
            assignment.pop()
        return None

    return backtrack(0)


# ---------------------------------------------------------------------------
# Support analysis, entailment, nontermination


@dataclass
class SupportInfo:
    """What supports can satisfying weightings have?

    ``states``: the set of states that may carry weight (None if unknown
    or unenumerable). ``div``: whether divergence may carry weight.
    ``vacuous``: every satisfying weighting is empty (or none exists).
    """

    states: Optional[List[ProgramState]]
    div: bool
    vacuous: bool = False


def _pinned_state(pred: BoolExpr) -> Optional[ProgramState]:
    """A state built from var=const conjuncts, when they pin every
    variable mentioned by the predicate."""
    bindings: Dict[str, Fraction] = {}

    def collect(b: BoolExpr) -> None:
        if isinstance(b, And):
            collect(b.left)
            collect(b.right)
        elif isinstance(b, Cmp) and b.op == "=":
            if isinstance(b.left, Var) and not arith_vars(b.right):
                bindings.setdefault(b.left.name, eval_arith(b.right, ProgramState.make()))
            elif isinstance(b.right, Var) and not arith_vars(b.left):
                bindings.setdefault(b.right.name, eval_arith(b.left, ProgramState.make()))

    collect(pred)
    if not bindings or not bool_vars(pred) <= set(bindings):
        return None
    sigma = ProgramState.make(bindings)
    return sigma if eval_bool(pred, sigma) else None


def pred_states(
    pred: BoolExpr, domain: Optional[Sequence[ProgramState]]
) -> Optional[List[ProgramState]]:
    if domain is not None:
        return [s for s in domain if eval_bool(pred, s)]
    if pred == FALSE:
        return []
    pinned = _pinned_state(pred)
    if pinned is not None:
        return [pinned]
    return None


def support_info(
    a: Assertion, domain: Optional[Sequence[ProgramState]] = None
) -> SupportInfo:
    a = simplify(a)
    if isinstance(a, Bot):
        return SupportInfo([], False, vacuous=True)
    if a == EMPTY_ATOM:
        return SupportInfo([], False, vacuous=True)
    if isinstance(a, Atom):
        return SupportInfo(pred_states(a.pred, domain), False)
    if isinstance(a, DivAtom):
        w = _ground_weight(a.weight)
        if w is not None and not is_inf(w) and w == 0:
            return SupportInfo([], False, vacuous=True)
        return SupportInfo([], True)
    if isinstance(a, BoxTotal):
        return SupportInfo(pred_states(a.pred, domain), False)
    if isinstance(a, SuppSubset):
        return SupportInfo(pred_states(a.pred, domain), a.include_div)
    if isinstance(a, Box):
        return SupportInfo(pred_states(a.pred, domain), True)
    if isinstance(a, (Diamond, DiamondPartial, SuppMeets, Top, AlwaysDiv, SometimesDiv)):
        return SupportInfo(None, True)
    if isinstance(a, OPlus):
        infos = [support_info(p, domain) for p in a.parts]
        states: Optional[List[ProgramState]] = []
        for info in infos:
            if info.states is None:
                states = None
                break
            states = states + [s for s in info.states if s not in states]
        return SupportInfo(
            states,
            any(i.div for i in infos),
            vacuous=all(i.vacuous for i in infos),
        )
    if isinstance(a, (ScaleL, ScaleR)):
        w = _ground_weight(a.weight)
        inner = support_info(a.arg, domain)
        if w is not None and not is_inf(w) and w == 0:
            return SupportInfo([], False, vacuous=True)
        return inner
    if isinstance(a, ExistsIdx):
        infos = [
            support_info(subst_assertion(a.body, a.var, Fraction(k)), domain)
            for k in range(a.lo, a.hi + 1)
        ]
        return _union_infos(infos)
    if isinstance(a, ExistsWeight):
        infos = [support_info(_subst_weight_var(a.body, a.var, w), domain) for w in a.choices]
        return _union_infos(infos)
    if isinstance(a, OrA):
        return _union_infos([support_info(a.left, domain), support_info(a.right, domain)])
    if isinstance(a, Singleton):
        return SupportInfo(a.m.states(), a.m.div_weight() != a.m.semiring.zero)
    return SupportInfo(None, True)


def _union_infos(infos: List[SupportInfo]) -> SupportInfo:
    states: Optional[List[ProgramState]] = []
    for info in infos:
        if info.states is None:
            states = None
            break
        states = states + [s for s in info.states if s not in states]
    return SupportInfo(states, any(i.div for i in infos), vacuous=all(i.vacuous for i in infos))


@dataclass(frozen=True)
class EntailResult:
    kind: str  # 'exact' | 'any' | 'no' | 'unknown'
    weight: Optional[Weight] = None
    reason: str = ""

    def accepts(self, expected: Weight) -> bool:
        if self.kind == "any":
            return True
        return self.kind == "exact" and self.weight == expected


def _support_cover_preds(a: Assertion) -> Optional[List[BoolExpr]]:
    """Predicates jointly covering every state a satisfying weighting can
    support, or None when no such syntactic cover is known."""
    a = simplify(a)
    if a == EMPTY_ATOM or isinstance(a, Bot):
        return []
    if isinstance(a, (Atom, BoxTotal)):
        return [a.pred]
    if isinstance(a, OPlus):
        out: List[BoolExpr] = []
        for p in a.parts:
            preds = _support_cover_preds(p)
            if preds is None:
                return None
            out.extend(preds)
        return out
    if isinstance(a, DivAtom):
        return []
    if isinstance(a, (ScaleL, ScaleR)):
        return _support_cover_preds(a.arg)
    if isinstance(a, ExistsIdx):
        out = []
        for k in range(a.lo, a.hi + 1):
            preds = _support_cover_preds(subst_assertion(a.body, a.var, Fraction(k)))
            if preds is None:
                return None
            out.extend(preds)
        return out
    return None


def entails_guard(
    a: Assertion,
    e: Guard,
    sr: Semiring,
    domain: Optional[Sequence[ProgramState]] = None,
) -> EntailResult:
    """Decide whether every satisfying weighting terminates surely and
    evaluates the guard to one fixed weight on its whole support.

    ``any`` means the entailment holds vacuously (only empty weightings
    satisfy the assertion), so every guard value is admissible.
    """
    info = support_info(a, domain)
    if info.vacuous:
        return EntailResult("any")
    if info.div:
        return EntailResult("no", reason="divergence weight is possible")
    if info.states is not None:
        values: Set[Weight] = set()
        for s in info.states:
            try:
                values.add(lang.eval_guard(e, s, sr))
            except lang.LangError:
                return EntailResult("unknown", reason="guard not evaluable on support")
        if not values:
            return EntailResult("any")
        if len(values) > 1:
            return EntailResult("no", reason="guard value differs across the support")
        return EntailResult("exact", values.pop())
    # Support not enumerable: for Boolean guards, predicate implication on
    # a syntactic support cover still decides the entailment.
    if isinstance(e, BoolGuard):
        preds = _support_cover_preds(a)
        if preds:
            if all(pred_implies(p, e.expr, domain) is True for p in preds):
                return EntailResult("exact", sr.one)
            from .lang import negate

            if all(pred_implies(p, negate(e.expr), domain) is True for p in preds):
                return EntailResult("exact", sr.zero)
    if isinstance(e, ConstGuard):
        return EntailResult("exact", sr.check(e.weight))
    return EntailResult("unknown", reason="support not enumerable")


def is_nonterminating(a: Assertion) -> bool:
    """Syntactic check that every satisfying weighting has support within
    the divergence outcome."""
    a = simplify(a)
    if isinstance(a, (DivAtom, AlwaysDiv, Bot)):
        return True
    if isinstance(a, Atom):
        w = _ground_weight(a.weight)
        return w is not None and not is_inf(w) and w == 0
    if isinstance(a, OPlus):
        return all(is_nonterminating(p) for p in a.parts)
    if isinstance(a, (ScaleL, ScaleR)):
        w = _ground_weight(a.weight)
        if w is not None and not is_inf(w) and w == 0:
            return True
        return is_nonterminating(a.arg)
    if isinstance(a, (ExistsIdx,)):
        return all(
            is_nonterminating(subst_assertion(a.body, a.var, Fraction(k)))
            for k in range(a.lo, a.hi + 1)
        )
    if isinstance(a, ExistsWeight):
        return all(is_nonterminating(_subst_weight_var(a.body, a.var, w)) for w in a.choices)
    if isinstance(a, OrA):
        return is_nonterminating(a.left) and is_nonterminating(a.right)
    if isinstance(a, AndA):
        return is_nonterminating(a.left) or is_nonterminating(a.right)
    if isinstance(a, OPlusFamily):
        body = a.body
        if isinstance(body, DivAtom):
            return True
        if isinstance(body, Atom):
            nf = geometric_normal_form(body.weight, a.var)
            return nf == {}
        return False
    if isinstance(a, Singleton):
        return not a.m.states()
    return False


def sure_termination(a: Assertion, domain: Optional[Sequence[ProgramState]] = None) -> bool:
    """Does the assertion entail that no weight sits on divergence?"""
    info = support_info(a, domain)
    return info.vacuous or not info.div


# ---------------------------------------------------------------------------
# Linear comparison reasoning (used by predicate implication)

LinearForm = Tuple[Tuple[Tuple[str, Fraction], ...], Fraction]


def linear_form(e: ArithExpr) -> Optional[LinearForm]:
    """Normalize to (sorted variable coefficients, constant), or None."""
    if isinstance(e, Lit):
        return ((), e.value)
    if isinstance(e, Var):
        return (((e.name, Fraction(1)),), Fraction(0))
    if isinstance(e, BinOp):
        l = linear_form(e.left)
        r = linear_form(e.right)
        if e.op in ("+", "-") and l and r:
            coefs = dict(l[0])
            sign = 1 if e.op == "+" else -1
            for name, c in r[0]:
                c2 = coefs.get(name, Fraction(0)) + sign * c
                if c2 == 0:
                    coefs.pop(name, None)
                else:
                    coefs[name] = c2
            return (tuple(sorted(coefs.items())), l[1] + sign * r[1])
        if e.op == "*" and l and r:
            if not l[0]:
                return (tuple((n, l[1] * c) for n, c in r[0]), l[1] * r[1]) if l[1] != 0 else ((), Fraction(0))
            if not r[0]:
                return (tuple((n, r[1] * c) for n, c in l[0]), r[1] * l[1]) if r[1] != 0 else ((), Fraction(0))
        if e.op == "/" and l and r and not r[0] and r[1] != 0:
            return (tuple((n, c / r[1]) for n, c in l[0]), l[1] / r[1])
        if e.op == "^" and l and r and not l[0] and not r[0]:
            try:
                return ((), eval_arith(e, ProgramState.make()))
            except lang.LangError:
                return None
    return None


_OP_MIRROR = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}


def _normalized_cmp(
    c: Cmp,
) -> Optional[Tuple[Tuple[Tuple[str, Fraction], ...], Fraction, str]]:
    """Rewrite a comparison as (variable part v, bound a, op) meaning
    ``v op a``, with v scaled to a positive unit leading coefficient."""
    l = linear_form(c.left)
    r = linear_form(c.right)
    if l is None or r is None:
        return None
    coefs = dict(l[0])
    for name, cf in r[0]:
        c2 = coefs.get(name, Fraction(0)) - cf
        if c2 == 0:
            coefs.pop(name, None)
        else:
            coefs[name] = c2
    vars_part = tuple(sorted(coefs.items()))
    bound = r[1] - l[1]  # v op bound
    op = c.op
    if not vars_part:
        return ((), bound, op)
    lead = vars_part[0][1]
    if lead < 0:
        vars_part = tuple((n, -cf) for n, cf in vars_part)
        bound = -bound
        op = _OP_MIRROR[op]
        lead = -lead
    vars_part = tuple((n, cf / lead) for n, cf in vars_part)
    bound = bound / lead
    return (vars_part, bound, op)


def _cmp_implied(bp: Fraction, op_p: str, bq: Fraction, op_q: str) -> bool:
    """Does ``t op_p bp`` entail ``t op_q bq`` over the rationals?"""
    if op_p == "=":
        sigma = ProgramState.make(t=bp)
        return eval_bool(Cmp(op_q, Var("t"), Lit(bq)), sigma)
    if op_p == ">=":
        return (
            (op_q == ">=" and bq <= bp)
            or (op_q == ">" and bq < bp)
            or (op_q == "!=" and bq < bp)
        )
    if op_p == ">":
        return (
            (op_q in (">=", ">", "!=")) and bq <= bp
        )
    if op_p == "<=":
        return (
            (op_q == "<=" and bq >= bp)
            or (op_q == "<" and bq > bp)
            or (op_q == "!=" and bq > bp)
        )
    if op_p == "<":
        return (op_q in ("<=", "<", "!=")) and bq >= bp
    if op_p == "!=":
        return op_q == "!=" and bq == bp
    return False


def _conjuncts(pred: BoolExpr) -> List[BoolExpr]:
    if isinstance(pred, And):
        return _conjuncts(pred.left) + _conjuncts(pred.right)
    return [pred]


def pred_implies(
    p: BoolExpr,
    q: BoolExpr,
    domain: Optional[Sequence[ProgramState]] = None,
) -> Optional[bool]:
    """Three-valued ground predicate implication.

    Tiers: evaluation under pinned bindings, conjunct containment, linear
    comparison reasoning, exhaustive check over a declared finite domain.
    Returns True/False only with certainty, None otherwise.
    """
    if q == TRUE or p == FALSE:
        return True
    # tier 0: pinned-variable evaluation
    bindings: Dict[str, Fraction] = {}
    for c in _conjuncts(p):
        if isinstance(c, Cmp) and c.op == "=":
            if isinstance(c.left, Var) and not arith_vars(c.right):
                bindings.setdefault(c.left.name, eval_arith(c.right, ProgramState.make()))
            elif isinstance(c.right, Var) and not arith_vars(c.left):
                bindings.setdefault(c.right.name, eval_arith(c.left, ProgramState.make()))
    if bindings and bool_vars(q) <= set(bindings):
        sigma = ProgramState.make(bindings)
        pinned_only = bool_vars(p) <= set(bindings)
        try:
            if pinned_only:
                # bindings determine the whole of p
                if eval_bool(p, sigma):
                    return eval_bool(q, sigma)
                return True  # p unsatisfiable under its own bindings
            if eval_bool(q, sigma):
                return True
        except lang.LangError:
            pass
    # tier 1 and 2: conjunct-wise entailment
    p_forms = []
    for c in _conjuncts(p):
        if isinstance(c, Cmp):
            nc = _normalized_cmp(c)
            if nc:
                p_forms.append(nc)
    def conjunct_implied(qc: BoolExpr) -> bool:
        if qc == TRUE:
            return True
        if not isinstance(qc, Cmp):
            return False
        nq = _normalized_cmp(qc)
        if nq is None:
            return False
        vq, bq, oq = nq
        if not vq:
            sigma = ProgramState.make()
            try:
                return eval_bool(qc, sigma)
            except lang.LangError:
                return False
        return any(
            vp == vq and _cmp_implied(bp, op, bq, oq) for vp, bp, op in p_forms
        )

    if all(conjunct_implied(qc) for qc in _conjuncts(q)):
        return True
    # tier 3: finite domain
    if domain is not None:
        for s in domain:
            if eval_bool(p, s) and not eval_bool(q, s):
                return False
        return True
    return None


# ---------------------------------------------------------------------------
# Assertion implication (the recognized weakening lattice)


def implies(
    a: Assertion,
    b: Assertion,
    domain: Optional[Sequence[ProgramState]] = None,
    semiring: Optional[Semiring] = None,
    budget: int = DEFAULT_BUDGET,
) -> Optional[bool]:
    """Three-valued assertion implication.

    Accepts a fixed lattice of syntactic weakenings (equal assertions,
    weakening atoms into modal forms, predicate weakening, dropping
    conjuncts into Top, instantiating existentials) plus an exhaustive
    check over a declared finite Boolean domain. None means undecided.
    """
    a = simplify(a)
    b = simplify(b)
    result = _implies_syntactic(a, b, domain)
    if result is not None:
        return result
    if (
        domain is not None
        and semiring is not None
        and semiring.name == "bool"
        and len(domain) <= 12
    ):
        try:
            for m in all_bool_weightings(semiring, list(domain)):
                if satisfies(m, a, budget) and not satisfies(m, b, budget):
                    return False
            return True
        except SplitSearchExceeded:
            return None
    return None


def _implies_syntactic(
    a: Assertion, b: Assertion, domain: Optional[Sequence[ProgramState]]
) -> Optional[bool]:
    if a == b:
        return True
    if isinstance(b, Top) or isinstance(a, Bot):
        return True
    if isinstance(a, Singleton):
        try:
            return satisfies(a.m, b)
        except SplitSearchExceeded:
            return None
    if isinstance(a, ExistsIdx):
        results = [
            _implies_syntactic(simplify(subst_assertion(a.body, a.var, Fraction(k))), b, domain)
            for k in range(a.lo, a.hi + 1)
        ]
        if all(r is True for r in results):
            return True
        return None
    if isinstance(a, ExistsWeight):
        results = [
            _implies_syntactic(simplify(_subst_weight_var(a.body, a.var, w)), b, domain)
            for w in a.choices
        ]
        if all(r is True for r in results):
            return True
        return None
    if isinstance(b, ExistsIdx):
        for k in range(b.lo, b.hi + 1):
            if _implies_syntactic(a, simplify(subst_assertion(b.body, b.var, Fraction(k))), domain) is True:
                return True
        return None
    if isinstance(b, ExistsWeight):
        for w in b.choices:
            if _implies_syntactic(a, simplify(_subst_weight_var(b.body, b.var, w)), domain) is True:
                return True
        return None
    if isinstance(a, OrA):
        l = _implies_syntactic(a.left, b, domain)
        r = _implies_syntactic(a.right, b, domain)
        return True if (l is True and r is True) else None
    if isinstance(b, AndA):
        l = _implies_syntactic(a, b.left, domain)
        r = _implies_syntactic(a, b.right, domain)
        return True if (l is True and r is True) else None
    # atom weakenings
    if isinstance(a, Atom):
        wa = _ground_weight(a.weight)
        if isinstance(b, Atom):
            wb = _ground_weight(b.weight)
            if wa is not None and wa == wb and pred_implies(a.pred, b.pred, domain) is True:
                return True
        if isinstance(b, (BoxTotal, Box)) and pred_implies(a.pred, b.pred, domain) is True:
            return True
        if isinstance(b, SuppSubset) and pred_implies(a.pred, b.pred, domain) is True:
            return True
    if isinstance(a, BoxTotal):
        if isinstance(b, (BoxTotal, Box)) and pred_implies(a.pred, b.pred, domain) is True:
            return True
        if isinstance(b, SuppSubset) and pred_implies(a.pred, b.pred, domain) is True:
            return True
    if isinstance(a, Box):
        if isinstance(b, Box) and pred_implies(a.pred, b.pred, domain) is True:
            return True
        if isinstance(b, SuppSubset) and b.include_div and pred_implies(a.pred, b.pred, domain) is True:
            return True
    if isinstance(a, Diamond):
        if isinstance(b, (Diamond, DiamondPartial)) and pred_implies(a.pred, b.pred, domain) is True:
            return True
    if isinstance(a, DiamondPartial) and isinstance(b, DiamondPartial):
        if pred_implies(a.pred, b.pred, domain) is True:
            return True
    if isinstance(a, DivAtom):
        if isinstance(b, AlwaysDiv):
            return True
        wa = _ground_weight(a.weight)
        if isinstance(b, SometimesDiv) and wa is not None and wa != 0:
            return True
    if isinstance(a, AlwaysDiv) and isinstance(b, AlwaysDiv):
        return True
    # predicate decomposition: a sure-terminating predicate assertion can
    # be split across support-shape conjuncts that jointly cover it
    if isinstance(a, (Atom, BoxTotal)) and isinstance(b, OPlus):
        covers = [p for p in b.parts if isinstance(p, (BoxTotal, Box, SuppSubset))]
        rest = [p for p in b.parts if not isinstance(p, (BoxTotal, Box, SuppSubset))]
        if covers and all(_empty_satisfiable(p) for p in rest):
            disj: BoolExpr = covers[0].pred
            for p in covers[1:]:
                disj = Or(disj, p.pred)
            if pred_implies(a.pred, disj, domain) is True:
                return True
    # outcome conjunction: match left parts to right parts injectively;
    # unmatched right parts must admit the empty weighting, unmatched left
    # parts need a Top on the right
    a_parts = list(a.parts) if isinstance(a, OPlus) else [a]
    b_parts = list(b.parts) if isinstance(b, OPlus) else [b]
    if (len(a_parts), len(b_parts)) != (1, 1):
        if _match_oplus(a_parts, b_parts, domain):
            return True
    return None


def _empty_satisfiable(a: Assertion) -> bool:
    a = simplify(a)
    if a == EMPTY_ATOM:
        return True
    return isinstance(a, (Top, Box, BoxTotal, AlwaysDiv, SuppSubset))


def _match_oplus(
    a_parts: List[Assertion],
    b_parts: List[Assertion],
    domain: Optional[Sequence[ProgramState]],
) -> bool:
    tops = [p for p in b_parts if isinstance(p, Top)]
    others = [p for p in b_parts if not isinstance(p, Top)]

    def assign(i: int, used: Tuple[int, ...]) -> bool:
        if i == len(others):
            leftover = [k for k in range(len(a_parts)) if k not in used]
            return not leftover or bool(tops)
        q = others[i]
        for k in range(len(a_parts)):
            if k in used:
                continue
            if _implies_syntactic(a_parts[k], q, domain) is True:
                if assign(i + 1, used + (k,)):
                    return True
        if _empty_satisfiable(q):
            return assign(i + 1, used)
        return False

    return assign(0, ())


def all_bool_weightings(
    sr: Semiring, states: List[ProgramState], include_div: bool = True
) -> List[Weighting]:
    """Every weighting over the given states (and divergence) in the
    Boolean semiring."""
    if sr.name != "bool":
        raise OutcomeKitError("exhaustive weighting enumeration needs bool")
    outcomes: List[Outcome] = list(states)
    if include_div:
        outcomes.append(DIV)
    out = []
    for bits in itertools.product([0, 1], repeat=len(outcomes)):
        entries = {o: Fraction(1) for o, bit in zip(outcomes, bits) if bit}
        out.append(Weighting(sr, entries))
    return out


# ---------------------------------------------------------------------------
# Assertion mass analysis


def assertion_mass(a: Assertion, sr: Semiring) -> Optional[Weight]:
    """The total mass every satisfying weighting must have, or None."""
    a = simplify(a)
    if isinstance(a, Atom):
        return _ground_weight(a.weight)
    if isinstance(a, DivAtom):
        w = _ground_weight(a.weight)
        return None if w is None else sr.mul(sr.check(w), sr.top)
    if isinstance(a, OPlus):
        masses = [assertion_mass(p, sr) for p in a.parts]
        if any(x is None for x in masses):
            # Boolean: a single forced-1 part forces the whole mass to 1.
            if sr.name == "bool" and any(x == Fraction(1) for x in masses):
                return Fraction(1)
            return None
        acc = sr.zero
        for x in masses:
            try:
                acc = sr.add(acc, x)
            except Undefined:
                return None
        return acc
    if isinstance(a, (ScaleL, ScaleR)):
        inner = assertion_mass(a.arg, sr)
        w = _ground_weight(a.weight)
        if inner is None or w is None:
            return None
        return sr.mul(w, inner) if isinstance(a, ScaleL) else sr.mul(inner, w)
    if sr.name == "bool":
        if isinstance(a, (Diamond, SometimesDiv)):
            return Fraction(1)
        if isinstance(a, DiamondPartial):
            return Fraction(1)
    if isinstance(a, Singleton):
        return a.m.mass()
    return None


def assertion_mass_form(a: Assertion, index: str, sr: Semiring) -> Optional[NormalForm]:
    """Symbolic total-mass normal form of a family template, in the index."""
    a = simplify(a)
    if isinstance(a, Atom):
        return geometric_normal_form(a.weight, index)
    if isinstance(a, DivAtom):
        if sr.top != sr.one:
            return None
        return geometric_normal_form(a.weight, index)
    if isinstance(a, OPlus):
        acc: NormalForm = {}
        for p in a.parts:
            nf = assertion_mass_form(p, index, sr)
            if nf is None:
                return None
            for r, c in nf.items():
                c2 = acc.get(r, Fraction(0)) + c
                if c2 == 0:
                    acc.pop(r, None)
                else:
                    acc[r] = c2
        return acc
    return None


# ---------------------------------------------------------------------------
# Assertion schemas (indexed families) and limits


@dataclass
class AssertionSchema:
    """A family of assertions indexed by a natural number.

    Finitely many special cases may precede a general template valid from
    ``general_from`` on. Witness templates (per summand, variable to
    expression in the index) let semantic checks build concrete satisfying
    weightings for predicates that do not pin their variables.
    """

    index: str
    cases: Dict[int, Assertion] = field(default_factory=dict)
    general: Optional[Assertion] = None
    general_from: int = 0
    witnesses: Dict[str, List[Dict[str, ArithExpr]]] = field(default_factory=dict)

    def at(self, n: int) -> Assertion:
        if n in self.cases:
            return simplify(self.cases[n])
        if self.general is not None and n >= self.general_from:
            return simplify(subst_assertion(self.general, self.index, Fraction(n)))
        raise AssertionError_(f"schema has no assertion at index {n}")

    def witness_key(self, n: int) -> Optional[str]:
        if n in self.cases:
            return str(n) if str(n) in self.witnesses else None
        return "general" if "general" in self.witnesses else None

    def is_uniform_from(self) -> Optional[int]:
        """Index from which the family is a single template in the index."""
        if self.general is None:
            return None
        start = self.general_from
        if self.cases:
            start = max(start, max(self.cases) + 1)
        return start

    def witness_weighting(self, n: int, sr: Semiring, domain=None) -> Optional[Weighting]:
        """A concrete weighting satisfying the n-th assertion, built from
        declared witnesses or pinned atom predicates."""
        a = self.at(n)
        parts = list(a.parts) if isinstance(a, OPlus) else [a]
        key = self.witness_key(n)
        decls = self.witnesses.get(key, []) if key else []
        pairs: List[Tuple[ProgramState, Weight]] = []
        decl_iter = iter(decls)
        for p in parts:
            if p == EMPTY_ATOM:
                continue
            if isinstance(p, DivAtom):
                w = _require_ground(p.weight)
                pairs.append((DIV, sr.mul(w, sr.top)))
                continue
            if not isinstance(p, Atom):
                return None
            w = _require_ground(p.weight)
            decl = next(decl_iter, None)
            if decl is not None:
                env = {self.index: Fraction(n)}
                sigma = ProgramState.make(
                    {v: eval_weight_expr(subst_arith(e, self.index, Fraction(n)))
                     for v, e in decl.items()}
                )
            else:
                sigma = _pinned_state(p.pred)
                if sigma is None and domain:
                    hits = [s for s in domain if eval_bool(p.pred, s)]
                    sigma = hits[0] if hits else None
            if sigma is None:
                return None
            if not eval_bool(p.pred, sigma):
                raise AssertionError_(
                    f"witness state {sigma} does not satisfy its atom at n={n}"
                )
            if w != sr.zero:
                pairs.append((sigma, w))
        return Weighting.of(sr, pairs)


@dataclass(frozen=True)
class Certified:
    limit: Assertion
    detail: str = ""


@dataclass(frozen=True)
class Obligation:
    claim: str
    checked_to: int


@dataclass(frozen=True)
class LimitFailed:
    reason: str


LimitOutcome = Union[Certified, Obligation, LimitFailed]

_SUPPORT_SHAPES = (Box, BoxTotal, Diamond, DiamondPartial, SuppSubset, SuppMeets, AlwaysDiv, Top)


def limit_of_family(
    schema: AssertionSchema,
    kind: str,
    declared: Assertion,
    sr: Semiring,
    check_bound: int = 16,
    domain: Optional[Sequence[ProgramState]] = None,
) -> LimitOutcome:
    """Certify a declared limit of an assertion family.

    ``kind`` is 'converge' (the summed terminating outcomes reach the
    declared assertion) or 'diverge' (the leftover mass, pushed onto
    divergence in the limit, satisfies it). Certification is a whitelist
    of closed forms: geometric and constant mass families, eventually-zero
    families, and support-shape constant families. Anything else becomes
    an obligation carrying the bound up to which instances were verified.
    """
    declared = simplify(declared)
    if kind == "converge":
        return _limit_converge(schema, declared, sr, check_bound, domain)
    if kind == "diverge":
        return _limit_diverge(schema, declared, sr, check_bound, domain)
    raise ValueError(f"unknown limit kind {kind!r}")


def _limit_converge(schema, declared, sr, check_bound, domain) -> LimitOutcome:
    # Case 1: the declared limit is literally the family's own infinite
    # outcome conjunction.
    if isinstance(declared, OPlusFamily) and schema.general is not None and not schema.cases:
        body = simplify(
            subst_assertion(declared.body, declared.var, Fraction(0))
        )
        own = simplify(subst_assertion(schema.general, schema.index, Fraction(0)))
        if body == own and schema.general_from == 0:
            # check at a second index to guard against index-dependence tricks
            b1 = simplify(subst_assertion(declared.body, declared.var, Fraction(1)))
            o1 = simplify(subst_assertion(schema.general, schema.index, Fraction(1)))
            if b1 == o1:
                return Certified(declared, "family outcome conjunction")
    # Case 2: eventually-zero family; the sum is the finite prefix.
    uniform_from = schema.is_uniform_from()
    if uniform_from is not None and _template_mass_zero(schema, sr):
        prefix = [schema.at(k) for k in sorted(schema.cases)]
        combined = simplify(OPlus(tuple(prefix))) if prefix else EMPTY_ATOM
        verdict = implies(combined, declared, domain, sr)
        if verdict is True:
            return Certified(declared, "eventually-zero family")
        if verdict is False:
            return LimitFailed("finite prefix does not imply the declared limit")
        return Obligation("prefix-implies-limit undecided", check_bound)
    # Case 3: constant support-shape family.
    if schema.general is not None and not schema.cases and not assertion_free_index(schema.general, schema.index):
        template = simplify(schema.general)
        if isinstance(template, _SUPPORT_SHAPES):
            verdict = implies(template, declared, domain, sr)
            if verdict is True:
                return Certified(declared, "constant support-shape family")
    # Fallback: verify finitely many partial sums against nothing stronger
    # than membership; report an obligation.
    return Obligation("convergence not in the recognized closed forms", check_bound)


def _template_mass_zero(schema: AssertionSchema, sr: Semiring) -> bool:
    if schema.general is None:
        return False
    nf = assertion_mass_form(schema.general, schema.index, sr)
    return nf == {}


def _limit_diverge(schema, declared, sr, check_bound, domain) -> LimitOutcome:
    if isinstance(declared, AlwaysDiv):
        # every weight of the form u * top on divergence satisfies it,
        # whatever the family masses turn out to be
        return Certified(declared, "divergence weight unconstrained")
    # Exact masses for the special cases.
    masses: List[Weight] = []
    for k in sorted(schema.cases):
        mk = assertion_mass(schema.at(k), sr)
        if mk is None:
            return Obligation("case mass not derivable", check_bound)
        masses.append(mk)
    inf_general: Optional[Weight] = None
    trend = "constant"
    if schema.general is not None:
        nf = assertion_mass_form(schema.general, schema.index, sr)
        if nf is None:
            if not assertion_free_index(schema.general, schema.index):
                w = assertion_mass(simplify(schema.general), sr)
                if w is None:
                    return Obligation("general mass not derivable", check_bound)
                inf_general = w
            else:
                return Obligation("general mass not in closed form", check_bound)
        else:
            inf_general = _normal_form_inf(nf, schema.is_uniform_from() or schema.general_from)
            if inf_general is None:
                return Obligation("mass family trend not recognized", check_bound)
            if any(r != 1 for r in nf):
                trend = "geometric"
    candidates = masses + ([inf_general] if inf_general is not None else [])
    if not candidates:
        return Obligation("empty family", check_bound)
    lim = candidates[0]
    for w in candidates[1:]:
        if sr.leq(w, lim):
            lim = w
    div_weight = sr.mul(sr.check(lim), sr.top)
    limit_weighting = (
        Weighting.empty(sr)
        if div_weight == sr.zero
        else Weighting(sr, {DIV: div_weight})
    )
    try:
        ok = satisfies(limit_weighting, declared)
    except SplitSearchExceeded:
        return Obligation("declared divergence limit not checkable", check_bound)
    if ok:
        return Certified(
            declared, f"{trend}-mass family, limit weight {format_weight(div_weight)}"
        )
    return LimitFailed(
        f"limit weighting {limit_weighting} does not satisfy the declared assertion"
    )


def _normal_form_inf(nf: NormalForm, from_n: int) -> Optional[Weight]:
    """Infimum over n >= from_n of sum(c_r * r^n), for recognized trends."""
    const = nf.get(Fraction(1), Fraction(0))
    rest = {r: c for r, c in nf.items() if r != 1}
    if not rest:
        return const
    if all(0 < r < 1 and c > 0 for r, c in rest.items()):
        return const  # decays to the constant from above
    if all((0 < r < 1 and c < 0) or (r > 1 and c > 0) for r, c in rest.items()):
        return normal_form_value(nf, from_n)  # increasing: minimum at the start
    return None


# ---------------------------------------------------------------------------
# Text grammar
#
#   (P)^(u)    state atom        DIV^(u)     divergence atom (u defaults 1)
#   ++         outcome conjunction            /\  \/  ~  =>  connectives
#   box (P)  dia (P)  boxT (P)  diaP (P)      modalities
#   box DIV                                  always diverges
#   dia DIV                                  sometimes diverges
#   exists n in 0..5. A        exists u in {0, 1/2}. A
#   bigoplus n. A              infinite outcome conjunction
#   top  bot


def parse_assertion(text: str) -> Assertion:
    ts = TokenStream(tokenize(text))
    a = _parse_assert_impl(ts)
    tok = ts.peek()
    if tok.kind != "eof":
        raise lang.ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return a


def _parse_assert_impl(ts: TokenStream) -> Assertion:
    a = _parse_assert_or(ts)
    if ts.at_punct("=>"):
        ts.next()
        return ImpliesA(a, _parse_assert_impl(ts))
    return a


def _parse_assert_or(ts: TokenStream) -> Assertion:
    a = _parse_assert_and(ts)
    while ts.at_punct("\\/"):
        ts.next()
        a = OrA(a, _parse_assert_and(ts))
    return a


def _parse_assert_and(ts: TokenStream) -> Assertion:
    a = _parse_assert_oplus(ts)
    while ts.at_punct("/\\"):
        ts.next()
        a = AndA(a, _parse_assert_oplus(ts))
    return a


def _parse_assert_oplus(ts: TokenStream) -> Assertion:
    parts = [_parse_assert_unary(ts)]
    while ts.at_punct("++"):
        ts.next()
        parts.append(_parse_assert_unary(ts))
    if len(parts) == 1:
        return parts[0]
    return OPlus(tuple(parts))


def _parse_assert_unary(ts: TokenStream) -> Assertion:
    if ts.at_punct("~"):
        ts.next()
        return NotA(_parse_assert_unary(ts))
    return _parse_assert_atom(ts)


def _parse_weight_suffix(ts: TokenStream) -> Optional[WeightExpr]:
    if not ts.at_punct("^"):
        return None
    ts.next()
    ts.expect_punct("(")
    w = _parse_weight_inner(ts)
    ts.expect_punct(")")
    return w


def _parse_weight_inner(ts: TokenStream) -> WeightExpr:
    if ts.at_name("inf"):
        ts.next()
        return InfConst()
    return parse_weight_expr(ts)


def _parse_pred_arg(ts: TokenStream) -> BoolExpr:
    ts.expect_punct("(")
    pred = parse_bool(ts, allow_div=True)
    ts.expect_punct(")")
    return pred


def _parse_assert_atom(ts: TokenStream) -> Assertion:
    tok = ts.peek()
    if ts.at_name("top"):
        ts.next()
        return Top()
    if ts.at_name("bot"):
        ts.next()
        return Bot()
    if ts.at_name("DIV"):
        ts.next()
        w = _parse_weight_suffix(ts)
        return DivAtom(w if w is not None else Lit(Fraction(1)))
    if ts.at_name("box"):
        ts.next()
        if ts.at_name("DIV"):
            ts.next()
            return AlwaysDiv()
        return Box(_parse_pred_arg(ts))
    if ts.at_name("dia"):
        ts.next()
        if ts.at_name("DIV"):
            ts.next()
            return SometimesDiv()
        return Diamond(_parse_pred_arg(ts))
    if ts.at_name("boxT"):
        ts.next()
        return BoxTotal(_parse_pred_arg(ts))
    if ts.at_name("diaP"):
        ts.next()
        return DiamondPartial(_parse_pred_arg(ts))
    if ts.at_name("exists"):
        ts.next()
        var = ts.expect_name().text
        if not ts.at_name("in"):
            raise ts.error("expected 'in'")
        ts.next()
        if ts.at_punct("{"):
            ts.next()
            choices = [_parse_weight_value(ts)]
            while ts.at_punct(","):
                ts.next()
                choices.append(_parse_weight_value(ts))
            ts.expect_punct("}")
            ts.expect_punct(".")
            return ExistsWeight(var, tuple(choices), _parse_assert_unary(ts))
        lo_tok = ts.next()
        if lo_tok.kind != "int":
            raise lang.ParseError("expected a range", lo_tok.line, lo_tok.col)
        ts.expect_punct("..")
        hi_tok = ts.next()
        if hi_tok.kind != "int":
            raise lang.ParseError("expected a range", hi_tok.line, hi_tok.col)
        ts.expect_punct(".")
        return ExistsIdx(var, int(lo_tok.text), int(hi_tok.text), _parse_assert_unary(ts))
    if ts.at_name("bigoplus"):
        ts.next()
        var = ts.expect_name().text
        ts.expect_punct(".")
        return OPlusFamily(var, _parse_assert_unary(ts))
    if ts.at_punct("("):
        save = ts.pos
        ts.next()
        try:
            pred = parse_bool(ts, allow_div=True)
            ts.expect_punct(")")
            w = _parse_weight_suffix(ts)
            return Atom(pred, w if w is not None else Lit(Fraction(1)))
        except lang.ParseError:
            ts.pos = save
        ts.next()
        a = _parse_assert_impl(ts)
        ts.expect_punct(")")
        return a
    raise ts.error(f"expected an assertion, got {tok.text!r}")


def _parse_weight_value(ts: TokenStream) -> Weight:
    w = _parse_weight_inner(ts)
    ground = _ground_weight(w)
    if ground is None:
        raise ts.error("weight choices must be constants")
    return ground


def format_weight_expr(e: WeightExpr) -> str:
    if isinstance(e, InfConst):
        return "inf"
    return lang.format_arith(e)


def format_assertion(a: Assertion) -> str:
    if isinstance(a, Top):
        return "top"
    if isinstance(a, Bot):
        return "bot"
    if isinstance(a, Atom):
        return f"({format_bool(a.pred)})^({format_weight_expr(a.weight)})"
    if isinstance(a, DivAtom):
        return f"DIV^({format_weight_expr(a.weight)})"
    if isinstance(a, NotA):
        return f"~{format_assertion(a.arg)}"
    if isinstance(a, AndA):
        return f"({format_assertion(a.left)} /\\ {format_assertion(a.right)})"
    if isinstance(a, OrA):
        return f"({format_assertion(a.left)} \\/ {format_assertion(a.right)})"
    if isinstance(a, ImpliesA):
        return f"({format_assertion(a.left)} => {format_assertion(a.right)})"
    if isinstance(a, OPlus):
        return "(" + " ++ ".join(format_assertion(p) for p in a.parts) + ")"
    if isinstance(a, ScaleL):
        return f"scaleL[{format_weight_expr(a.weight)}]({format_assertion(a.arg)})"
    if isinstance(a, ScaleR):
        return f"scaleR({format_assertion(a.arg)})[{format_weight_expr(a.weight)}]"
    if isinstance(a, ExistsIdx):
        return f"exists {a.var} in {a.lo}..{a.hi}. {format_assertion(a.body)}"
    if isinstance(a, ExistsWeight):
        ws = ", ".join(format_weight(w) for w in a.choices)
        return f"exists {a.var} in {{{ws}}}. {format_assertion(a.body)}"
    if isinstance(a, OPlusFamily):
        return f"bigoplus {a.var}. {format_assertion(a.body)}"
    if isinstance(a, Box):
        return f"box ({format_bool(a.pred)})"
    if isinstance(a, Diamond):
        return f"dia ({format_bool(a.pred)})"
    if isinstance(a, BoxTotal):
        return f"boxT ({format_bool(a.pred)})"
    if isinstance(a, DiamondPartial):
        return f"diaP ({format_bool(a.pred)})"
    if isinstance(a, AlwaysDiv):
        return "box DIV"
    if isinstance(a, SometimesDiv):
        return "dia DIV"
    if isinstance(a, SuppSubset):
        div = "_div" if a.include_div else ""
        return f"suppsubset{div} ({format_bool(a.pred)})"
    if isinstance(a, SuppMeets):
        div = "_div" if a.include_div else ""
        return f"suppmeets{div} ({format_bool(a.pred)})"
    if isinstance(a, Singleton):
        return f"sing {a.m}"
    raise AssertionError_(f"cannot format: {a!r}")


# ---------------------------------------------------------------------------
# Generators of satisfying weightings (for semantic triple checking)


def generate_satisfying(
    a: Assertion,
    sr: Semiring,
    domain: Optional[Sequence[ProgramState]] = None,
    subsets: bool = False,
    limit: int = 4096,
) -> Optional[List[Weighting]]:
    """A finite sample of weightings satisfying the assertion.

    For state-predicate shapes this follows the unit-weighting reading of
    the subsumption results (one unit weighting per predicate state), with
    full Boolean sub-support enumeration behind the ``subsets`` flag.
    Returns None when the satisfying set cannot be enumerated.
    """
    a = simplify(a)
    out: List[Weighting] = []
    if isinstance(a, Singleton):
        return [a.m]
    if isinstance(a, Bot):
        return []
    if a == EMPTY_ATOM:
        return [Weighting.empty(sr)]
    if isinstance(a, Atom):
        w = _ground_weight(a.weight)
        states = pred_states(a.pred, domain)
        if w is None or states is None:
            return None
        if not sr.contains(w):
            return []
        if sr.name == "bool" and subsets:
            for r in range(1, len(states) + 1):
                for combo in itertools.combinations(states, r):
                    out.append(Weighting(sr, {s: Fraction(1) for s in combo}))
                    if len(out) > limit:
                        return out[:limit]
            return out
        return [Weighting(sr, {s: w}) for s in states]
    if isinstance(a, BoxTotal):
        states = pred_states(a.pred, domain)
        if states is None:
            return None
        out = [Weighting.empty(sr)]
        out += [unit(sr, s) for s in states]
        if sr.name == "bool" and subsets and len(states) <= 10:
            out = all_bool_weightings(sr, states, include_div=False)
        return out
    if isinstance(a, Box):
        states = pred_states(a.pred, domain)
        if states is None:
            return None
        out = [Weighting.empty(sr), unit(sr, DIV)]
        out += [unit(sr, s) for s in states]
        if sr.top is not None and sr.name == "prob":
            out += [
                Weighting(sr, {s: Fraction(1, 2), DIV: Fraction(1, 2)}) for s in states
            ]
        return out
    if isinstance(a, DivAtom):
        w = _ground_weight(a.weight)
        if w is None:
            return None
        return [Weighting(sr, {DIV: sr.mul(sr.check(w), sr.top)})]
    if isinstance(a, AlwaysDiv):
        out = [Weighting.empty(sr)]
        if sr.top is not None:
            out.append(Weighting(sr, {DIV: sr.top}))
        if sr.name == "prob":
            out.append(Weighting(sr, {DIV: Fraction(1, 2)}))
        return out
    if isinstance(a, OPlus):
        parts_gens = []
        for p in a.parts:
            g = generate_satisfying(p, sr, domain, subsets, limit)
            if g is None:
                return None
            parts_gens.append(g)
        for combo in itertools.product(*parts_gens):
            try:
                acc = Weighting.empty(sr)
                for mi in combo:
                    acc = wsum(acc, mi)
                out.append(acc)
            except OutcomeKitError:
                continue
            if len(out) > limit:
                break
        return out
    if isinstance(a, ExistsIdx):
        for k in range(a.lo, a.hi + 1):
            g = generate_satisfying(
                subst_assertion(a.body, a.var, Fraction(k)), sr, domain, subsets, limit
            )
            if g is None:
                return None
            out.extend(g)
        return out
    if isinstance(a, ExistsWeight):
        for w in a.choices:
            g = generate_satisfying(_subst_weight_var(a.body, a.var, w), sr, domain, subsets, limit)
            if g is None:
                return None
            out.extend(g)
        return out
    if isinstance(a, (ScaleL, ScaleR)):
        w = _ground_weight(a.weight)
        g = generate_satisfying(a.arg, sr, domain, subsets, limit)
        if w is None or g is None:
            return None
        return [scale_left(w, m) for m in g]
    return None
