"""Termination-sensitive predicate transformers over declared finite
domains, semantic outcome-triple checking, and the brute-force
subsumption oracle relating the two.

Loops that neither stabilize nor cycle within the configured bounds leave
their start states three-valued: such states are reported in an explicit
``unknown`` set rather than silently classified.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from . import assertions as asst
from .assertions import (
    AlwaysDiv,
    AndA,
    Assertion,
    Atom,
    Bot,
    Box,
    BoxTotal,
    Diamond,
    DiamondPartial,
    DivAtom,
    ExistsIdx,
    ExistsWeight,
    NotA,
    OPlus,
    OrA,
    Singleton,
    SometimesDiv,
    SuppMeets,
    SuppSubset,
    Top,
    expand_modal,
    generate_satisfying,
    simplify,
    satisfies,
    SplitSearchExceeded,
)
from .lang import (
    And,
    Assign,
    BoolExpr,
    Choice,
    Cmp,
    Command,
    If,
    Lit,
    Or,
    ProgramState,
    Seq,
    Skip,
    TRUE,
    Var,
    While,
    eval_bool,
)
from .semiring import BOOL, OutcomeKitError, Semiring, Weight, is_inf
from .semantics import EvalConfig, EvalResult, eval_command
from .weighting import DIV, MassOverflow, Weighting, unit


class DomainTooLarge(OutcomeKitError):
    pass


@dataclass
class FiniteDomain:
    """Explicit finite value sets per variable; the induced state space is
    their product."""

    values: Dict[str, List[Fraction]]
    max_states: int = 100000
    _states: Optional[List[ProgramState]] = field(default=None, repr=False)

    @staticmethod
    def parse(text: str, max_states: int = 100000) -> "FiniteDomain":
        values: Dict[str, List[Fraction]] = {}
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            name, _, spec = part.partition(":")
            name = name.strip()
            spec = spec.strip()
            if ".." in spec:
                lo_text, _, hi_text = spec.partition("..")
                lo, hi = int(lo_text), int(hi_text)
                values[name] = [Fraction(v) for v in range(lo, hi + 1)]
            else:
                values[name] = [Fraction(v) for v in spec.split("|")]
        return FiniteDomain(values, max_states)

    def states(self) -> List[ProgramState]:
        if self._states is None:
            names = sorted(self.values)
            count = 1
            for name in names:
                count *= len(self.values[name])
                if count > self.max_states:
                    raise DomainTooLarge(
                        f"domain exceeds {self.max_states} states"
                    )
            combos = itertools.product(*(self.values[n] for n in names))
            self._states = [
                ProgramState.make(dict(zip(names, combo))) for combo in combos
            ]
        return self._states


# ---------------------------------------------------------------------------
# Three-valued satisfaction on possibly inexact results

Tri = Optional[bool]


def sat3(r: EvalResult, a: Assertion, budget: int = asst.DEFAULT_BUDGET) -> Tri:
    """Satisfaction of an assertion by an evaluation result.

    Exact results decide exactly. For results with unresolved mass the
    verdict is definite only when every possible completion agrees:
    collected support can only grow and collected weights only increase.
    """
    a = expand_modal(simplify(a))
    if r.exact():
        try:
            return satisfies(r.collected, a, budget)
        except SplitSearchExceeded:
            return None
    return _sat3_slack(r, a, budget)


def _sat3_slack(r: EvalResult, a: Assertion, budget: int) -> Tri:
    sr = r.semiring
    c = r.collected
    if isinstance(a, Top):
        return True
    if isinstance(a, Bot):
        return False
    if isinstance(a, NotA):
        inner = _sat3_slack(r, a.arg, budget)
        return None if inner is None else (not inner)
    if isinstance(a, AndA):
        l = _sat3_slack(r, a.left, budget)
        rr = _sat3_slack(r, a.right, budget)
        if l is False or rr is False:
            return False
        if l is True and rr is True:
            return True
        return None
    if isinstance(a, OrA):
        l = _sat3_slack(r, a.left, budget)
        rr = _sat3_slack(r, a.right, budget)
        if l is True or rr is True:
            return True
        if l is False and rr is False:
            return False
        return None
    if isinstance(a, SuppSubset):
        if not a.include_div and c.div_weight() != sr.zero:
            return False
        if any(not eval_bool(a.pred, s) for s in c.states()):
            return False
        if a.pred == TRUE and a.include_div:
            return True
        return None
    if isinstance(a, SuppMeets):
        if a.include_div and c.div_weight() != sr.zero:
            return True
        if any(eval_bool(a.pred, s) for s in c.states()):
            return True
        return None
    if isinstance(a, AlwaysDiv):
        if c.states():
            return False
        return None
    if isinstance(a, SometimesDiv):
        if asst._div_indicates(sr, c.div_weight()):
            return True
        return None
    if isinstance(a, Atom):
        w = asst._ground_weight(a.weight)
        if w is None:
            return None
        if c.div_weight() != sr.zero:
            return False
        if any(not eval_bool(a.pred, s) for s in c.states()):
            return False
        if not sr.leq(c.mass(), w):
            return False
        if not sr.leq(w, sr.add_saturating(c.mass(), r.slack)):
            return False
        return None
    if isinstance(a, DivAtom):
        w = asst._ground_weight(a.weight)
        if w is None:
            return None
        target = sr.mul(sr.check(w), sr.top)
        if c.states():
            return False
        if not sr.leq(c.div_weight(), target):
            return False
        return None
    if isinstance(a, OPlus):
        masses = [asst.assertion_mass(p, sr) for p in a.parts]
        if all(x is not None for x in masses):
            total = sr.zero
            ok = True
            for x in masses:
                try:
                    total = sr.add(total, x)
                except Exception:
                    ok = False
                    break
            if ok and not sr.leq(c.mass(), total):
                return False
        return None
    if isinstance(a, (ExistsIdx, ExistsWeight)):
        insts: List[Assertion] = []
        if isinstance(a, ExistsIdx):
            insts = [
                asst.subst_assertion(a.body, a.var, Fraction(k))
                for k in range(a.lo, a.hi + 1)
            ]
        else:
            insts = [asst._subst_weight_var(a.body, a.var, w) for w in a.choices]
        results = [_sat3_slack(r, simplify(inst), budget) for inst in insts]
        if any(x is True for x in results):
            return True
        if all(x is False for x in results):
            return False
        return None
    return None


# ---------------------------------------------------------------------------
# Predicate transformers


@dataclass
class TransformResult:
    included: List[ProgramState]
    excluded: List[ProgramState]
    unknown: List[ProgramState]

    def membership(self, s: ProgramState) -> Tri:
        if s in self.included:
            return True
        if s in self.excluded:
            return False
        return None


def _classify(
    kind: str, r: EvalResult, q: BoolExpr
) -> Tri:
    sr = r.semiring
    c = r.collected
    in_q = [s for s in c.states() if eval_bool(q, s)]
    out_q = [s for s in c.states() if not eval_bool(q, s)]
    diverging = c.div_weight() != sr.zero
    if kind == "wlp":  # all terminating outcomes in q
        if out_q:
            return False
        return True if r.exact() else None
    if kind == "wpp":  # some terminating outcome in q
        if in_q:
            return True
        return False if r.exact() else None
    if kind == "wp":  # all outcomes terminate in q
        if out_q or diverging:
            return False
        return True if r.exact() else None
    if kind == "wlpp":  # some outcome in q or diverging
        if in_q or diverging:
            return True
        return False if r.exact() else None
    raise ValueError(f"unknown transformer kind {kind!r}")


def _transform(
    kind: str,
    cmd: Command,
    post: BoolExpr,
    domain: FiniteDomain,
    cfg: Optional[EvalConfig] = None,
    sr: Semiring = BOOL,
) -> TransformResult:
    cfg = cfg or EvalConfig()
    result = TransformResult([], [], [])
    for sigma in domain.states():
        r = eval_command(cmd, unit(sr, sigma), cfg)
        verdict = _classify(kind, r, post)
        if verdict is True:
            result.included.append(sigma)
        elif verdict is False:
            result.excluded.append(sigma)
        else:
            result.unknown.append(sigma)
    return result


def wlp_box(cmd, post, domain, cfg=None, sr=BOOL) -> TransformResult:
    """States whose terminating outcomes all satisfy the postcondition
    (divergence permitted): the weakest liberal precondition."""
    return _transform("wlp", cmd, post, domain, cfg, sr)


def wpp_diamond(cmd, post, domain, cfg=None, sr=BOOL) -> TransformResult:
    """States with some terminating outcome in the postcondition: the
    weakest possible precondition."""
    return _transform("wpp", cmd, post, domain, cfg, sr)


def wp_total(cmd, post, domain, cfg=None, sr=BOOL) -> TransformResult:
    """States whose every outcome terminates in the postcondition: the
    weakest precondition."""
    return _transform("wp", cmd, post, domain, cfg, sr)


def wlpp(cmd, post, domain, cfg=None, sr=BOOL) -> TransformResult:
    """States with some outcome in the postcondition or some divergence:
    the weakest liberal possible precondition."""
    return _transform("wlpp", cmd, post, domain, cfg, sr)


TRANSFORMS = {"wlp": wlp_box, "wpp": wpp_diamond, "wp": wp_total, "wlpp": wlpp}


# ---------------------------------------------------------------------------
# Triple checking


@dataclass
class Verdict:
    kind: str  # 'valid' | 'invalid' | 'unknown'
    checked: int = 0
    counterexample: Optional[Tuple[Weighting, EvalResult]] = None
    note: str = ""

    @property
    def valid(self) -> bool:
        return self.kind == "valid"

    def __str__(self) -> str:
        if self.kind == "valid":
            return f"Valid ({self.checked} preconditions checked)"
        if self.kind == "invalid":
            m, r = self.counterexample
            return f"Invalid: from {m} the program yields {r.collected} ({r.status})"
        return f"Unknown: {self.note}"


def check_triple(
    pre: Assertion,
    cmd: Command,
    post: Assertion,
    sr: Semiring,
    domain: Optional[FiniteDomain] = None,
    cfg: Optional[EvalConfig] = None,
    generators: Optional[Sequence[Weighting]] = None,
    subsets: bool = False,
    budget: int = asst.DEFAULT_BUDGET,
) -> Verdict:
    """Semantic validity of an outcome triple over an enumerable
    precondition.

    The satisfying set of the precondition is enumerated from an explicit
    generator list when given, else from the assertion shape (unit
    weightings per predicate state, full Boolean sub-supports behind the
    ``subsets`` flag). Every generated weighting is pushed through the
    program and tested against the postcondition.
    """
    cfg = cfg or EvalConfig()
    states = domain.states() if domain is not None else None
    if generators is None:
        generators = generate_satisfying(pre, sr, states, subsets=subsets)
        if generators is None:
            return Verdict("unknown", 0, note="precondition not enumerable")
    unknowns = 0
    note = ""
    checked = 0
    for m in generators:
        try:
            r = eval_command(cmd, m, cfg)
        except MassOverflow as exc:
            return Verdict("unknown", checked, note=f"evaluation failed: {exc}")
        checked += 1
        verdict = sat3(r, post, budget)
        if verdict is False:
            return Verdict("invalid", checked, counterexample=(m, r))
        if verdict is None:
            unknowns += 1
            note = f"{unknowns} evaluations left the postcondition undecided"
    if unknowns:
        return Verdict("unknown", checked, note=note)
    return Verdict("valid", checked)


# ---------------------------------------------------------------------------
# Subsumption oracle


@dataclass
class AgreementReport:
    theorem: str
    per_state: List[Tuple[ProgramState, Tri, Tri]]
    agreed: bool

    def __str__(self) -> str:
        flag = "agree" if self.agreed else "DISAGREE"
        return f"{self.theorem}: {flag} over {len(self.per_state)} states"


_THEOREMS = {
    "hoare": ("wlp", Box),
    "lisbon": ("wpp", Diamond),
    "total-hoare": ("wp", BoxTotal),
}


def subsumption_oracle(
    theorem: str,
    cmd: Command,
    pre_states: Sequence[ProgramState],
    post: BoolExpr,
    domain: FiniteDomain,
    cfg: Optional[EvalConfig] = None,
) -> AgreementReport:
    """Compare the triple-side and transformer-side readings of one of the
    classical-logic correspondences, per precondition state.

    The triple side runs the generic assertion machinery on the modal
    postcondition; the transformer side classifies start states directly
    from the evaluation results. The correspondence says they must agree
    wherever both decide, and the shared evaluation bounds make the
    three-valued verdicts line up exactly.
    """
    cfg = cfg or EvalConfig()
    kind, modal = _THEOREMS[theorem]
    transformer = _transform(kind, cmd, post, domain, cfg)
    rows: List[Tuple[ProgramState, Tri, Tri]] = []
    agreed = True
    for sigma in pre_states:
        r = eval_command(cmd, unit(BOOL, sigma), cfg)
        triple_side = sat3(r, modal(post))
        transformer_side = transformer.membership(sigma)
        rows.append((sigma, triple_side, transformer_side))
        if triple_side != transformer_side:
            agreed = False
    return AgreementReport(theorem, rows, agreed)


# ---------------------------------------------------------------------------
# Seeded random Boolean programs (oracle test corpus)


def random_boolean_program(
    rng: random.Random,
    variables: Sequence[str] = ("x", "y"),
    values: Sequence[int] = (0, 1, 2, 3),
    depth: int = 4,
) -> Command:
    def expr():
        roll = rng.random()
        if roll < 0.4:
            return Lit(Fraction(rng.choice(values)))
        if roll < 0.7:
            return Var(rng.choice(variables))
        from .lang import BinOp

        op = rng.choice(["+", "-"])
        return BinOp(op, Var(rng.choice(variables)), Lit(Fraction(rng.choice((1, 2)))))

    def guard():
        op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
        left = Var(rng.choice(variables))
        right = Lit(Fraction(rng.choice(values))) if rng.random() < 0.7 else Var(rng.choice(variables))
        base = Cmp(op, left, right)
        if rng.random() < 0.2:
            return And(base, Cmp(rng.choice(["<", ">"]), Var(rng.choice(variables)), Lit(Fraction(rng.choice(values)))))
        return base

    def command(d: int) -> Command:
        if d <= 1:
            if rng.random() < 0.2:
                return Skip()
            return Assign(rng.choice(variables), expr())
        roll = rng.random()
        if roll < 0.30:
            return Seq(command(d - 1), command(d - 1))
        if roll < 0.50:
            return Choice(command(d - 1), command(d - 1))
        if roll < 0.70:
            return If(guard(), command(d - 1), command(d - 1))
        if roll < 0.82:
            return While(guard(), command(d - 1))
        return Assign(rng.choice(variables), expr())

    return command(depth)


def random_state_predicate(
    rng: random.Random, domain: FiniteDomain
) -> Tuple[BoolExpr, List[ProgramState]]:
    """A random predicate over the domain with its satisfying states."""
    states = domain.states()
    chosen = [s for s in states if rng.random() < 0.5]
    if not chosen:
        chosen = [rng.choice(states)]
    pred: Optional[BoolExpr] = None
    for s in chosen:
        conj: Optional[BoolExpr] = None
        for name, value in s.items:
            c = Cmp("=", Var(name), Lit(value))
            conj = c if conj is None else And(conj, c)
        pred = conj if pred is None else Or(pred, conj)
    return pred, chosen
