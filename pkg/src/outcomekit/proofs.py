"""Checker for derivation trees over outcome triples.

Each node names an inference rule, a conclusion triple, and premises.
Structural rules are matched syntactically; side conditions are
discharged through the assertion machinery (guard entailment,
nontermination checks, the implication lattice); indexed-family premises
of the loop rules are instantiated and checked semantically up to a
bound, with a template-uniformity argument closing the gap; declared
limits go through the closed-form certifier. Whatever cannot be verified
or refuted becomes a residual obligation attached to the report, never a
silent acceptance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import assertions as asst
from .assertions import (
    AlwaysDiv,
    AndA,
    Assertion,
    AssertionSchema,
    Atom,
    Bot,
    Box,
    BoxTotal,
    Certified,
    Diamond,
    DiamondPartial,
    DivAtom,
    EMPTY_ATOM,
    ExistsIdx,
    ExistsWeight,
    InfConst,
    LimitFailed,
    Obligation,
    OPlus,
    OPlusFamily,
    OrA,
    ScaleL,
    Singleton,
    SometimesDiv,
    Top,
    assertion_equal,
    entails_guard,
    format_assertion,
    generate_satisfying,
    implies,
    is_nonterminating,
    parse_assertion,
    pred_implies,
    simplify,
    subst_assertion,
    sure_termination,
    SplitSearchExceeded,
)
from .lang import (
    And,
    Assign,
    Assume,
    BoolGuard,
    Choice,
    Command,
    ConstGuard,
    Guard,
    If,
    Iter,
    Lit,
    NondetFlag,
    Not,
    ProgramState,
    Seq,
    Skip,
    TokenStream,
    Var,
    While,
    desugar,
    negate,
    parse_bool,
    parse_program,
    parse_weight_expr,
    tokenize,
    TRUE,
)
from .semiring import OutcomeKitError, Semiring, Weight, by_name, format_weight, is_inf
from .semantics import EvalConfig, eval_command
from .transformers import FiniteDomain, Verdict, check_triple, sat3
from .weighting import DIV, Weighting, unit, wsum


RULES = frozenset(
    {
        "False", "True", "Div", "Scale", "Disj", "Conj", "Choice", "Exists",
        "Consequence", "Skip", "Seq", "Plus", "Assume", "Iter", "DivStar",
        "If", "While", "Variant", "Invariant", "HoareVariant", "QInvAngel",
        "QInvDemon", "SeqTotalHoare", "SeqLisbon", "IfHoare", "IfLisbon",
        "Assign",
    }
)

SHAPE = "shape-mismatch"
SIDE = "side-condition-failed"
PREMISE = "premise-failed"


class ProofError(OutcomeKitError):
    pass


@dataclass
class ProofNode:
    rule: str
    pre: Assertion
    prog: Command
    post: Assertion
    premises: List["ProofNode"] = field(default_factory=list)
    families: Dict[str, AssertionSchema] = field(default_factory=dict)
    limits: Dict[str, Assertion] = field(default_factory=dict)
    side: Dict[str, object] = field(default_factory=dict)

    def triple(self) -> str:
        return (
            f"<{format_assertion(self.pre)}> ... <{format_assertion(self.post)}>"
        )


@dataclass
class ObligationEntry:
    node: str
    claim: str
    checked_to: int

    def key(self) -> Tuple[str, str]:
        return (self.node, self.claim)


@dataclass
class NodeReport:
    node: str
    rule: str
    verdict: str  # 'accepted' | 'rejected'
    reason_class: str = ""
    message: str = ""
    obligations: List[ObligationEntry] = field(default_factory=list)


@dataclass
class CheckReport:
    nodes: List[NodeReport]
    obligations: List[ObligationEntry]

    @property
    def rejected(self) -> bool:
        return any(n.verdict == "rejected" for n in self.nodes)

    @property
    def verdict(self) -> str:
        if self.rejected:
            return "Rejected"
        if self.obligations:
            return "AcceptedWithObligations"
        return "Accepted"

    def rejection(self) -> Optional[NodeReport]:
        for n in self.nodes:
            if n.verdict == "rejected":
                return n
        return None

    def __str__(self) -> str:
        lines = [self.verdict]
        for n in self.nodes:
            if n.verdict == "rejected":
                lines.append(f"  {n.node} [{n.rule}] rejected ({n.reason_class}): {n.message}")
        for ob in self.obligations:
            lines.append(f"  obligation at {ob.node}: {ob.claim} (checked to {ob.checked_to})")
        return "\n".join(lines)


@dataclass
class CheckContext:
    semiring: Semiring
    domain: Optional[FiniteDomain] = None
    cfg: EvalConfig = field(default_factory=EvalConfig)
    ncheck: int = 16

    def states(self) -> Optional[List[ProgramState]]:
        return self.domain.states() if self.domain is not None else None


def _prog_equal(a: Command, b: Command) -> bool:
    return desugar(a) == desugar(b)


def _aeq(a: Assertion, b: Assertion) -> bool:
    return assertion_equal(a, b)


# ---------------------------------------------------------------------------
# Rule checking


def check_proof(root: ProofNode, ctx: CheckContext) -> CheckReport:
    """Depth-first check of a derivation tree.

    A rejected node rejects all of its ancestors; obligations propagate to
    the root summary.
    """
    nodes: List[NodeReport] = []
    obligations: List[ObligationEntry] = []

    def walk(node: ProofNode, path: str) -> bool:
        ok = True
        for i, child in enumerate(node.premises):
            if not walk(child, f"{path}.{i}"):
                ok = False
        if not ok:
            nodes.append(
                NodeReport(path, node.rule, "rejected", PREMISE, "a premise was rejected")
            )
            return False
        report = check_node(node, ctx, path)
        nodes.append(report)
        obligations.extend(report.obligations)
        return report.verdict == "accepted"

    walk(root, "root")
    seen = set()
    unique = []
    for ob in obligations:
        if ob.key() not in seen:
            seen.add(ob.key())
            unique.append(ob)
    return CheckReport(nodes, unique)


def check_node(node: ProofNode, ctx: CheckContext, path: str = "root") -> NodeReport:
    """Check one rule application, assuming its premises hold."""
    if node.rule not in RULES:
        return _reject(node, path, SHAPE, f"unknown rule {node.rule!r}")
    try:
        handler = _HANDLERS[node.rule]
    except KeyError:
        return _reject(node, path, SHAPE, f"rule {node.rule} not handled")
    try:
        return handler(node, ctx, path)
    except SplitSearchExceeded as exc:
        report = NodeReport(path, node.rule, "accepted")
        report.obligations.append(
            ObligationEntry(path, f"verification budget exceeded: {exc}", 0)
        )
        return report
    except OutcomeKitError as exc:
        return _reject(node, path, SIDE, f"check failed: {exc}")


def _accept(node: ProofNode, path: str, obligations=()) -> NodeReport:
    return NodeReport(path, node.rule, "accepted", obligations=list(obligations))


def _reject(node: ProofNode, path: str, cls: str, message: str) -> NodeReport:
    return NodeReport(path, node.rule, "rejected", cls, message)


def _expect_premises(node: ProofNode, count: int) -> Optional[str]:
    if len(node.premises) != count:
        return f"expected {count} premises, found {len(node.premises)}"
    return None


def _check_false(node, ctx, path):
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    if not isinstance(simplify(node.pre), Bot):
        return _reject(node, path, SHAPE, "precondition must be bot")
    return _accept(node, path)


def _check_true(node, ctx, path):
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    if not isinstance(simplify(node.post), Top):
        return _reject(node, path, SHAPE, "postcondition must be top")
    return _accept(node, path)


def _check_div(node, ctx, path):
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    pre, post = simplify(node.pre), simplify(node.post)
    if not isinstance(pre, DivAtom) and pre != EMPTY_ATOM:
        return _reject(node, path, SHAPE, "precondition must be a divergence atom")
    if not _aeq(pre, post):
        return _reject(node, path, SHAPE, "divergence weight must be preserved")
    return _accept(node, path)


def _check_divstar(node, ctx, path):
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    if not is_nonterminating(node.pre):
        return _reject(node, path, SIDE, "precondition does not entail nontermination")
    if not _aeq(node.pre, node.post):
        return _reject(node, path, SHAPE, "pre and post must coincide")
    return _accept(node, path)


def _check_skip(node, ctx, path):
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    if desugar(node.prog) != Skip():
        return _reject(node, path, SHAPE, "program must be skip")
    if not _aeq(node.pre, node.post):
        return _reject(node, path, SHAPE, "pre and post must coincide")
    return _accept(node, path)


def _check_scale(node, ctx, path):
    if err := _expect_premises(node, 1):
        return _reject(node, path, SHAPE, err)
    (p,) = node.premises
    w = node.side.get("weight")
    if w is None:
        return _reject(node, path, SHAPE, "missing scaling weight")
    if not _prog_equal(node.prog, p.prog):
        return _reject(node, path, SHAPE, "premise program differs")
    if not _aeq(node.pre, ScaleL(w, p.pre)):
        return _reject(node, path, SHAPE, "precondition is not the scaled premise")
    if not _aeq(node.post, ScaleL(w, p.post)):
        return _reject(node, path, SHAPE, "postcondition is not the scaled premise")
    return _accept(node, path)


def _check_disj(node, ctx, path):
    return _check_binary_connective(node, ctx, path, OrA)


def _check_conj(node, ctx, path):
    return _check_binary_connective(node, ctx, path, AndA)


def _check_binary_connective(node, ctx, path, ctor):
    if err := _expect_premises(node, 2):
        return _reject(node, path, SHAPE, err)
    p1, p2 = node.premises
    for p in (p1, p2):
        if not _prog_equal(node.prog, p.prog):
            return _reject(node, path, SHAPE, "premise program differs")
    if not _aeq(node.pre, ctor(p1.pre, p2.pre)):
        return _reject(node, path, SHAPE, "precondition shape mismatch")
    if not _aeq(node.post, ctor(p1.post, p2.post)):
        return _reject(node, path, SHAPE, "postcondition shape mismatch")
    return _accept(node, path)


def _check_choice(node, ctx, path):
    if not node.premises:
        return _reject(node, path, SHAPE, "needs at least one premise")
    for p in node.premises:
        if not _prog_equal(node.prog, p.prog):
            return _reject(node, path, SHAPE, "premise program differs")
    if not _aeq(node.pre, OPlus(tuple(p.pre for p in node.premises))):
        return _reject(node, path, SHAPE, "precondition is not the premise conjunction")
    if not _aeq(node.post, OPlus(tuple(p.post for p in node.premises))):
        return _reject(node, path, SHAPE, "postcondition is not the premise conjunction")
    return _accept(node, path)


def _check_exists(node, ctx, path):
    pre, post = simplify(node.pre), simplify(node.post)
    if isinstance(pre, ExistsIdx) and isinstance(post, ExistsIdx):
        if (pre.var, pre.lo, pre.hi) != (post.var, post.lo, post.hi):
            return _reject(node, path, SHAPE, "mismatched quantifier ranges")
        count = pre.hi - pre.lo + 1
        if err := _expect_premises(node, count):
            return _reject(node, path, SHAPE, err)
        for k, p in zip(range(pre.lo, pre.hi + 1), node.premises):
            if not _prog_equal(node.prog, p.prog):
                return _reject(node, path, SHAPE, "premise program differs")
            want_pre = subst_assertion(pre.body, pre.var, Fraction(k))
            want_post = subst_assertion(post.body, post.var, Fraction(k))
            if not (_aeq(p.pre, want_pre) and _aeq(p.post, want_post)):
                return _reject(node, path, SHAPE, f"premise at index {k} mismatched")
        return _accept(node, path)
    if isinstance(pre, ExistsWeight) and isinstance(post, ExistsWeight):
        if (pre.var, pre.choices) != (post.var, post.choices):
            return _reject(node, path, SHAPE, "mismatched quantifier ranges")
        if err := _expect_premises(node, len(pre.choices)):
            return _reject(node, path, SHAPE, err)
        for w, p in zip(pre.choices, node.premises):
            if not _prog_equal(node.prog, p.prog):
                return _reject(node, path, SHAPE, "premise program differs")
            want_pre = asst._subst_weight_var(pre.body, pre.var, w)
            want_post = asst._subst_weight_var(post.body, post.var, w)
            if not (_aeq(p.pre, want_pre) and _aeq(p.post, want_post)):
                return _reject(node, path, SHAPE, f"premise at weight {format_weight(w)} mismatched")
        return _accept(node, path)
    return _reject(node, path, SHAPE, "conclusion must be existentially quantified")


def _check_consequence(node, ctx, path):
    if err := _expect_premises(node, 1):
        return _reject(node, path, SHAPE, err)
    (p,) = node.premises
    if not _prog_equal(node.prog, p.prog):
        return _reject(node, path, SHAPE, "premise program differs")
    obligations = []
    for name, a, b in (("pre", node.pre, p.pre), ("post", p.post, node.post)):
        verdict = implies(a, b, ctx.states(), ctx.semiring)
        if verdict is False:
            return _reject(node, path, SIDE, f"{name}-implication refuted")
        if verdict is None:
            obligations.append(
                ObligationEntry(
                    path,
                    f"implication {format_assertion(a)} => {format_assertion(b)}",
                    ctx.ncheck,
                )
            )
    return _accept(node, path, obligations)


def _check_seq(node, ctx, path):
    prog = desugar(node.prog)
    if not isinstance(prog, Seq):
        return _reject(node, path, SHAPE, "program must be a sequence")
    if err := _expect_premises(node, 2):
        return _reject(node, path, SHAPE, err)
    p1, p2 = node.premises
    if not (_prog_equal(p1.prog, prog.first) and _prog_equal(p2.prog, prog.second)):
        return _reject(node, path, SHAPE, "premise programs do not compose")
    if not _aeq(p1.post, p2.pre):
        return _reject(node, path, SHAPE, "intermediate assertion mismatch")
    if not (_aeq(node.pre, p1.pre) and _aeq(node.post, p2.post)):
        return _reject(node, path, SHAPE, "conclusion does not match premises")
    return _accept(node, path)


def _check_plus(node, ctx, path):
    prog = desugar(node.prog)
    if not isinstance(prog, Choice):
        return _reject(node, path, SHAPE, "program must be a choice")
    if err := _expect_premises(node, 2):
        return _reject(node, path, SHAPE, err)
    p1, p2 = node.premises
    if not (_prog_equal(p1.prog, prog.left) and _prog_equal(p2.prog, prog.right)):
        return _reject(node, path, SHAPE, "premise programs do not match the branches")
    if not sure_termination(node.pre, ctx.states()):
        return _reject(node, path, SIDE, "precondition does not entail sure termination")
    if not (_aeq(p1.pre, node.pre) and _aeq(p2.pre, node.pre)):
        return _reject(node, path, SHAPE, "premises must share the conclusion precondition")
    if not _aeq(node.post, OPlus((p1.post, p2.post))):
        return _reject(node, path, SHAPE, "postcondition is not the premise conjunction")
    return _accept(node, path)


def _check_assume(node, ctx, path):
    prog = desugar(node.prog)
    if not isinstance(prog, Assume):
        return _reject(node, path, SHAPE, "program must be an assume")
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    result = entails_guard(node.pre, prog.guard, ctx.semiring, ctx.states())
    if result.kind == "no":
        return _reject(node, path, SIDE, f"guard entailment fails: {result.reason}")
    obligations = []
    if result.kind == "unknown":
        obligations.append(
            ObligationEntry(path, f"guard entailment undecided: {result.reason}", ctx.ncheck)
        )
        w = node.side.get("weight")
        if w is None:
            return _reject(node, path, SIDE, "no guard weight claimed or derivable")
        weight = asst._ground_weight(w)
    elif result.kind == "any":
        w = node.side.get("weight")
        weight = asst._ground_weight(w) if w is not None else ctx.semiring.one
    else:
        weight = result.weight
        claimed = node.side.get("weight")
        if claimed is not None and asst._ground_weight(claimed) != weight:
            return _reject(node, path, SIDE, "claimed guard weight differs from the entailed one")
    from .assertions import ScaleR

    if not _aeq(node.post, ScaleR(node.pre, asst.weight_expr_of(weight))):
        return _reject(node, path, SHAPE, "postcondition is not the scaled precondition")
    return _accept(node, path, obligations)


# -- loop rules --------------------------------------------------------------


def _get_schema(node: ProofNode, name: str) -> Optional[AssertionSchema]:
    return node.families.get(name)


def _combine_schemas(schemas: List[AssertionSchema]) -> AssertionSchema:
    """Pointwise outcome conjunction of families sharing an index."""
    index = schemas[0].index
    case_keys = set()
    for s in schemas:
        case_keys |= set(s.cases)
    general_from = max(
        (s.general_from for s in schemas if s.general is not None), default=0
    )
    if case_keys:
        general_from = max(general_from, max(case_keys) + 1)
    combined = AssertionSchema(index=index)
    combined.general_from = general_from
    parts = []
    ok_general = all(s.general is not None for s in schemas)
    if ok_general:
        for s in schemas:
            g = s.general
            if s.index != index:
                g = _rename_index(g, s.index, index)
            parts.append(g)
        combined.general = OPlus(tuple(parts))
    for k in range(general_from):
        try:
            combined.cases[k] = OPlus(tuple(s.at(k) for s in schemas))
        except asst.AssertionError_:
            pass
    if not ok_general:
        combined.general = None
    return combined


def _rename_index(a: Assertion, old: str, new: str) -> Assertion:
    # Families must share one index variable; corpus files use "n".
    if old != new:
        raise ProofError("families must share one index variable")
    return a


def _family_witnesses(
    schemas: List[AssertionSchema], n: int, ctx: CheckContext
) -> Optional[Weighting]:
    sr = ctx.semiring
    total: Optional[Weighting] = None
    for s in schemas:
        w = s.witness_weighting(n, sr, ctx.states())
        if w is None:
            return None
        total = w if total is None else wsum(total, w)
    return total


def _semantic_premise(
    pre_parts: List[AssertionSchema],
    n: int,
    prog: Command,
    post: Assertion,
    ctx: CheckContext,
    path: str,
    label: str,
) -> Tuple[bool, Optional[str]]:
    """Check one instantiated family triple semantically.

    Uses the family witnesses as the satisfying sample (plus enumerated
    generators over a declared domain when available). Returns
    (checked, failure message).
    """
    m = _family_witnesses(pre_parts, n, ctx)
    samples: List[Weighting] = [m] if m is not None else []
    pre_assertion = simplify(OPlus(tuple(s.at(n) for s in pre_parts)))
    generated = generate_satisfying(pre_assertion, ctx.semiring, ctx.states())
    if generated:
        samples.extend(generated[:8])
    if not samples:
        return (False, None)
    for sample in samples:
        r = eval_command(desugar(prog), sample, ctx.cfg)
        verdict = sat3(r, post)
        if verdict is False:
            return (
                True,
                f"{label} at n={n}: from {sample} the result {r.collected} "
                f"violates {format_assertion(simplify(post))}",
            )
        if verdict is None:
            return (False, None)
    return (True, None)


def _check_family_triples(
    node: ProofNode,
    ctx: CheckContext,
    path: str,
    pre_schemas: List[AssertionSchema],
    step_prog: Command,
    post_of_n,
    label: str,
) -> Tuple[List[ObligationEntry], Optional[NodeReport]]:
    """Instantiate and semantically check a for-all-n family premise."""
    obligations: List[ObligationEntry] = []
    uniform_from = None
    fs = [s for s in pre_schemas if s.general is not None]
    if len(fs) == len(pre_schemas):
        uniform_from = max(s.is_uniform_from() or 0 for s in pre_schemas)
    bound = max(ctx.ncheck, (uniform_from or 0) + 2)
    any_unchecked = False
    for n in range(bound + 1):
        post = post_of_n(n)
        checked, failure = _semantic_premise(
            pre_schemas, n, step_prog, post, ctx, path, label
        )
        if failure:
            return obligations, _reject(node, path, PREMISE, failure)
        if not checked:
            any_unchecked = True
    if uniform_from is None or any_unchecked:
        obligations.append(
            ObligationEntry(
                path,
                f"{label}: family premise verified for n <= {bound} only",
                bound,
            )
        )
    return obligations, None


def _check_entail_family(
    node, ctx, path, schema: AssertionSchema, check, label: str
) -> Tuple[List[ObligationEntry], Optional[NodeReport]]:
    obligations: List[ObligationEntry] = []
    uniform = schema.is_uniform_from()
    bound = max(ctx.ncheck, (uniform or 0) + 2)
    for n in range(bound + 1):
        verdict = check(schema.at(n))
        if verdict is False:
            return obligations, _reject(
                node, path, SIDE, f"{label} fails at n={n}"
            )
        if verdict is None:
            obligations.append(
                ObligationEntry(path, f"{label} undecided at n={n}", bound)
            )
            return obligations, None
    if uniform is None:
        obligations.append(
            ObligationEntry(path, f"{label} verified for n <= {bound} only", bound)
        )
    return obligations, None


def _limit_to_report(
    outcome, node, ctx, path, label
) -> Tuple[List[ObligationEntry], Optional[NodeReport]]:
    if isinstance(outcome, Certified):
        return [], None
    if isinstance(outcome, LimitFailed):
        return [], _reject(node, path, SIDE, f"{label}: {outcome.reason}")
    return [ObligationEntry(path, f"{label}: {outcome.claim}", outcome.checked_to)], None


def _check_iter(node, ctx, path):
    prog = desugar(node.prog)
    if not isinstance(prog, Iter):
        return _reject(node, path, SHAPE, "program must be an iteration")
    phi, psi, zeta = (_get_schema(node, k) for k in ("phi", "psi", "zeta"))
    if not (phi and psi and zeta):
        return _reject(node, path, SHAPE, "iteration rule needs phi/psi/zeta families")
    conv = node.limits.get("converge")
    div = node.limits.get("diverge")
    if conv is None or div is None:
        return _reject(node, path, SHAPE, "iteration rule needs declared limits")
    obligations: List[ObligationEntry] = []
    # conclusion shape
    if not _aeq(node.pre, OPlus((phi.at(0), zeta.at(0)))):
        return _reject(node, path, SHAPE, "precondition must be phi_0 ++ zeta_0")
    if not _aeq(node.post, OPlus((conv, div))):
        return _reject(node, path, SHAPE, "postcondition must be the declared limits")
    # entailments
    obs, rej = _check_entail_family(
        node, ctx, path, phi,
        lambda a: sure_termination(a, ctx.states()) or None,
        "phi_n entails sure termination",
    )
    obligations += obs
    if rej:
        return rej
    obs, rej = _check_entail_family(
        node, ctx, path, zeta,
        lambda a: True if is_nonterminating(a) else False,
        "zeta_n entails nontermination",
    )
    obligations += obs
    if rej:
        return rej
    # family premises
    step = Seq(Assume(prog.enter), prog.body)
    obs, rej = _check_family_triples(
        node, ctx, path, [phi, zeta], step,
        lambda n: OPlus((phi.at(n + 1), zeta.at(n + 1))),
        "loop step",
    )
    obligations += obs
    if rej:
        return rej
    obs, rej = _check_family_triples(
        node, ctx, path, [phi], Assume(prog.exit),
        lambda n: psi.at(n),
        "exit filter",
    )
    obligations += obs
    if rej:
        return rej
    # limits
    outcome = asst.limit_of_family(psi, "converge", conv, ctx.semiring, ctx.ncheck, ctx.states())
    obs, rej = _limit_to_report(outcome, node, ctx, path, "terminating limit")
    obligations += obs
    if rej:
        return rej
    combined = _combine_schemas([phi, zeta])
    outcome = asst.limit_of_family(combined, "diverge", div, ctx.semiring, ctx.ncheck, ctx.states())
    obs, rej = _limit_to_report(outcome, node, ctx, path, "diverging limit")
    obligations += obs
    if rej:
        return rej
    return _accept(node, path, obligations)


def _while_parts(prog: Command):
    if isinstance(prog, While):
        return prog.cond, prog.body
    if isinstance(prog, Iter):
        if isinstance(prog.enter, BoolGuard) and isinstance(prog.exit, BoolGuard):
            if prog.exit.expr == negate(prog.enter.expr):
                return prog.enter.expr, prog.body
    return None, None


def _check_while(node, ctx, path):
    cond, body = _while_parts(node.prog)
    if cond is None:
        return _reject(node, path, SHAPE, "program must be a guarded while loop")
    phi, psi, zeta = (_get_schema(node, k) for k in ("phi", "psi", "zeta"))
    if not (phi and psi and zeta):
        return _reject(node, path, SHAPE, "while rule needs phi/psi/zeta families")
    conv = node.limits.get("converge")
    div = node.limits.get("diverge")
    if conv is None or div is None:
        return _reject(node, path, SHAPE, "while rule needs declared limits")
    obligations: List[ObligationEntry] = []
    if not _aeq(node.pre, OPlus((phi.at(0), psi.at(0), zeta.at(0)))):
        return _reject(node, path, SHAPE, "precondition must be phi_0 ++ psi_0 ++ zeta_0")
    if not _aeq(node.post, OPlus((conv, div))):
        return _reject(node, path, SHAPE, "postcondition must be the declared limits")
    sr = ctx.semiring
    obs, rej = _check_entail_family(
        node, ctx, path, phi,
        lambda a: _entail3(a, BoolGuard(cond), sr, ctx.states(), sr.one),
        "phi_n entails the guard",
    )
    obligations += obs
    if rej:
        return rej
    obs, rej = _check_entail_family(
        node, ctx, path, psi,
        lambda a: _entail3(a, BoolGuard(negate(cond)), sr, ctx.states(), sr.one),
        "psi_n entails the negated guard",
    )
    obligations += obs
    if rej:
        return rej
    obs, rej = _check_entail_family(
        node, ctx, path, zeta,
        lambda a: True if is_nonterminating(a) else False,
        "zeta_n entails nontermination",
    )
    obligations += obs
    if rej:
        return rej
    obs, rej = _check_family_triples(
        node, ctx, path, [phi, zeta], body,
        lambda n: OPlus((phi.at(n + 1), psi.at(n + 1), zeta.at(n + 1))),
        "loop body",
    )
    obligations += obs
    if rej:
        return rej
    outcome = asst.limit_of_family(psi, "converge", conv, sr, ctx.ncheck, ctx.states())
    obs, rej = _limit_to_report(outcome, node, ctx, path, "terminating limit")
    obligations += obs
    if rej:
        return rej
    combined = _combine_schemas([phi, psi, zeta])
    outcome = asst.limit_of_family(combined, "diverge", div, sr, ctx.ncheck, ctx.states())
    obs, rej = _limit_to_report(outcome, node, ctx, path, "diverging limit")
    obligations += obs
    if rej:
        return rej
    return _accept(node, path, obligations)


def _entail3(a: Assertion, guard: Guard, sr, states, expected: Weight):
    result = entails_guard(a, guard, sr, states)
    if result.kind == "no":
        return False
    if result.kind == "unknown":
        return None
    return result.accepts(expected)


def _check_if(node, ctx, path):
    prog = node.prog
    if not isinstance(prog, If):
        return _reject(node, path, SHAPE, "program must be an if statement")
    if err := _expect_premises(node, 2):
        return _reject(node, path, SHAPE, err)
    p1, p2 = node.premises
    if not (_prog_equal(p1.prog, prog.then) and _prog_equal(p2.prog, prog.orelse)):
        return _reject(node, path, SHAPE, "premise programs do not match the branches")
    sr = ctx.semiring
    for p, g, name in (
        (p1, BoolGuard(prog.cond), "then-branch"),
        (p2, BoolGuard(negate(prog.cond)), "else-branch"),
    ):
        verdict = _entail3(p.pre, g, sr, ctx.states(), sr.one)
        if verdict is False:
            return _reject(node, path, SIDE, f"{name} precondition does not entail its guard")
        if verdict is None:
            return _reject(node, path, SIDE, f"{name} guard entailment undecided")
    if not _aeq(node.pre, OPlus((p1.pre, p2.pre))):
        return _reject(node, path, SHAPE, "precondition shape mismatch")
    if not _aeq(node.post, OPlus((p1.post, p2.post))):
        return _reject(node, path, SHAPE, "postcondition shape mismatch")
    return _accept(node, path)


# -- derived predicate-style rules -------------------------------------------


def _side_pred(node, key="pred"):
    return node.side.get(key)


def _semantic_triple(
    node, ctx, path, pre: Assertion, prog: Command, post: Assertion, label: str
) -> Tuple[Optional[NodeReport], List[ObligationEntry]]:
    """Discharge a rule premise semantically when no subtree proves it."""
    subtree = None
    for p in node.premises:
        if _prog_equal(p.prog, prog) and _aeq(p.pre, pre) and _aeq(p.post, post):
            subtree = p
            break
    if subtree is not None:
        return None, []  # subtree checked by the tree walk
    if node.premises:
        return (
            _reject(node, path, SHAPE, f"{label}: supplied premise does not match"),
            [],
        )
    verdict = check_triple(
        pre, prog, post, ctx.semiring, ctx.domain, ctx.cfg, subsets=False
    )
    if verdict.kind == "invalid":
        m, r = verdict.counterexample
        return (
            _reject(node, path, PREMISE, f"{label} fails: from {m} got {r.collected}"),
            [],
        )
    if verdict.kind == "unknown":
        return None, [ObligationEntry(path, f"{label}: {verdict.note}", ctx.ncheck)]
    return None, []


def _check_variant(node, ctx, path):
    cond, body = _while_parts(node.prog)
    if cond is None:
        return _reject(node, path, SHAPE, "program must be a guarded while loop")
    phi = _get_schema(node, "phi")
    bound = node.side.get("bound")
    var = node.side.get("var", "N")
    if phi is None or bound is None:
        return _reject(node, path, SHAPE, "variant rule needs a family and a bound")
    bound = int(bound)
    if phi.general is None or phi.cases:
        return _reject(node, path, SHAPE, "variant family must be a single template")
    want_pre = ExistsIdx(var, 0, bound, _swap_index(phi.general, phi.index, var))
    if not _aeq(node.pre, want_pre):
        return _reject(node, path, SHAPE, "precondition must existentially quantify the family")
    if not _aeq(node.post, phi.at(0)):
        return _reject(node, path, SHAPE, "postcondition must be the zero-variant assertion")
    sr = ctx.semiring
    obligations: List[ObligationEntry] = []
    verdict = _entail3(phi.at(0), BoolGuard(negate(cond)), sr, ctx.states(), sr.one)
    if verdict is False:
        return _reject(node, path, SIDE, "zero-variant assertion does not exit the loop")
    if verdict is None:
        obligations.append(ObligationEntry(path, "zero-variant guard entailment undecided", bound))
    for n in range(bound):
        verdict = _entail3(phi.at(n + 1), BoolGuard(cond), sr, ctx.states(), sr.one)
        if verdict is False:
            return _reject(node, path, SIDE, f"variant level {n + 1} does not entail the guard")
        if verdict is None:
            obligations.append(
                ObligationEntry(path, f"guard entailment undecided at level {n + 1}", bound)
            )
        rej, obs = _semantic_triple(
            node, ctx, path, phi.at(n + 1), body, phi.at(n), f"variant step {n + 1}"
        )
        obligations += obs
        if rej:
            return rej
    return _accept(node, path, obligations)


def _swap_index(a: Assertion, old: str, new: str) -> Assertion:
    if old == new:
        return a
    # substitute via an intermediate numeric marker would lose structure;
    # instead rename variables directly in predicates and weights
    from .lang import Var as LVar

    def ren_arith(e):
        if isinstance(e, LVar) and e.name == old:
            return LVar(new)
        from .lang import BinOp as LBinOp

        if isinstance(e, LBinOp):
            return LBinOp(e.op, ren_arith(e.left), ren_arith(e.right))
        return e

    def ren_bool(b):
        from .lang import And as LAnd, Cmp as LCmp, Not as LNot, Or as LOr

        if isinstance(b, LCmp):
            return LCmp(b.op, ren_arith(b.left), ren_arith(b.right))
        if isinstance(b, LNot):
            return LNot(ren_bool(b.arg))
        if isinstance(b, LAnd):
            return LAnd(ren_bool(b.left), ren_bool(b.right))
        if isinstance(b, LOr):
            return LOr(ren_bool(b.left), ren_bool(b.right))
        return b

    def ren(x: Assertion) -> Assertion:
        if isinstance(x, Atom):
            return Atom(ren_bool(x.pred), ren_arith(x.weight) if not isinstance(x.weight, InfConst) else x.weight)
        if isinstance(x, DivAtom):
            return DivAtom(ren_arith(x.weight) if not isinstance(x.weight, InfConst) else x.weight)
        if isinstance(x, OPlus):
            return OPlus(tuple(ren(p) for p in x.parts))
        if isinstance(x, (Box, BoxTotal, Diamond, DiamondPartial)):
            return type(x)(ren_bool(x.pred))
        return x

    return ren(a)


def _check_invariant(node, ctx, path):
    cond, body = _while_parts(node.prog)
    if cond is None:
        return _reject(node, path, SHAPE, "program must be a guarded while loop")
    pred = _side_pred(node)
    if pred is None:
        return _reject(node, path, SHAPE, "invariant rule needs a predicate")
    if not _aeq(node.pre, Atom(pred, Lit(Fraction(1)))):
        return _reject(node, path, SHAPE, "precondition must assert the invariant")
    if not _aeq(node.post, Box(And(pred, negate(cond)))):
        return _reject(node, path, SHAPE, "postcondition must box the invariant and exit")
    rej, obligations = _semantic_triple(
        node, ctx, path,
        Atom(And(pred, cond), Lit(Fraction(1))), body, Box(pred),
        "invariant preservation",
    )
    if rej:
        return rej
    return _accept(node, path, obligations)


def _check_hoare_variant(node, ctx, path):
    cond, body = _while_parts(node.prog)
    if cond is None:
        return _reject(node, path, SHAPE, "program must be a guarded while loop")
    pred = _side_pred(node)
    variant = node.side.get("variant")
    if pred is None or variant is None:
        return _reject(node, path, SHAPE, "needs an invariant predicate and a ranking expression")
    from .lang import Cmp

    if not _aeq(node.pre, Atom(And(pred, Cmp(">=", variant, Lit(Fraction(0)))), Lit(Fraction(1)))):
        return _reject(node, path, SHAPE, "precondition must bound the ranking from below")
    if not _aeq(node.post, BoxTotal(And(pred, negate(cond)))):
        return _reject(node, path, SHAPE, "postcondition must be total over invariant and exit")
    states = ctx.states()
    if states is None:
        return _reject(node, path, SIDE, "ranking checks need a finite domain")
    from .lang import eval_arith, eval_bool

    ranks = set()
    for s in states:
        if eval_bool(And(pred, cond), s):
            r = eval_arith(variant, s)
            if r <= 0:
                return _reject(
                    node, path, SIDE, f"ranking is not positive on {s}"
                )
            ranks.add(r)
    obligations: List[ObligationEntry] = []
    levels = sorted(ranks)
    non_integer = [r for r in levels if r.denominator != 1]
    if non_integer:
        return _reject(node, path, SIDE, "ranking must take integer values on the domain")
    for r in levels:
        n = int(r)
        rej, obs = _semantic_triple(
            node, ctx, path,
            Atom(And(And(pred, cond), Cmp("=", variant, Lit(Fraction(n)))), Lit(Fraction(1))),
            body,
            BoxTotal(And(pred, Cmp("<", variant, Lit(Fraction(n))))),
            f"ranking decrease at level {n}",
        )
        obligations += obs
        if rej:
            return rej
    return _accept(node, path, obligations)


def _check_qinv(node, ctx, path, demonic: bool):
    cond, body = _while_parts(node.prog)
    if cond is None:
        return _reject(node, path, SHAPE, "program must be a guarded while loop")
    pred = _side_pred(node)
    if pred is None:
        return _reject(node, path, SHAPE, "quasi-invariant rule needs a predicate")
    if not _aeq(node.pre, Atom(pred, Lit(Fraction(1)))):
        return _reject(node, path, SHAPE, "precondition must assert the quasi-invariant")
    want_post = AlwaysDiv() if demonic else SometimesDiv()
    if not _aeq(node.post, want_post):
        return _reject(node, path, SHAPE, "postcondition must be the divergence modality")
    verdict = pred_implies(pred, cond, ctx.states())
    if verdict is False:
        return _reject(node, path, SIDE, "quasi-invariant does not entail the loop guard")
    obligations: List[ObligationEntry] = []
    if verdict is None:
        obligations.append(ObligationEntry(path, "guard entailment undecided", ctx.ncheck))
    post = Box(pred) if demonic else Diamond(pred)
    rej, obs = _semantic_triple(
        node, ctx, path, Atom(pred, Lit(Fraction(1))), body, post,
        "quasi-invariant preservation",
    )
    obligations += obs
    if rej:
        return rej
    return _accept(node, path, obligations)


def _check_qinv_angel(node, ctx, path):
    return _check_qinv(node, ctx, path, demonic=False)


def _check_qinv_demon(node, ctx, path):
    return _check_qinv(node, ctx, path, demonic=True)


def _check_seq_modal(node, ctx, path, modal_ctor):
    prog = desugar(node.prog)
    if not isinstance(prog, Seq):
        return _reject(node, path, SHAPE, "program must be a sequence")
    if err := _expect_premises(node, 2):
        return _reject(node, path, SHAPE, err)
    p1, p2 = node.premises
    if not (_prog_equal(p1.prog, prog.first) and _prog_equal(p2.prog, prog.second)):
        return _reject(node, path, SHAPE, "premise programs do not compose")
    mid_post = simplify(p1.post)
    mid_pre = simplify(p2.pre)
    if not isinstance(mid_post, modal_ctor) or not isinstance(mid_pre, Atom):
        return _reject(node, path, SHAPE, "intermediate assertion shapes mismatch")
    if mid_post.pred != mid_pre.pred or asst._ground_weight(mid_pre.weight) != Fraction(1):
        return _reject(node, path, SHAPE, "intermediate predicate mismatch")
    if not _aeq(node.pre, p1.pre):
        return _reject(node, path, SHAPE, "precondition mismatch")
    post = simplify(p2.post)
    if not isinstance(post, modal_ctor) or not _aeq(node.post, post):
        return _reject(node, path, SHAPE, "postcondition mismatch")
    return _accept(node, path)


def _check_seq_total_hoare(node, ctx, path):
    return _check_seq_modal(node, ctx, path, BoxTotal)


def _check_seq_lisbon(node, ctx, path):
    return _check_seq_modal(node, ctx, path, Diamond)


def _check_if_modal(node, ctx, path, modal_ctor):
    prog = node.prog
    if not isinstance(prog, If):
        return _reject(node, path, SHAPE, "program must be an if statement")
    if err := _expect_premises(node, 2):
        return _reject(node, path, SHAPE, err)
    p1, p2 = node.premises
    pre = simplify(node.pre)
    if not isinstance(pre, Atom):
        return _reject(node, path, SHAPE, "precondition must be a predicate assertion")
    pred = pre.pred
    if not (_prog_equal(p1.prog, prog.then) and _prog_equal(p2.prog, prog.orelse)):
        return _reject(node, path, SHAPE, "premise programs do not match the branches")
    want1 = Atom(And(pred, prog.cond), Lit(Fraction(1)))
    want2 = Atom(And(pred, negate(prog.cond)), Lit(Fraction(1)))
    if not (_aeq(p1.pre, want1) and _aeq(p2.pre, want2)):
        return _reject(node, path, SHAPE, "premise preconditions must split on the guard")
    post = simplify(node.post)
    if not isinstance(post, modal_ctor):
        return _reject(node, path, SHAPE, "postcondition must be modal")
    if not (_aeq(p1.post, post) and _aeq(p2.post, post)):
        return _reject(node, path, SHAPE, "premise postconditions must match")
    return _accept(node, path)


def _check_if_hoare(node, ctx, path):
    return _check_if_modal(node, ctx, path, BoxTotal)


def _check_if_lisbon(node, ctx, path):
    return _check_if_modal(node, ctx, path, Diamond)


def _check_assign(node, ctx, path):
    prog = desugar(node.prog)
    if not isinstance(prog, (Assign, NondetFlag)):
        return _reject(node, path, SHAPE, "program must be an atomic action")
    if err := _expect_premises(node, 0):
        return _reject(node, path, SHAPE, err)
    verdict = check_triple(
        node.pre, prog, node.post, ctx.semiring, ctx.domain, ctx.cfg
    )
    if verdict.kind == "invalid":
        m, r = verdict.counterexample
        return _reject(node, path, PREMISE, f"action triple fails: from {m} got {r.collected}")
    if verdict.kind == "unknown":
        return _accept(
            node, path,
            [ObligationEntry(path, f"action triple: {verdict.note}", ctx.ncheck)],
        )
    return _accept(node, path)


_HANDLERS = {
    "False": _check_false,
    "True": _check_true,
    "Div": _check_div,
    "DivStar": _check_divstar,
    "Skip": _check_skip,
    "Scale": _check_scale,
    "Disj": _check_disj,
    "Conj": _check_conj,
    "Choice": _check_choice,
    "Exists": _check_exists,
    "Consequence": _check_consequence,
    "Seq": _check_seq,
    "Plus": _check_plus,
    "Assume": _check_assume,
    "Iter": _check_iter,
    "While": _check_while,
    "If": _check_if,
    "Variant": _check_variant,
    "Invariant": _check_invariant,
    "HoareVariant": _check_hoare_variant,
    "QInvAngel": _check_qinv_angel,
    "QInvDemon": _check_qinv_demon,
    "SeqTotalHoare": _check_seq_total_hoare,
    "SeqLisbon": _check_seq_lisbon,
    "IfHoare": _check_if_hoare,
    "IfLisbon": _check_if_lisbon,
    "Assign": _check_assign,
}


# ---------------------------------------------------------------------------
# Derived-rule elaboration (consistency oracle against the core rules)


def elaborate_derived(node: ProofNode, ctx: CheckContext) -> Optional[ProofNode]:
    """Expand a derived-rule node into a core-rule derivation.

    Used as a consistency oracle: checking the expansion must never flip
    an accepted derived node into a rejected one or vice versa (extra
    obligations are permitted; the expansions lean on richer implication
    and limit reasoning). Returns None when the node is not expandable.
    """
    if node.rule == "While":
        return _elab_while(node)
    if node.rule == "If":
        return _elab_if(node)
    if node.rule == "DivStar":
        return _elab_divstar(node, ctx)
    if node.rule == "Variant":
        return _elab_variant(node)
    if node.rule in ("QInvAngel", "QInvDemon"):
        return _elab_qinv(node, ctx, demonic=node.rule == "QInvDemon")
    if node.rule == "Invariant":
        return _elab_invariant(node, ctx)
    return None


def _elab_while(node: ProofNode) -> Optional[ProofNode]:
    cond, body = _while_parts(node.prog)
    if cond is None:
        return None
    phi, psi, zeta = (node.families.get(k) for k in ("phi", "psi", "zeta"))
    if not (phi and psi and zeta):
        return None
    combined = _combine_schemas([phi, psi])
    witnesses: Dict[str, List[Dict[str, object]]] = {}
    for key in set(phi.witnesses) | set(psi.witnesses):
        witnesses[key] = list(phi.witnesses.get(key, [])) + list(psi.witnesses.get(key, []))
    combined.witnesses = witnesses
    return ProofNode(
        rule="Iter",
        pre=node.pre,
        prog=Iter(body, BoolGuard(cond), BoolGuard(negate(cond))),
        post=node.post,
        families={"phi": combined, "psi": psi, "zeta": zeta},
        limits=dict(node.limits),
    )


def _elab_if(node: ProofNode) -> Optional[ProofNode]:
    prog = node.prog
    if not isinstance(prog, If) or len(node.premises) != 2:
        return None
    p1, p2 = node.premises
    phi1, phi2 = p1.pre, p2.pre
    b = prog.cond

    def assume_node(pre: Assertion, guard, post: Assertion) -> ProofNode:
        return ProofNode("Assume", pre, Assume(BoolGuard(guard)), post)

    def filter_choice(guard, kept_pre: Assertion) -> ProofNode:
        """<phi1 ++ phi2> assume guard <the surviving branch assertion>."""
        legs = []
        for phi in (phi1, phi2):
            surviving = phi if phi is kept_pre else EMPTY_ATOM
            legs.append(assume_node(phi, guard, simplify(surviving)))
        return ProofNode(
            "Choice",
            OPlus((phi1, phi2)),
            Assume(BoolGuard(guard)),
            simplify(OPlus(tuple(leg.post for leg in legs))),
            premises=legs,
        )

    branch1 = ProofNode(
        "Seq",
        OPlus((phi1, phi2)),
        Seq(Assume(BoolGuard(b)), prog.then),
        p1.post,
        premises=[filter_choice(b, phi1), p1],
    )
    branch2 = ProofNode(
        "Seq",
        OPlus((phi1, phi2)),
        Seq(Assume(BoolGuard(negate(b))), prog.orelse),
        p2.post,
        premises=[filter_choice(negate(b), phi2), p2],
    )
    return ProofNode(
        "Plus",
        node.pre,
        Choice(
            Seq(Assume(BoolGuard(b)), prog.then),
            Seq(Assume(BoolGuard(negate(b))), prog.orelse),
        ),
        node.post,
        premises=[branch1, branch2],
    )


def _elab_divstar(node: ProofNode, ctx: CheckContext) -> Optional[ProofNode]:
    pre = simplify(node.pre)
    if isinstance(pre, DivAtom):
        return ProofNode("Div", pre, node.prog, pre)
    if isinstance(pre, AlwaysDiv) and ctx.semiring.name == "bool":
        choices = (Fraction(0), Fraction(1))
        body = DivAtom(Var("u"))
        quantified = ExistsWeight("u", choices, body)
        premises = [
            ProofNode("Div", DivAtom(Lit(w)), node.prog, DivAtom(Lit(w)))
            for w in choices
        ]
        inner = ProofNode("Exists", quantified, node.prog, quantified, premises=premises)
        return ProofNode(
            "Consequence", node.pre, node.prog, node.post, premises=[inner]
        )
    return None


def _elab_variant(node: ProofNode) -> Optional[ProofNode]:
    cond, body = _while_parts(node.prog)
    phi = node.families.get("phi")
    bound = node.side.get("bound")
    if cond is None or phi is None or bound is None or phi.general is None:
        return None
    bound = int(bound)
    var = node.side.get("var", "N")
    empty = EMPTY_ATOM
    whiles = []
    for cap in range(bound + 1):
        phi_prime = AssertionSchema(index=phi.index)
        psi_prime = AssertionSchema(index=phi.index)
        zeta_prime = AssertionSchema(index=phi.index)
        for n in range(cap):
            phi_prime.cases[n] = phi.at(cap - n)
        phi_prime.general = empty
        phi_prime.general_from = cap
        for n in range(cap):
            psi_prime.cases[n] = empty
        psi_prime.cases[cap] = phi.at(0)
        psi_prime.general = empty
        psi_prime.general_from = cap + 1
        zeta_prime.general = empty
        zeta_prime.general_from = 0
        whiles.append(
            ProofNode(
                "While",
                simplify(OPlus((phi_prime.at(0), psi_prime.at(0), zeta_prime.at(0)))),
                node.prog,
                simplify(OPlus((phi.at(0), empty))),
                families={"phi": phi_prime, "psi": psi_prime, "zeta": zeta_prime},
                limits={"converge": phi.at(0), "diverge": empty},
            )
        )
    template = _swap_index(phi.general, phi.index, var)
    quantified_pre = ExistsIdx(var, 0, bound, template)
    exists = ProofNode(
        "Exists",
        quantified_pre,
        node.prog,
        ExistsIdx(var, 0, bound, phi.at(0)),
        premises=whiles,
    )
    return ProofNode("Consequence", node.pre, node.prog, node.post, premises=[exists])


def _elab_qinv(node: ProofNode, ctx: CheckContext, demonic: bool) -> Optional[ProofNode]:
    cond, body = _while_parts(node.prog)
    pred = node.side.get("pred")
    if cond is None or pred is None or ctx.semiring.name != "bool":
        return None
    one = Lit(Fraction(1))
    if demonic:
        phi_t = BoxTotal(pred)
        zeta_inf: Assertion = AlwaysDiv()
        psi_inf: Assertion = EMPTY_ATOM
        psi_t: Assertion = EMPTY_ATOM
    else:
        phi_t = OPlus((Atom(pred, one), BoxTotal(cond)))
        zeta_inf = DivAtom(one)
        psi_inf = Top()
        psi_t = BoxTotal(negate(cond))
    phi = AssertionSchema(index="n", general=phi_t, general_from=0)
    psi = AssertionSchema(index="n", general=psi_t, general_from=0)
    zeta = AssertionSchema(index="n", general=AlwaysDiv(), general_from=0)
    inner = ProofNode(
        "While",
        simplify(OPlus((phi_t, psi_t, AlwaysDiv()))),
        node.prog,
        simplify(OPlus((psi_inf, zeta_inf))),
        families={"phi": phi, "psi": psi, "zeta": zeta},
        limits={"converge": psi_inf, "diverge": zeta_inf},
    )
    return ProofNode("Consequence", node.pre, node.prog, node.post, premises=[inner])


def _elab_invariant(node: ProofNode, ctx: CheckContext) -> Optional[ProofNode]:
    cond, body = _while_parts(node.prog)
    pred = node.side.get("pred")
    if cond is None or pred is None:
        return None
    phi_t = BoxTotal(And(pred, cond))
    psi_t = BoxTotal(And(pred, negate(cond)))
    phi = AssertionSchema(index="n", general=phi_t, general_from=0)
    psi = AssertionSchema(index="n", general=psi_t, general_from=0)
    zeta = AssertionSchema(index="n", general=AlwaysDiv(), general_from=0)
    inner = ProofNode(
        "While",
        simplify(OPlus((phi_t, psi_t, AlwaysDiv()))),
        node.prog,
        simplify(OPlus((psi_t, AlwaysDiv()))),
        families={"phi": phi, "psi": psi, "zeta": zeta},
        limits={"converge": psi_t, "diverge": AlwaysDiv()},
    )
    return ProofNode("Consequence", node.pre, node.prog, node.post, premises=[inner])


def check_elaborated(root: ProofNode, ctx: CheckContext) -> Optional[CheckReport]:
    """Check the derived-rule expansion of a node, when one exists."""
    expansion = elaborate_derived(root, ctx)
    if expansion is None:
        return None
    return check_proof(expansion, ctx)


# ---------------------------------------------------------------------------
# Proof files (JSON)


def _parse_pred_text(text: str):
    ts = TokenStream(tokenize(text))
    pred = parse_bool(ts, allow_div=True)
    tok = ts.peek()
    if tok.kind != "eof":
        raise ProofError(f"trailing input in predicate: {tok.text!r}")
    return pred


def _parse_arith_text(text: str):
    ts = TokenStream(tokenize(text))
    e = parse_weight_expr(ts)
    tok = ts.peek()
    if tok.kind != "eof":
        raise ProofError(f"trailing input in expression: {tok.text!r}")
    return e


def _schema_from_dict(data: dict) -> AssertionSchema:
    schema = AssertionSchema(index=data.get("index", "n"))
    for key, text in data.get("cases", {}).items():
        schema.cases[int(key)] = parse_assertion(text)
    general = data.get("general")
    if general is not None:
        schema.general = parse_assertion(general["assertion"])
        schema.general_from = int(general.get("from", 0))
    for key, decls in data.get("witnesses", {}).items():
        schema.witnesses[key] = [
            {var: _parse_arith_text(expr) for var, expr in decl.items()}
            for decl in decls
        ]
    return schema


def _node_from_dict(data: dict, base_prog: Optional[Command] = None) -> ProofNode:
    rule = data["rule"]
    prog_field = data.get("prog")
    if isinstance(prog_field, dict) and "file" in prog_field:
        raise ProofError("program file references are resolved by the caller")
    if prog_field is None:
        if base_prog is None:
            raise ProofError(f"node with rule {rule} lacks a program")
        prog = base_prog
    else:
        prog, _ = parse_program(prog_field)
    node = ProofNode(
        rule=rule,
        pre=parse_assertion(data["pre"]),
        prog=prog,
        post=parse_assertion(data["post"]),
    )
    for child in data.get("premises", []):
        node.premises.append(_node_from_dict(child))
    for name, schema in data.get("families", {}).items():
        node.families[name] = _schema_from_dict(schema)
    for name, text in data.get("limits", {}).items():
        node.limits[name] = parse_assertion(text)
    side = data.get("side", {})
    parsed_side: Dict[str, object] = {}
    for key, value in side.items():
        if key == "pred":
            parsed_side[key] = _parse_pred_text(value)
        elif key in ("variant",):
            parsed_side[key] = _parse_arith_text(value)
        elif key == "weight":
            parsed_side[key] = _parse_arith_text(value)
        else:
            parsed_side[key] = value
    node.side = parsed_side
    return node


@dataclass
class ProofFile:
    root: ProofNode
    semiring: Semiring
    domain: Optional[FiniteDomain]
    ncheck: int
    name: str = ""

    def context(self, cfg: Optional[EvalConfig] = None, ncheck: Optional[int] = None) -> CheckContext:
        return CheckContext(
            semiring=self.semiring,
            domain=self.domain,
            cfg=cfg or EvalConfig(),
            ncheck=ncheck if ncheck is not None else self.ncheck,
        )


def proof_from_dict(data: dict) -> ProofFile:
    semiring = by_name(data.get("semiring", "bool"))
    domain = None
    if "domain" in data:
        if isinstance(data["domain"], str):
            domain = FiniteDomain.parse(data["domain"])
        else:
            domain = FiniteDomain(
                {k: [Fraction(v) for v in vs] for k, vs in data["domain"].items()}
            )
    root = _node_from_dict(data["root"])
    return ProofFile(
        root=root,
        semiring=semiring,
        domain=domain,
        ncheck=int(data.get("ncheck", 16)),
        name=data.get("name", ""),
    )


def load_proof(path: str) -> ProofFile:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    pf = proof_from_dict(data)
    if not pf.name:
        pf.name = path
    return pf
