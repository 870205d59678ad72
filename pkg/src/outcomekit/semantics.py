"""Denotational evaluation of commands on weightings.

Loop-free commands evaluate exactly. Loops are evaluated by unrolling:
each round filters the still-iterating mass through the exit guard into a
``collected`` weighting and pushes the rest through the body. The engine
reports exact results when the residual empties (stabilization) or repeats
exactly (cycle detection); otherwise it reports sound brackets, with the
unresolved residual mass tracked as a single ``slack`` bound.

Exactness claims are never guessed: a nonzero slack means the true limit
weighting is only known to lie between the collected weighting and the
collected weighting widened by slack.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from . import lang
from .lang import (
    Assign,
    Assume,
    BoolGuard,
    Choice,
    Command,
    ConstGuard,
    EvalError,
    Guard,
    Iter,
    NondetFlag,
    ProgramState,
    Seq,
    Skip,
    desugar,
    eval_arith,
    eval_guard,
    is_desugared,
)
from .semiring import (
    Exact,
    Interval,
    OutcomeKitError,
    Scheme,
    Semiring,
    Weight,
    format_weight,
)
from .weighting import (
    DIV,
    Divergence,
    MassOverflow,
    Outcome,
    Weighting,
    bottom,
    kleisli_extend,
    scale_left,
    unit,
    wsum,
)


@dataclass(frozen=True)
class EvalConfig:
    """Finite-approximation knobs for loop evaluation.

    ``unroll_limit`` bounds the number of unroll rounds per loop,
    ``window`` the lookback for residual cycle detection, and
    ``support_limit`` the residual support size (loops whose reachable
    configurations branch without bound are cut off soundly).
    ``report_tolerance`` affects rendering only, never the algebra.
    """

    unroll_limit: int = 64
    window: int = 4
    support_limit: int = 8192
    report_tolerance: Fraction = Fraction(0)

    def __post_init__(self):
        if self.unroll_limit < 1 or self.window < 1:
            raise ValueError("unroll_limit and window must be at least 1")
        if self.report_tolerance < 0:
            raise ValueError("tolerance must be non-negative")


@dataclass(frozen=True)
class Stabilized:
    rounds: int = 0

    def __str__(self) -> str:
        return f"stabilized (n={self.rounds})"


@dataclass(frozen=True)
class CycleDetected:
    period: int
    rounds: int = 0

    def __str__(self) -> str:
        return f"cycle detected (period={self.period}, n={self.rounds})"


@dataclass(frozen=True)
class Cutoff:
    rounds: int
    reason: str = "unroll-limit"

    def __str__(self) -> str:
        return f"cutoff (n={self.rounds}, {self.reason})"


Status = Union[Stabilized, CycleDetected, Cutoff]


def _status_rank(s: Status) -> int:
    if isinstance(s, Stabilized):
        return 0
    if isinstance(s, CycleDetected):
        return 1
    return 2


def merge_status(a: Status, b: Status) -> Status:
    return a if _status_rank(a) >= _status_rank(b) else b


@dataclass
class EvalResult:
    """Result of evaluating a command on a weighting.

    ``collected`` holds the exactly accrued weights (terminating states
    plus certified divergence weight). ``slack`` bounds the mass whose
    eventual outcome is unresolved; zero slack means the result is exact.
    ``residual`` is diagnostic: the still-iterating states of the most
    recent loop, kept for inspection and reporting.
    """

    collected: Weighting
    slack: Weight
    status: Status
    residual: Weighting

    @property
    def semiring(self) -> Semiring:
        return self.collected.semiring

    def exact(self) -> bool:
        return self.slack == self.semiring.zero

    def weighting(self) -> Weighting:
        """The exact result; raises when unresolved mass remains."""
        if not self.exact():
            raise OutcomeKitError("result is not exact (unresolved mass remains)")
        return self.collected

    def bracket(self, o: Outcome) -> Union[Exact, Interval]:
        lo = self.collected.weight(o)
        if self.exact():
            return Exact(lo)
        return Interval(lo, self.semiring.add_saturating(lo, self.slack))

    def div_bracket(self) -> Union[Exact, Interval]:
        return self.bracket(DIV)


def _exact_result(m: Weighting) -> EvalResult:
    return EvalResult(m, m.semiring.zero, Stabilized(), Weighting.empty(m.semiring))


# ---------------------------------------------------------------------------
# Non-loop command semantics as state-to-weighting functions


def action_weighting(cmd: Command, sigma: ProgramState, sr: Semiring) -> Weighting:
    if isinstance(cmd, Assign):
        return unit(sr, sigma.set(cmd.var, eval_arith(cmd.expr, sigma)))
    if isinstance(cmd, NondetFlag):
        if sr.name != "bool":
            raise EvalError("nondet_flag is only available in the bool semiring")
        return Weighting.of(
            sr,
            [
                (sigma.set(cmd.var, Fraction(0)), sr.one),
                (sigma.set(cmd.var, Fraction(1)), sr.one),
            ],
        )
    raise EvalError(f"not an atomic action: {cmd!r}")


def eval_command(cmd: Command, m: Weighting, cfg: Optional[EvalConfig] = None) -> EvalResult:
    """Evaluate a command on an input weighting.

    Sugar is desugared on entry. Divergence weight in the input is carried
    through untouched.
    """
    cfg = cfg or EvalConfig()
    if not is_desugared(cmd):
        cmd = desugar(cmd)
    return _eval(cmd, m, cfg)


def _apply_assume(guard: Guard, m: Weighting, sr: Semiring) -> Weighting:
    entries: Dict[Outcome, Weight] = {}
    for o, w in m.entries.items():
        if isinstance(o, Divergence):
            entries[DIV] = w
        else:
            entries[o] = sr.mul(w, eval_guard(guard, o, sr))
    return Weighting(sr, entries)


def _apply_assign(cmd: Assign, m: Weighting, sr: Semiring) -> Weighting:
    entries: Dict[Outcome, Weight] = {}
    for o, w in m.entries.items():
        if isinstance(o, Divergence):
            target = DIV
        else:
            target = o.set(cmd.var, eval_arith(cmd.expr, o))
        if target in entries:
            try:
                entries[target] = sr.add(entries[target], w)
            except Exception as exc:
                raise MassOverflow(
                    f"weight sum undefined at outcome {target}", target
                ) from exc
        else:
            entries[target] = w
    return Weighting(sr, entries)


def _eval(cmd: Command, m: Weighting, cfg: EvalConfig) -> EvalResult:
    sr = m.semiring
    if m.is_empty():
        return _exact_result(m)
    if isinstance(cmd, Skip):
        return _exact_result(m)
    if isinstance(cmd, Assume):
        return _exact_result(_apply_assume(cmd.guard, m, sr))
    if isinstance(cmd, Assign):
        return _exact_result(_apply_assign(cmd, m, sr))
    if isinstance(cmd, NondetFlag):
        out = kleisli_extend(lambda s: action_weighting(cmd, s, sr), m)
        return _exact_result(out)
    if isinstance(cmd, Seq):
        r1 = _eval(cmd.first, m, cfg)
        r2 = _eval(cmd.second, r1.collected, cfg)
        residual = r2.residual if not r2.residual.is_empty() else r1.residual
        return EvalResult(
            r2.collected,
            sr.add_saturating(r1.slack, r2.slack),
            merge_status(r1.status, r2.status),
            residual,
        )
    if isinstance(cmd, Choice):
        # Kleisli extension is additive in the function only on the state
        # part; divergence weight must not be duplicated across branches.
        states = m.state_part()
        carried = sr.mul(m.div_weight(), sr.one)
        r1 = _eval(cmd.left, states, cfg)
        r2 = _eval(cmd.right, states, cfg)
        combined = wsum(r1.collected, r2.collected)
        if carried != sr.zero:
            combined = wsum(combined, scale_left(carried, unit(sr, DIV)))
        residual = r1.residual
        if residual.is_empty():
            residual = r2.residual
        return EvalResult(
            combined,
            sr.add_saturating(r1.slack, r2.slack),
            merge_status(r1.status, r2.status),
            residual,
        )
    if isinstance(cmd, Iter):
        return unroll_loop(cmd.body, cmd.enter, cmd.exit, m, cfg)
    raise EvalError(f"cannot evaluate command: {cmd!r}")


# ---------------------------------------------------------------------------
# Loop unrolling


@dataclass
class LoopApprox:
    """State of the unrolling after ``n`` rounds.

    ``collected`` is the terminating mass accrued so far (states only),
    ``residual`` the still-iterating states, ``inner_div`` the divergence
    weight accrued inside the body (nested loops), and ``inner_slack`` any
    unresolved mass produced by non-exact body evaluations.
    """

    n: int
    collected: Weighting
    residual: Weighting
    inner_div: Weight
    inner_slack: Weight


def unroll_trace(
    body: Command,
    enter: Guard,
    exit_: Guard,
    m: Weighting,
    cfg: EvalConfig,
) -> Iterator[LoopApprox]:
    """Yield successive loop approximations, starting from round 0.

    The approximation at round ``n`` has collected the exit weights of
    rounds ``0..n-1``; its residual is the input to round ``n``.
    """
    sr = m.semiring
    if not is_desugared(body):
        body = desugar(body)
    residual = m.state_part()
    collected = Weighting.empty(sr)
    inner_div = sr.zero
    inner_slack = sr.zero
    step_cmd = Seq(Assume(enter), body)
    yield LoopApprox(0, collected, residual, inner_div, inner_slack)
    n = 0
    while True:
        n += 1
        exit_part = _apply_assume(exit_, residual, sr)
        collected = wsum(collected, exit_part)
        stepped = _eval(step_cmd, residual, cfg)
        inner_div = sr.add_saturating(inner_div, stepped.collected.div_weight())
        inner_slack = sr.add_saturating(inner_slack, stepped.slack)
        residual = stepped.collected.state_part()
        yield LoopApprox(n, collected, residual, inner_div, inner_slack)


def unroll_loop(
    body: Command,
    enter: Guard,
    exit_: Guard,
    m: Weighting,
    cfg: Optional[EvalConfig] = None,
) -> EvalResult:
    """Loop semantics by bounded unrolling with cycle detection.

    Terminating weight per state is exact when the residual empties or
    repeats exactly within the configured window with unchanged collected
    weights and inner divergence; the repeat makes the entire future
    periodic, so nothing new can ever be collected and the residual mass
    diverges. Otherwise the result carries the residual mass (scaled by
    top) as slack.
    """
    cfg = cfg or EvalConfig()
    sr = m.semiring
    if sr.top is None:
        raise EvalError(f"semiring {sr.name} has no top element; loops need one")
    carried = m.div_weight()
    history: List[LoopApprox] = []
    trace = unroll_trace(body, enter, exit_, m, cfg)
    final: Optional[EvalResult] = None
    for approx in trace:
        if approx.residual.is_empty():
            collected = _with_div(
                approx.collected, sr.add_saturating(approx.inner_div, carried)
            )
            final = EvalResult(
                collected,
                approx.inner_slack,
                Stabilized(approx.n),
                approx.residual,
            )
            break
        if approx.inner_slack == sr.zero:
            period = _find_cycle(history, approx, cfg.window)
            if period is not None:
                div_exact = sr.add_saturating(
                    approx.inner_div, sr.mul(approx.residual.mass(), sr.top)
                )
                collected = _with_div(
                    approx.collected, sr.add_saturating(div_exact, carried)
                )
                final = EvalResult(
                    collected,
                    sr.zero,
                    CycleDetected(period, approx.n),
                    approx.residual,
                )
                break
        history.append(approx)
        if len(approx.residual.entries) > cfg.support_limit:
            final = _cutoff_result(approx, carried, sr, "support-limit")
            break
        if approx.n >= cfg.unroll_limit:
            final = _cutoff_result(approx, carried, sr, "unroll-limit")
            break
    assert final is not None
    return final


def _with_div(m: Weighting, div: Weight) -> Weighting:
    if div == m.semiring.zero:
        return m
    return wsum(m, scale_left(div, unit(m.semiring, DIV)))


def _cutoff_result(
    approx: LoopApprox, carried: Weight, sr: Semiring, reason: str
) -> EvalResult:
    collected = _with_div(approx.collected, sr.add_saturating(approx.inner_div, carried))
    # Unresolved mass may later terminate anywhere or diverge; in the
    # indicative schemes divergence would arrive scaled by top.
    slack = sr.add_saturating(
        sr.mul(approx.residual.mass(), sr.top), approx.inner_slack
    )
    return EvalResult(collected, slack, Cutoff(approx.n, reason), approx.residual)


def _find_cycle(
    history: Sequence[LoopApprox], current: LoopApprox, window: int
) -> Optional[int]:
    for past in reversed(history[-window:]):
        if (
            past.residual == current.residual
            and past.collected == current.collected
            and past.inner_div == current.inner_div
        ):
            return current.n - past.n
    return None


# ---------------------------------------------------------------------------
# Characteristic-function chain (cross-check oracle)


def denote_exact(cmd: Command, sigma: ProgramState, cfg: EvalConfig, sr: Semiring) -> Weighting:
    r = eval_command(cmd, unit(sr, sigma), cfg)
    if not r.exact():
        raise OutcomeKitError(
            "oracle requires an exactly evaluable command (loop did not settle)"
        )
    return r.collected


def phi_step(
    f: Callable[[ProgramState], Weighting],
    sigma: ProgramState,
    body: Command,
    enter: Guard,
    exit_: Guard,
    sr: Semiring,
    cfg: Optional[EvalConfig] = None,
) -> Weighting:
    """One application of the loop's characteristic function to ``f``."""
    cfg = cfg or EvalConfig()
    e1 = eval_guard(enter, sigma, sr)
    e2 = eval_guard(exit_, sigma, sr)
    body_m = denote_exact(body, sigma, cfg, sr)
    entered = scale_left(e1, kleisli_extend(f, body_m))
    exited = scale_left(e2, unit(sr, sigma))
    return wsum(entered, exited)


def reachable_states(
    body: Command,
    enter: Guard,
    sigma: ProgramState,
    steps: int,
    sr: Semiring,
    cfg: EvalConfig,
    limit: int = 200000,
) -> List[ProgramState]:
    body = desugar(body)
    step_cmd = Seq(Assume(enter), body)
    seen = {sigma}
    frontier = [sigma]
    for _ in range(steps):
        next_frontier: List[ProgramState] = []
        for s in frontier:
            image = eval_command(step_cmd, unit(sr, s), cfg)
            if not image.exact():
                raise OutcomeKitError("oracle requires an exactly evaluable body")
            for o in image.collected.states():
                if o not in seen:
                    seen.add(o)
                    next_frontier.append(o)
                    if len(seen) > limit:
                        raise OutcomeKitError("reachable state set exceeds oracle limit")
        if not next_frontier:
            break
        frontier = next_frontier
    return sorted(seen)


def lfp_iterate(
    body: Command,
    enter: Guard,
    exit_: Guard,
    sigma: ProgramState,
    steps: int,
    sr: Semiring,
    cfg: Optional[EvalConfig] = None,
) -> List[Weighting]:
    """The Kleene chain of the loop's characteristic function at ``sigma``,
    from the fusion-order bottom, for ``0..steps`` applications.

    This is a deliberately direct implementation used as a cross-check
    oracle for :func:`unroll_loop`; it materializes the chain on the
    states reachable from ``sigma``.
    """
    cfg = cfg or EvalConfig()
    states = reachable_states(body, enter, sigma, steps, sr, cfg)
    bot = bottom(sr)
    f: Dict[ProgramState, Weighting] = {s: bot for s in states}
    chain = [bot]
    for _ in range(steps):
        g = {
            s: phi_step(lambda t: f.get(t, bot), s, body, enter, exit_, sr, cfg)
            for s in states
        }
        f = g
        chain.append(f[sigma])
    return chain


# ---------------------------------------------------------------------------
# Strongest postcondition as a semantic image


def spost(
    cmd: Command, pre_set: Iterable[Weighting], cfg: Optional[EvalConfig] = None
) -> List[EvalResult]:
    """Image of an explicit finite set of weightings under the command."""
    cfg = cfg or EvalConfig()
    return [eval_command(cmd, m, cfg) for m in pre_set]


# ---------------------------------------------------------------------------
# Conservative-scheme lint


def lint_program(cmd: Command, sr: Semiring) -> List[str]:
    """Flag bare weight-reducing assumes in the conservative scheme.

    Constant-weight assumes are mass-preserving only when paired with a
    complementary branch (the probabilistic-choice encoding); anything
    else breaks the fixed-mass discipline and is worth a warning.
    """
    warnings: List[str] = []
    if sr.scheme is not Scheme.CONSERVATIVE:
        return warnings
    cmd = desugar(cmd)

    def is_paired(c: Command) -> bool:
        if not isinstance(c, Choice):
            return False
        legs = [c.left, c.right]
        weights = []
        for leg in legs:
            head = leg.first if isinstance(leg, Seq) else leg
            if isinstance(head, Assume) and isinstance(head.guard, ConstGuard):
                weights.append(head.guard.weight)
        if len(weights) != 2:
            return False
        try:
            return sr.add(weights[0], weights[1]) == sr.top
        except Exception:
            return False

    def walk(c: Command, paired: bool) -> None:
        if isinstance(c, Assume) and isinstance(c.guard, ConstGuard):
            w = c.guard.weight
            if not paired and w not in (sr.zero, sr.one, sr.top):
                warnings.append(
                    f"assume {format_weight(w)} reduces mass outside a"
                    " complementary choice (conservative scheme)"
                )
        elif isinstance(c, Seq):
            walk(c.first, paired)
            walk(c.second, False)
        elif isinstance(c, Choice):
            branch_paired = is_paired(c)
            for leg in (c.left, c.right):
                if branch_paired and isinstance(leg, Seq):
                    walk(leg.first, True)
                    walk(leg.second, False)
                else:
                    walk(leg, False)
        elif isinstance(c, Iter):
            walk(c.body, False)
            for g in (c.enter, c.exit):
                pass  # loop guards may carry weights; they split mass with the exit

    walk(cmd, False)
    return warnings
