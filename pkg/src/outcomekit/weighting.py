"""Finite-support weightings over program states plus a distinguished
divergence outcome, with the monad structure used by the semantics.

A weighting maps outcomes to semiring weights; absent keys mean weight
zero, so the stored key set is exactly the support. Divergence weight is
special in one way only: Kleisli extension carries it through unchanged
instead of feeding it to the extended function.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from .lang import BoolExpr, ProgramState, eval_bool
from .semiring import OutcomeKitError, Semiring, Undefined, Weight, format_weight


class MassOverflow(OutcomeKitError):
    """A pointwise or total weight sum left the carrier (partial addition)."""

    def __init__(self, message: str, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class Divergence:
    """The nontermination outcome (a singleton)."""

    _instance = None

    def __new__(cls) -> "Divergence":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DIV"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Divergence)

    def __hash__(self) -> int:
        return hash("outcomekit.Divergence")

    def __copy__(self) -> "Divergence":
        return self

    def __deepcopy__(self, memo) -> "Divergence":
        return self


DIV = Divergence()

Outcome = Union[ProgramState, Divergence]


def outcome_sort_key(o: Outcome):
    # States first, in canonical order; divergence last.
    if isinstance(o, Divergence):
        return (1, ())
    return (0, o.items)


class Weighting:
    """Immutable finite-support map from outcomes to nonzero weights."""

    __slots__ = ("semiring", "entries", "_mass")

    def __init__(self, semiring: Semiring, entries: Dict[Outcome, Weight]):
        pruned = {o: w for o, w in entries.items() if w != semiring.zero}
        for o, w in pruned.items():
            semiring.check(w)
        self.semiring = semiring
        self.entries: Dict[Outcome, Weight] = pruned
        self._mass: Optional[Weight] = None
        self.mass()  # a weighting is only valid when its mass is defined

    # -- construction -------------------------------------------------------

    @staticmethod
    def empty(semiring: Semiring) -> "Weighting":
        return Weighting(semiring, {})

    @staticmethod
    def of(semiring: Semiring, pairs: Iterable[Tuple[Outcome, Weight]]) -> "Weighting":
        acc: Dict[Outcome, Weight] = {}
        for o, w in pairs:
            if o in acc:
                try:
                    acc[o] = semiring.add(acc[o], w)
                except Undefined as exc:
                    raise MassOverflow(f"weight sum undefined at outcome {o}", o) from exc
            else:
                acc[o] = w
        return Weighting(semiring, acc)

    # -- queries -------------------------------------------------------------

    def weight(self, o: Outcome) -> Weight:
        return self.entries.get(o, self.semiring.zero)

    def div_weight(self) -> Weight:
        return self.entries.get(DIV, self.semiring.zero)

    def support(self) -> List[Outcome]:
        return sorted(self.entries, key=outcome_sort_key)

    def states(self) -> List[ProgramState]:
        return [o for o in self.support() if not isinstance(o, Divergence)]

    def mass(self) -> Weight:
        if self._mass is None:
            acc = self.semiring.zero
            for o, w in self.entries.items():
                try:
                    acc = self.semiring.add(acc, w)
                except Undefined as exc:
                    raise MassOverflow("total mass undefined", o) from exc
            self._mass = acc
        return self._mass

    def state_part(self) -> "Weighting":
        return Weighting(
            self.semiring,
            {o: w for o, w in self.entries.items() if not isinstance(o, Divergence)},
        )

    def is_empty(self) -> bool:
        return not self.entries

    # -- structure -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Weighting)
            and self.semiring == other.semiring
            and self.entries == other.entries
        )

    def __hash__(self) -> int:
        return hash((self.semiring.name, tuple(sorted(
            ((outcome_sort_key(o), w) for o, w in self.entries.items())
        ))))

    def __repr__(self) -> str:
        return format_weighting(self)


def format_weighting(m: Weighting) -> str:
    if m.is_empty():
        return "{ }"
    parts = [f"{o}: {format_weight(m.entries[o])}" for o in m.support()]
    return "{ " + ", ".join(parts) + " }"


# ---------------------------------------------------------------------------
# Operations


def unit(semiring: Semiring, o: Outcome) -> Weighting:
    return Weighting(semiring, {o: semiring.one})


def wsum(m1: Weighting, m2: Weighting) -> Weighting:
    if m1.semiring != m2.semiring:
        raise OutcomeKitError("weightings over different semirings")
    acc = dict(m1.entries)
    sr = m1.semiring
    for o, w in m2.entries.items():
        if o in acc:
            try:
                acc[o] = sr.add(acc[o], w)
            except Undefined as exc:
                raise MassOverflow(f"weight sum undefined at outcome {o}", o) from exc
        else:
            acc[o] = w
    return Weighting(sr, acc)


def scale_left(u: Weight, m: Weighting) -> Weighting:
    sr = m.semiring
    sr.check(u)
    return Weighting(sr, {o: sr.mul(u, w) for o, w in m.entries.items()})


def scale_right(m: Weighting, u: Weight) -> Weighting:
    sr = m.semiring
    sr.check(u)
    return Weighting(sr, {o: sr.mul(w, u) for o, w in m.entries.items()})


def mass(m: Weighting) -> Weight:
    return m.mass()


def kleisli_extend(f: Callable[[ProgramState], Weighting], m: Weighting) -> Weighting:
    """Extend a state-to-weighting function to weightings.

    State entries are pushed through ``f`` scaled by their weights;
    divergence weight is carried through unchanged.
    """
    sr = m.semiring
    acc: Dict[Outcome, Weight] = {}

    def accumulate(o: Outcome, w: Weight) -> None:
        if w == sr.zero:
            return
        if o in acc:
            try:
                acc[o] = sr.add(acc[o], w)
            except Undefined as exc:
                raise MassOverflow(f"weight sum undefined at outcome {o}", o) from exc
        else:
            acc[o] = w

    for o, w in m.entries.items():
        if isinstance(o, Divergence):
            accumulate(DIV, w)
            continue
        image = f(o)
        if image.semiring != sr:
            raise OutcomeKitError("weightings over different semirings")
        for o2, w2 in image.entries.items():
            accumulate(o2, sr.mul(w, w2))
    return Weighting(sr, acc)


def project(b: BoolExpr, m: Weighting) -> Weighting:
    """Keep the state entries satisfying ``b``; divergence is dropped."""
    kept = {
        o: w
        for o, w in m.entries.items()
        if not isinstance(o, Divergence) and eval_bool(b, o)
    }
    return Weighting(m.semiring, kept)


def project_states(m: Weighting, keep: Callable[[ProgramState], bool]) -> Weighting:
    kept = {
        o: w
        for o, w in m.entries.items()
        if not isinstance(o, Divergence) and keep(o)
    }
    return Weighting(m.semiring, kept)


def fusion_leq(m1: Weighting, m2: Weighting) -> bool:
    """The approximation order: state weights compared upward, divergence
    weight compared downward."""
    if m1.semiring != m2.semiring:
        raise OutcomeKitError("weightings over different semirings")
    sr = m1.semiring
    outcomes = set(m1.entries) | set(m2.entries)
    for o in outcomes:
        a = m1.weight(o)
        b = m2.weight(o)
        if isinstance(o, Divergence):
            if not sr.leq(b, a):
                return False
        elif not sr.leq(a, b):
            return False
    return True


def bottom(semiring: Semiring) -> Weighting:
    """Least element of the fusion order: all mass on divergence."""
    if semiring.top is None:
        raise OutcomeKitError(f"semiring {semiring.name} has no top element")
    return Weighting(semiring, {DIV: semiring.top})


# ---------------------------------------------------------------------------
# Serialization: "{ (x=1,y=2): 1/2, DIV: 1/2 }"


def parse_weighting(text: str, semiring: Semiring) -> Weighting:
    from fractions import Fraction

    from .semiring import parse_weight

    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise OutcomeKitError(f"bad weighting literal: {text!r}")
    inner = text[1:-1].strip()
    entries: Dict[Outcome, Weight] = {}
    if not inner:
        return Weighting(semiring, entries)
    depth = 0
    items: List[str] = []
    current = ""
    for ch in inner:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            items.append(current)
            current = ""
        else:
            current += ch
    items.append(current)
    for item in items:
        key_text, _, w_text = item.rpartition(":")
        key_text = key_text.strip()
        w = parse_weight(w_text.strip())
        if key_text == "DIV":
            entries[DIV] = w
            continue
        if not (key_text.startswith("(") and key_text.endswith(")")):
            raise OutcomeKitError(f"bad outcome literal: {key_text!r}")
        bindings: Dict[str, Fraction] = {}
        body = key_text[1:-1].strip()
        if body:
            for piece in body.split(","):
                name, _, val = piece.partition("=")
                bindings[name.strip()] = Fraction(val.strip())
        entries[ProgramState.make(bindings)] = w
    return Weighting(semiring, entries)
