"""Weight algebra: semirings with partial addition, a natural order, and
adjoined infinities.

Three instances ship with the toolkit:

* ``bool``    -- nondeterministic weights {0, 1}; addition is disjunction.
* ``prob``    -- exact rational probabilities in [0, 1]; addition is partial
  (undefined above 1).
* ``nat-inf`` -- counting weights: naturals plus an absorbing infinity.

All finite weights are ``fractions.Fraction`` values; there is no floating
point anywhere in the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Union


class OutcomeKitError(Exception):
    pass


class Undefined(OutcomeKitError):
    """A partial semiring operation was applied outside its domain."""


class CarrierError(OutcomeKitError):
    """A weight does not belong to the active semiring's carrier."""


class Infinity:
    """The adjoined infinite weight (a singleton)."""

    _instance = None

    def __new__(cls) -> "Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Infinity)

    def __hash__(self) -> int:
        return hash("outcomekit.Infinity")

    def __copy__(self) -> "Infinity":
        return self

    def __deepcopy__(self, memo) -> "Infinity":
        return self


INF = Infinity()

Weight = Union[Fraction, Infinity]

ZERO = Fraction(0)
ONE = Fraction(1)


def is_inf(w: Weight) -> bool:
    return isinstance(w, Infinity)


def parse_weight(text: str) -> Weight:
    text = text.strip()
    if text == "inf":
        return INF
    value = Fraction(text)
    if value < 0:
        raise CarrierError(f"weights are non-negative, got {text}")
    return value


def format_weight(w: Weight) -> str:
    if is_inf(w):
        return "inf"
    return str(w)


class Scheme(Enum):
    CONSERVATIVE = "conservative"
    INDICATIVE = "indicative"


class Semiring:
    """Base class for weight semirings.

    Subclasses supply the carrier test and the add/mul/leq operations.
    ``add`` raises :class:`Undefined` when the sum falls outside the
    carrier (only possible when ``partial`` is true).
    """

    name: str
    zero: Weight = ZERO
    one: Weight = ONE
    top: Optional[Weight] = None
    scheme: Scheme
    partial: bool = False
    has_strong_infinity: bool = False

    def contains(self, w: Weight) -> bool:
        raise NotImplementedError

    def check(self, w: Weight) -> Weight:
        if not self.contains(w):
            raise CarrierError(f"{format_weight(w)} is not a {self.name} weight")
        return w

    def add(self, a: Weight, b: Weight) -> Weight:
        raise NotImplementedError

    def mul(self, a: Weight, b: Weight) -> Weight:
        raise NotImplementedError

    def leq(self, a: Weight, b: Weight) -> bool:
        raise NotImplementedError

    def add_saturating(self, a: Weight, b: Weight) -> Weight:
        """Addition that clamps to top instead of failing; used only for
        upper bounds of intervals, never inside the algebra proper."""
        try:
            return self.add(a, b)
        except Undefined:
            assert self.top is not None
            return self.top

    def __repr__(self) -> str:
        return f"<semiring {self.name}>"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Semiring) and other.name == self.name

    def __hash__(self) -> int:
        return hash(self.name)


class BooleanSemiring(Semiring):
    name = "bool"
    top = ONE
    scheme = Scheme.INDICATIVE
    # 1 is additively absorbing and multiplicatively absorbing on {1},
    # so it is a (degenerate) strong infinity.
    has_strong_infinity = True

    def contains(self, w: Weight) -> bool:
        return not is_inf(w) and w in (ZERO, ONE)

    def add(self, a: Weight, b: Weight) -> Weight:
        return ONE if (a == ONE or b == ONE) else ZERO

    def mul(self, a: Weight, b: Weight) -> Weight:
        return ONE if (a == ONE and b == ONE) else ZERO

    def leq(self, a: Weight, b: Weight) -> bool:
        return a == ZERO or b == ONE


class ProbabilitySemiring(Semiring):
    name = "prob"
    top = ONE
    scheme = Scheme.CONSERVATIVE
    partial = True

    def contains(self, w: Weight) -> bool:
        return not is_inf(w) and ZERO <= w <= ONE

    def add(self, a: Weight, b: Weight) -> Weight:
        c = a + b
        if c > ONE:
            raise Undefined(f"{a} + {b} exceeds 1")
        return c

    def mul(self, a: Weight, b: Weight) -> Weight:
        return a * b

    def leq(self, a: Weight, b: Weight) -> bool:
        return a <= b


class NaturalSemiring(Semiring):
    """Unbounded counting semiring. Not usable for program semantics on its
    own (no top element); it exists as input to :func:`adjoin_infinity`."""

    name = "nat"
    top = None
    scheme = Scheme.INDICATIVE

    def contains(self, w: Weight) -> bool:
        return not is_inf(w) and w.denominator == 1 and w >= 0

    def add(self, a: Weight, b: Weight) -> Weight:
        return a + b

    def mul(self, a: Weight, b: Weight) -> Weight:
        return a * b

    def leq(self, a: Weight, b: Weight) -> bool:
        return a <= b


class AdjoinedInfinitySemiring(Semiring):
    """A total semiring extended with a fresh strongly infinite element.

    The new element ``inf`` absorbs under addition, absorbs under
    multiplication against everything except zero, and annihilates with
    zero.
    """

    scheme = Scheme.INDICATIVE
    has_strong_infinity = True

    def __init__(self, base: Semiring):
        if base.partial:
            raise Undefined(f"cannot adjoin infinity to partial semiring {base.name}")
        if base.has_strong_infinity:
            raise Undefined(f"{base.name} already has a strong infinity")
        self.base = base
        self.name = f"{base.name}-inf"
        self.zero = base.zero
        self.one = base.one
        self.top = INF

    def contains(self, w: Weight) -> bool:
        return is_inf(w) or self.base.contains(w)

    def add(self, a: Weight, b: Weight) -> Weight:
        if is_inf(a) or is_inf(b):
            return INF
        return self.base.add(a, b)

    def mul(self, a: Weight, b: Weight) -> Weight:
        if is_inf(a):
            return self.zero if b == self.zero else INF
        if is_inf(b):
            return self.zero if a == self.zero else INF
        return self.base.mul(a, b)

    def leq(self, a: Weight, b: Weight) -> bool:
        if is_inf(b):
            return True
        if is_inf(a):
            return False
        return self.base.leq(a, b)


def adjoin_infinity(s: Semiring) -> Semiring:
    """Extend a total, infinity-free semiring with a strong infinity.

    The result uses the indicative weighting scheme by construction.
    """
    return AdjoinedInfinitySemiring(s)


BOOL = BooleanSemiring()
PROB = ProbabilitySemiring()
NAT = NaturalSemiring()
NAT_INF = adjoin_infinity(NAT)

SEMIRINGS = {"bool": BOOL, "prob": PROB, "nat-inf": NAT_INF}


def by_name(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise OutcomeKitError(
            f"unknown semiring {name!r}; choose from {sorted(SEMIRINGS)}"
        ) from None


# Module-level aliases matching the operation vocabulary used elsewhere.

def add(s: Semiring, a: Weight, b: Weight) -> Weight:
    return s.add(a, b)


def mul(s: Semiring, a: Weight, b: Weight) -> Weight:
    return s.mul(a, b)


def natural_leq(s: Semiring, a: Weight, b: Weight) -> bool:
    return s.leq(a, b)


@dataclass(frozen=True)
class Exact:
    value: Weight

    def __repr__(self) -> str:
        return f"Exact({format_weight(self.value)})"


@dataclass(frozen=True)
class Interval:
    lo: Weight
    hi: Optional[Weight]  # None means no upper bound is known

    def __repr__(self) -> str:
        hi = "unbounded" if self.hi is None else format_weight(self.hi)
        return f"Interval({format_weight(self.lo)}, {hi})"


SumResult = Union[Exact, Interval]


def bounded_sum(
    s: Semiring,
    terms: Iterable[Weight],
    cutoff: int,
    zero_from: Optional[int] = None,
    residual_bound: Optional[Weight] = None,
) -> SumResult:
    """Sum a (possibly lazily generated) weight sequence.

    Returns ``Exact`` when the sum provably stabilizes: the sequence is
    exhausted, the caller declares all terms from ``zero_from`` on to be
    zero, or an additively absorbing top is reached. Otherwise the partial
    sum after ``cutoff`` terms is reported as an interval whose upper end
    is ``lo + residual_bound`` when the caller supplies a residual bound.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    acc: Weight = s.zero
    absorbing = s.scheme is Scheme.INDICATIVE and s.top is not None
    for i, t in enumerate(terms):
        if zero_from is not None and i >= zero_from:
            return Exact(acc)
        if i >= cutoff:
            break
        acc = s.add(acc, s.check(t))
        if absorbing and acc == s.top:
            return Exact(acc)
    else:
        return Exact(acc)
    if zero_from is not None and cutoff >= zero_from:
        return Exact(acc)
    if residual_bound is None:
        return Interval(acc, None)
    return Interval(acc, s.add_saturating(acc, residual_bound))
