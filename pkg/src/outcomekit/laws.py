"""Property suites for the algebra, the weighting monad, and the
modalities. The same suites back the test set and the ``laws`` CLI
subcommand; all randomness is seeded.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .assertions import (
    Box,
    BoxTotal,
    Diamond,
    DiamondPartial,
    NotA,
    all_bool_weightings,
    expand_modal,
    satisfies,
)
from .lang import Cmp, Lit, ProgramState, Var, negate
from .semiring import (
    BOOL,
    INF,
    NAT_INF,
    PROB,
    Scheme,
    Semiring,
    Undefined,
    Weight,
    bounded_sum,
    Exact,
    is_inf,
)
from .weighting import (
    DIV,
    Weighting,
    fusion_leq,
    kleisli_extend,
    mass,
    project,
    scale_left,
    scale_right,
    unit,
    wsum,
)


@dataclass
class LawResult:
    name: str
    cases: int
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAILED"
        extra = f" ({self.failures[0]})" if self.failures else ""
        return f"{self.name}: {status}, {self.cases} cases{extra}"


def _sample_weights(sr: Semiring, rng: random.Random, count: int) -> List[Weight]:
    out: List[Weight] = [sr.zero, sr.one]
    if sr.top is not None:
        out.append(sr.top)
    while len(out) < count:
        if sr.name == "bool":
            out.append(Fraction(rng.randint(0, 1)))
        elif sr.name == "prob":
            denom = rng.randint(1, 64)
            out.append(Fraction(rng.randint(0, denom), denom))
        else:
            out.append(INF if rng.random() < 0.1 else Fraction(rng.randint(0, 40)))
    return out


def _try_add(sr: Semiring, a: Weight, b: Weight) -> Tuple[bool, Optional[Weight]]:
    try:
        return True, sr.add(a, b)
    except Undefined:
        return False, None


def semiring_laws(sr: Semiring, iters: int = 1000, seed: int = 0) -> List[LawResult]:
    rng = random.Random(seed)
    if sr.name == "bool":
        triples = list(itertools.product([Fraction(0), Fraction(1)], repeat=3))
    else:
        weights = _sample_weights(sr, rng, max(8, iters // 40))
        triples = [tuple(rng.choice(weights) for _ in range(3)) for _ in range(iters)]
    results = []

    def law(name: str, check: Callable) -> None:
        failures = []
        for xyz in triples:
            message = check(*xyz)
            if message:
                failures.append(message)
                break
        results.append(LawResult(name, len(triples), failures))

    def add_comm(x, y, z):
        okl, l = _try_add(sr, x, y)
        okr, r = _try_add(sr, y, x)
        if okl != okr or l != r:
            return f"{x}+{y} != {y}+{x}"

    def add_assoc(x, y, z):
        try:
            l = sr.add(sr.add(x, y), z)
        except Undefined:
            l = None
        try:
            r = sr.add(x, sr.add(y, z))
        except Undefined:
            r = None
        # partial addition: compare only when both sides are defined
        if l is not None and r is not None and l != r:
            return f"({x}+{y})+{z} != {x}+({y}+{z})"

    def add_identity(x, y, z):
        if sr.add(x, sr.zero) != x or sr.add(sr.zero, x) != x:
            return f"identity fails at {x}"

    def mul_assoc(x, y, z):
        if sr.mul(sr.mul(x, y), z) != sr.mul(x, sr.mul(y, z)):
            return f"mul assoc fails at {x},{y},{z}"

    def mul_identity(x, y, z):
        if sr.mul(x, sr.one) != x or sr.mul(sr.one, x) != x:
            return f"mul identity fails at {x}"

    def annihilation(x, y, z):
        if sr.mul(x, sr.zero) != sr.zero or sr.mul(sr.zero, x) != sr.zero:
            return f"annihilation fails at {x}"

    def distrib_left(x, y, z):
        ok, s = _try_add(sr, y, z)
        if not ok:
            return None
        ok2, rhs = _try_add(sr, sr.mul(x, y), sr.mul(x, z))
        if not ok2 or sr.mul(x, s) != rhs:
            return f"left distributivity fails at {x},{y},{z}"

    def distrib_right(x, y, z):
        ok, s = _try_add(sr, x, y)
        if not ok:
            return None
        ok2, rhs = _try_add(sr, sr.mul(x, z), sr.mul(y, z))
        if not ok2 or sr.mul(s, z) != rhs:
            return f"right distributivity fails at {x},{y},{z}"

    law("add commutative", add_comm)
    law("add associative", add_assoc)
    law("add identity", add_identity)
    law("mul associative", mul_assoc)
    law("mul identity", mul_identity)
    law("annihilation", annihilation)
    law("distributivity left", distrib_left)
    law("distributivity right", distrib_right)

    # natural order: reflexive, antisymmetric, transitive
    def order_laws(x, y, z):
        if not sr.leq(x, x):
            return f"not reflexive at {x}"
        if sr.leq(x, y) and sr.leq(y, x) and x != y:
            return f"not antisymmetric at {x},{y}"
        if sr.leq(x, y) and sr.leq(y, z) and not sr.leq(x, z):
            return f"not transitive at {x},{y},{z}"

    law("natural order is a partial order", order_laws)

    # scheme-specific top behavior
    def scheme_law(x, y, z):
        if sr.top is None:
            return None
        if sr.scheme is Scheme.CONSERVATIVE:
            if x == sr.zero:
                return None
            ok, _ = _try_add(sr, x, sr.top)
            if ok:
                return f"{x}+top unexpectedly defined"
        else:
            if sr.add(x, sr.top) != sr.top:
                return f"top not absorbing under add at {x}"
            if x != sr.zero and sr.mul(x, sr.top) != sr.top:
                return f"top not absorbing under mul at {x}"

    law("weighting scheme top law", scheme_law)

    # finite sums agree with a left fold
    def finite_sum(x, y, z):
        try:
            folded = sr.add(sr.add(x, y), z)
        except Undefined:
            return None
        result = bounded_sum(sr, [x, y, z], cutoff=10)
        if not isinstance(result, Exact) or result.value != folded:
            return f"bounded_sum disagrees with fold at {x},{y},{z}"

    law("finite sums equal folds", finite_sum)
    return results


# ---------------------------------------------------------------------------
# Monad and weighting laws


def _two_states() -> List[ProgramState]:
    return [ProgramState.make(x=0), ProgramState.make(x=1)]


def _bool_weightings(states) -> List[Weighting]:
    return all_bool_weightings(BOOL, states)


def _bool_functions(states) -> List[Callable[[ProgramState], Weighting]]:
    images = _bool_weightings(states)
    fs = []
    for combo in itertools.product(images, repeat=len(states)):
        table = dict(zip(states, combo))
        fs.append(lambda s, table=table: table[s])
    return fs


def _sample_prob_weighting(rng: random.Random, states, allow_div=True) -> Weighting:
    remaining = Fraction(1)
    entries = {}
    outcomes = list(states) + ([DIV] if allow_div else [])
    rng.shuffle(outcomes)
    for o in outcomes:
        if remaining == 0:
            break
        denom = rng.randint(1, 8)
        w = min(remaining, Fraction(rng.randint(0, denom), denom))
        if w > 0:
            entries[o] = w
            remaining -= w
    return Weighting(PROB, entries)


def _sample_prob_function(rng: random.Random, states) -> Callable:
    table = {s: _sample_prob_weighting(rng, states) for s in states}
    return lambda s: table[s]


def monad_laws(sr: Semiring, iters: int = 200, seed: int = 0) -> List[LawResult]:
    results = []
    states = _two_states()
    if sr.name == "bool":
        ms = _bool_weightings(states)
        fs = _bool_functions(states)
        pairs = [(f, m) for f in fs for m in ms]
        fg = [(f, g) for f in fs[:16] for g in fs[:16]]
    else:
        rng = random.Random(seed)
        states = [ProgramState.make(x=i) for i in range(3)]
        ms = [_sample_prob_weighting(rng, states) for _ in range(iters // 4)]
        fs = [_sample_prob_function(rng, states) for _ in range(12)]
        pairs = [(rng.choice(fs), rng.choice(ms)) for _ in range(iters)]
        fg = [(rng.choice(fs), rng.choice(fs)) for _ in range(40)]

    failures = []
    for m in ms:
        if kleisli_extend(lambda s: unit(sr, s), m) != m:
            failures.append(f"right identity fails at {m}")
            break
    results.append(LawResult("monad right identity", len(ms), failures))

    failures = []
    for f, _ in pairs:
        for s in states:
            if kleisli_extend(f, unit(sr, s)) != f(s):
                failures.append(f"left identity fails at {s}")
                break
        if failures:
            break
    results.append(LawResult("monad left identity", len(pairs), failures))

    failures = []
    count = 0
    for (f, g), (_, m) in zip(fg, pairs):
        count += 1
        lhs = kleisli_extend(f, kleisli_extend(g, m))
        rhs = kleisli_extend(lambda s: kleisli_extend(f, g(s)), m)
        if lhs != rhs:
            failures.append(f"associativity fails at {m}")
            break
    results.append(LawResult("kleisli composition associates", count, failures))
    return results


def bind_effect_laws(sr: Semiring, iters: int = 200, seed: int = 0) -> List[LawResult]:
    """The five interaction laws of Kleisli extension with sums, scalars,
    and divergence."""
    results = []
    states = _two_states()
    rng = random.Random(seed)
    if sr.name == "bool":
        ms = _bool_weightings(states)
        fs = _bool_functions(states)[:24]
        weights = [Fraction(0), Fraction(1)]
    else:
        states = [ProgramState.make(x=i) for i in range(3)]
        ms = [_sample_prob_weighting(rng, states) for _ in range(iters // 4)]
        fs = [_sample_prob_function(rng, states) for _ in range(10)]
        weights = [Fraction(0), Fraction(1, 2), Fraction(1)]

    def run(name, check):
        failures = []
        cases = 0
        for f in fs:
            for m in ms:
                cases += 1
                message = check(f, m)
                if message:
                    failures.append(message)
                    break
            if failures:
                break
        results.append(LawResult(name, cases, failures))

    def linear_in_m(f, m):
        for m2 in ms[: 6]:
            try:
                s = wsum(m, m2)
            except Exception:
                continue
            try:
                lhs = kleisli_extend(f, s)
                rhs = wsum(kleisli_extend(f, m), kleisli_extend(f, m2))
            except Exception:
                continue
            if lhs != rhs:
                return f"additivity in the weighting fails at {m} + {m2}"

    def linear_in_f(f, m):
        if DIV in m.entries:
            return None
        for g in fs[: 4]:
            def fg(s):
                return wsum(f(s), g(s))
            try:
                lhs = kleisli_extend(fg, m)
                rhs = wsum(kleisli_extend(f, m), kleisli_extend(g, m))
            except Exception:
                continue
            if lhs != rhs:
                return f"additivity in the function fails at {m}"

    def scalar_left(f, m):
        for u in weights:
            if kleisli_extend(f, scale_left(u, m)) != scale_left(u, kleisli_extend(f, m)):
                return f"left scalar fails at {u}, {m}"

    def scalar_right(f, m):
        if DIV in m.entries:
            return None
        for u in weights:
            if kleisli_extend(f, scale_right(m, u)) != scale_right(kleisli_extend(f, m), u):
                return f"right scalar fails at {u}, {m}"

    def div_unit(f, m):
        if kleisli_extend(f, unit(sr, DIV)) != unit(sr, DIV):
            return "divergence is not preserved"

    run("extension additive in the weighting", linear_in_m)
    run("extension additive in the function (terminating)", linear_in_f)
    run("left scalars commute with extension", scalar_left)
    run("right scalars commute with extension (terminating)", scalar_right)
    run("divergence passes through extension", div_unit)
    return results


def weighting_laws(sr: Semiring, iters: int = 200, seed: int = 0) -> List[LawResult]:
    results = []
    rng = random.Random(seed)
    states = _two_states()
    if sr.name == "bool":
        ms = _bool_weightings(states)
    else:
        states = [ProgramState.make(x=i) for i in range(3)]
        ms = [_sample_prob_weighting(rng, states) for _ in range(iters // 2)]

    test = Cmp("=", Var("x"), Lit(Fraction(0)))
    failures = []
    for m in ms:
        left = project(test, m)
        right = project(negate(test), m)
        rebuilt = wsum(wsum(left, right), scale_left(m.div_weight(), unit(sr, DIV)))
        if rebuilt != m:
            failures.append(f"projection decomposition fails at {m}")
            break
    results.append(LawResult("projection decomposition", len(ms), failures))

    failures = []
    cases = 0
    for m1 in ms:
        for m2 in ms:
            cases += 1
            if fusion_leq(m1, m2) and fusion_leq(m2, m1) and m1 != m2:
                failures.append(f"fusion order not antisymmetric at {m1}, {m2}")
            if not fusion_leq(m1, m1):
                failures.append(f"fusion order not reflexive at {m1}")
            if failures:
                break
        if failures:
            break
    results.append(LawResult("fusion order is a partial order", cases, failures))

    # Monotonicity of the extension in its function argument (pointwise
    # fusion order); this is the property the loop fixpoint rests on.
    failures = []
    cases = 0
    if sr.name == "bool":
        fs = _bool_functions(states)[:20]
        for f1 in fs:
            for f2 in fs:
                if not all(fusion_leq(f1(s), f2(s)) for s in states):
                    continue
                for m in ms:
                    cases += 1
                    if not fusion_leq(kleisli_extend(f1, m), kleisli_extend(f2, m)):
                        failures.append(f"extension not monotone in f at {m}")
                        break
                if failures:
                    break
            if failures:
                break
    results.append(LawResult("kleisli extension monotone in the function", cases, failures))

    # Monotonicity in the weighting holds within the conservative
    # fixed-mass class (mass conservation pays for released divergence).
    failures = []
    cases = 0
    if sr.name == "prob":
        full = [m for m in ms if m.mass() == Fraction(1)]
        fs = []
        for _ in range(8):
            table = {
                s: _sample_prob_weighting(rng, states)
                for s in states
            }
            # pad each image to full mass with divergence
            for s, img in table.items():
                gap = Fraction(1) - img.mass()
                if gap > 0:
                    table[s] = wsum(img, scale_left(gap, unit(sr, DIV)))
            fs.append(lambda s, table=table: table[s])
        for f in fs:
            for m1 in full:
                for m2 in full:
                    if not fusion_leq(m1, m2):
                        continue
                    cases += 1
                    if not fusion_leq(kleisli_extend(f, m1), kleisli_extend(f, m2)):
                        failures.append(f"extension not monotone at {m1} <= {m2}")
                        break
                if failures:
                    break
            if failures:
                break
    results.append(
        LawResult("kleisli extension monotone on fixed-mass weightings", cases, failures)
    )
    return results


def modal_duality_laws() -> List[LawResult]:
    states = _two_states()
    ms = _bool_weightings(states)
    pred = Cmp("=", Var("x"), Lit(Fraction(0)))
    results = []
    duals = [
        ("dia P = ~box ~P", Diamond(pred), NotA(Box(negate(pred)))),
        ("box P = ~dia ~P", Box(pred), NotA(Diamond(negate(pred)))),
        ("diaP P = ~boxT ~P", DiamondPartial(pred), NotA(BoxTotal(negate(pred)))),
        ("boxT P = ~diaP ~P", BoxTotal(pred), NotA(DiamondPartial(negate(pred)))),
    ]
    for name, left, right in duals:
        failures = []
        for m in ms:
            if satisfies(m, left) != satisfies(m, right):
                failures.append(f"duality fails at {m}")
                break
        results.append(LawResult(name, len(ms), failures))
    failures = []
    for name, left, _ in duals:
        for m in ms:
            if satisfies(m, left) != satisfies(m, expand_modal(left)):
                failures.append(f"modal expansion changes satisfaction at {m}")
                break
    results.append(LawResult("modal expansion preserves satisfaction", 4 * len(ms), failures))
    return results


def run_all(sr: Semiring, iters: int = 500, seed: int = 0) -> List[LawResult]:
    results = semiring_laws(sr, iters, seed)
    if sr.name in ("bool", "prob"):
        results += monad_laws(sr, iters, seed)
        results += bind_effect_laws(sr, iters, seed)
        results += weighting_laws(sr, iters, seed)
    if sr.name == "bool":
        results += modal_duality_laws()
    return results
