"""Command-line frontend: evaluate programs, check triples and proofs,
compute predicate transformers, and run the law suites.

Exit codes: 0 success, 1 invalid/rejected result, 2 parse error,
3 semantic error (mass overflow, carrier violations, oversized domains).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional

from . import laws as law_suites
from .assertions import SplitSearchExceeded, parse_assertion
from .lang import LangError, ParseError, ProgramState, parse_program
from .proofs import CheckContext, check_proof, load_proof
from .semantics import EvalConfig, EvalResult, eval_command, lint_program
from .semiring import (
    OutcomeKitError,
    Semiring,
    by_name,
    format_weight,
    parse_weight,
)
from .transformers import (
    TRANSFORMS,
    DomainTooLarge,
    FiniteDomain,
    check_triple,
)
from .weighting import DIV, MassOverflow, Weighting, parse_weighting, unit


@dataclass
class RunConfig:
    semiring: str = "bool"
    unroll_limit: int = 64
    window: int = 4
    support_limit: int = 8192
    ncheck: int = 16
    tolerance: Fraction = Fraction(0)
    output: str = "text"

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            unroll_limit=self.unroll_limit,
            window=self.window,
            support_limit=self.support_limit,
            report_tolerance=self.tolerance,
        )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--semiring", default="bool", choices=["bool", "prob", "nat-inf"])
    parser.add_argument("--k", type=int, default=64, help="loop unroll limit")
    parser.add_argument("--window", type=int, default=4, help="cycle detection window")
    parser.add_argument("--support-limit", type=int, default=8192)
    parser.add_argument("--ncheck", type=int, default=16)
    parser.add_argument(
        "--tolerance", default="0",
        help="decimal display tolerance (reporting only; results stay exact)",
    )
    parser.add_argument("--format", default="text", choices=["text", "json"])


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        semiring=args.semiring,
        unroll_limit=args.k,
        window=args.window,
        support_limit=args.support_limit,
        ncheck=args.ncheck,
        tolerance=Fraction(args.tolerance),
        output=args.format,
    )


def _load_program(spec: str):
    if spec.startswith("corpus:"):
        name = spec.split(":", 1)[1]
        text = resources.files("outcomekit.corpus").joinpath(f"{name}.prog").read_text()
    else:
        with open(spec, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_program(text)


# ---------------------------------------------------------------------------
# Result rendering


def result_to_dict(r: EvalResult) -> dict:
    entries: Dict[str, str] = {}
    for o in r.collected.support():
        if o == DIV:
            continue
        entries[str(o)] = format_weight(r.collected.entries[o])
    div = r.div_bracket()
    if hasattr(div, "value"):
        div_obj = {"exact": format_weight(div.value)}
    else:
        div_obj = {
            "lo": format_weight(div.lo),
            "hi": None if div.hi is None else format_weight(div.hi),
        }
    return {
        "entries": entries,
        "div": div_obj,
        "slack": format_weight(r.slack),
        "status": str(r.status),
        "residual": {str(o): format_weight(w) for o, w in sorted(
            r.residual.entries.items(), key=lambda kv: str(kv[0]))},
    }


def result_from_dict(data: dict, sr: Semiring) -> dict:
    """Re-parse a rendered result into weights (round-trip check)."""
    out = {
        "entries": {k: parse_weight(v) for k, v in data["entries"].items()},
        "slack": parse_weight(data["slack"]),
        "status": data["status"],
        "residual": {k: parse_weight(v) for k, v in data["residual"].items()},
    }
    div = data["div"]
    if "exact" in div:
        out["div"] = ("exact", parse_weight(div["exact"]))
    else:
        out["div"] = (
            "interval",
            parse_weight(div["lo"]),
            None if div["hi"] is None else parse_weight(div["hi"]),
        )
    return out


def _approx(w, tolerance: Fraction) -> str:
    if tolerance <= 0 or not isinstance(w, Fraction):
        return ""
    return f" (~{float(w):.6g})"


def render_result(r: EvalResult, cfg: RunConfig) -> str:
    lines = []
    for o in r.collected.support():
        if o == DIV:
            continue
        w = r.collected.entries[o]
        lines.append(f"{o}: {format_weight(w)}{_approx(w, cfg.tolerance)}")
    div = r.div_bracket()
    if hasattr(div, "value"):
        if div.value != r.semiring.zero or not lines:
            lines.append(f"DIV: {format_weight(div.value)}{_approx(div.value, cfg.tolerance)}")
    else:
        hi = "?" if div.hi is None else format_weight(div.hi)
        lines.append(f"DIV: [{format_weight(div.lo)}, {hi}]")
    lines.append(f"status: {r.status}")
    if r.slack != r.semiring.zero:
        lines.append(f"unresolved mass <= {format_weight(r.slack)}")
    if not r.residual.is_empty():
        lines.append(f"residual: {r.residual}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    sr = by_name(cfg.semiring)
    cmd, declared = _load_program(args.prog)
    for warning in lint_program(cmd, sr):
        print(f"warning: {warning}", file=sys.stderr)
    if args.weighting:
        m = parse_weighting(args.weighting, sr)
    else:
        bindings = {name: Fraction(0) for name in declared}
        if args.state:
            for piece in args.state.split(","):
                name, _, value = piece.partition("=")
                bindings[name.strip()] = Fraction(value.strip())
        m = unit(sr, ProgramState.make(bindings))
    result = eval_command(cmd, m, cfg.eval_config())
    if cfg.output == "json":
        print(json.dumps(result_to_dict(result), indent=2))
    else:
        print(render_result(result, cfg))
    return 0


def cmd_check_triple(args) -> int:
    cfg = _config_from_args(args)
    sr = by_name(cfg.semiring)
    cmd, _ = _load_program(args.prog)
    pre = parse_assertion(args.pre)
    post = parse_assertion(args.post)
    domain = FiniteDomain.parse(args.domain) if args.domain else None
    verdict = check_triple(
        pre, cmd, post, sr, domain, cfg.eval_config(), subsets=args.subsets
    )
    if cfg.output == "json":
        print(json.dumps({"verdict": verdict.kind, "detail": str(verdict)}))
    else:
        print(verdict)
    return 0 if verdict.kind == "valid" else 1


def cmd_transform(args) -> int:
    cfg = _config_from_args(args)
    sr = by_name(cfg.semiring)
    if sr.name != "bool":
        print("error: transformers require the bool semiring", file=sys.stderr)
        return 3
    cmd, _ = _load_program(args.prog)
    from .lang import TokenStream, parse_bool, tokenize

    post = parse_bool(TokenStream(tokenize(args.post)))
    domain = FiniteDomain.parse(args.domain)
    result = TRANSFORMS[args.kind](cmd, post, domain, cfg.eval_config())
    if cfg.output == "json":
        print(
            json.dumps(
                {
                    "included": [str(s) for s in result.included],
                    "unknown": [str(s) for s in result.unknown],
                }
            )
        )
    else:
        print("states:", ", ".join(str(s) for s in result.included) or "(none)")
        if result.unknown:
            print("unknown:", ", ".join(str(s) for s in result.unknown))
            print("warning: loop approximation left states unresolved", file=sys.stderr)
    return 0


def cmd_check_proof(args) -> int:
    cfg = _config_from_args(args)
    path = args.proof
    if path.startswith("corpus:"):
        name = path.split(":", 1)[1]
        with resources.files("outcomekit.corpus").joinpath(f"{name}.proof.json").open() as fh:
            data = json.load(fh)
        from .proofs import proof_from_dict

        pf = proof_from_dict(data)
    else:
        pf = load_proof(path)
    ctx = pf.context(cfg.eval_config(), args.ncheck)
    report = check_proof(pf.root, ctx)
    if args.expand_derived:
        from .proofs import check_elaborated

        expanded = check_elaborated(pf.root, ctx)
        if expanded is not None:
            flip = (report.rejected != expanded.rejected)
            print(f"derived-rule expansion: {expanded.verdict}" + (" (FLIP!)" if flip else ""))
    if cfg.output == "json":
        print(
            json.dumps(
                {
                    "verdict": report.verdict,
                    "obligations": [
                        {"node": ob.node, "claim": ob.claim, "checked_to": ob.checked_to}
                        for ob in report.obligations
                    ],
                    "rejection": (
                        {
                            "node": report.rejection().node,
                            "class": report.rejection().reason_class,
                            "message": report.rejection().message,
                        }
                        if report.rejected
                        else None
                    ),
                }
            )
        )
    else:
        print(report)
    return 1 if report.rejected else 0


def cmd_laws(args) -> int:
    cfg = _config_from_args(args)
    sr = by_name(cfg.semiring)
    results = law_suites.run_all(sr, iters=args.iters, seed=args.seed)
    failed = [r for r in results if not r.passed]
    if cfg.output == "json":
        print(
            json.dumps(
                [
                    {"law": r.name, "cases": r.cases, "passed": r.passed,
                     "failures": r.failures}
                    for r in results
                ]
            )
        )
    else:
        for r in results:
            print(r)
        print(f"{len(results) - len(failed)}/{len(results)} law suites passed")
    return 1 if failed else 0


def cmd_corpus(args) -> int:
    base = resources.files("outcomekit.corpus")
    names = sorted(
        entry.name for entry in base.iterdir() if entry.name.endswith(".prog")
    )
    for name in names:
        stem = name[: -len(".prog")]
        proof = base.joinpath(f"{stem}.proof.json")
        marker = " [proof]" if proof.is_file() else ""
        print(f"{stem}{marker}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="outcomekit",
        description="Weighted-program evaluation and termination-sensitive verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a program on an initial state or weighting")
    p.add_argument("prog", help="program file path, or corpus:<name>")
    p.add_argument("--state", help="initial bindings, e.g. 'x=1,y=2' (others default 0)")
    p.add_argument("--weighting", help="initial weighting literal, e.g. '{ (x=1): 1/2 }'")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check-triple", help="check an outcome triple semantically")
    p.add_argument("--pre", required=True)
    p.add_argument("--prog", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--domain", help="finite domain, e.g. 'x:0..3,y:0..3'")
    p.add_argument("--subsets", action="store_true",
                   help="enumerate all Boolean sub-supports of the precondition")
    _add_common(p)
    p.set_defaults(func=cmd_check_triple)

    p = sub.add_parser("transform", help="compute a predicate transformer over a finite domain")
    p.add_argument("--kind", required=True, choices=sorted(TRANSFORMS))
    p.add_argument("--post", required=True, help="postcondition predicate")
    p.add_argument("--domain", required=True)
    p.add_argument("--prog", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("check-proof", help="check a derivation tree")
    p.add_argument("proof", help="proof file path, or corpus:<name>")
    p.add_argument("--expand-derived", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_check_proof)

    p = sub.add_parser("laws", help="run the algebra and monad law suites")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("corpus", help="corpus management")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_corpus)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError,) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (MassOverflow, DomainTooLarge, SplitSearchExceeded) as exc:
        print(f"semantic error: {exc}", file=sys.stderr)
        return 3
    except LangError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except OutcomeKitError as exc:
        print(f"semantic error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
