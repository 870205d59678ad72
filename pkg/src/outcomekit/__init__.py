"""Semiring-weighted program evaluation with divergence tracking, plus
termination-sensitive triple checking and proof-tree verification."""

from .semiring import (
    BOOL,
    INF,
    NAT,
    NAT_INF,
    PROB,
    Exact,
    Interval,
    Infinity,
    Scheme,
    Semiring,
    Undefined,
    Weight,
    adjoin_infinity,
    bounded_sum,
    by_name,
    format_weight,
    parse_weight,
)
from .lang import (
    Command,
    ProgramState,
    desugar,
    eval_bool,
    eval_guard,
    format_command,
    parse_program,
)
from .weighting import (
    DIV,
    Divergence,
    MassOverflow,
    Outcome,
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
from .semantics import (
    CycleDetected,
    Cutoff,
    EvalConfig,
    EvalResult,
    LoopApprox,
    Stabilized,
    eval_command,
    lfp_iterate,
    phi_step,
    spost,
    unroll_loop,
    unroll_trace,
)
from .assertions import (
    Assertion,
    AssertionSchema,
    entails_guard,
    expand_modal,
    find_split,
    is_nonterminating,
    limit_of_family,
    parse_assertion,
    satisfies,
)
from .transformers import (
    FiniteDomain,
    Verdict,
    check_triple,
    subsumption_oracle,
    wlp_box,
    wlpp,
    wp_total,
    wpp_diamond,
)
from .proofs import (
    CheckContext,
    CheckReport,
    ProofNode,
    check_node,
    check_proof,
    elaborate_derived,
    load_proof,
    proof_from_dict,
)

__version__ = "0.1.0"
