"""lpir - leaky private information retrieval with the permuted TSC code."""

######################################################################
# Main library information.
__author__ = "The lpir developers"
__copyright__ = "Copyright 2026, The lpir developers"
__credits__ = ["The lpir developers"]
__maintainer__ = "The lpir developers"
__version__ = "0.1.0"
__licence__ = "GPLv3+"

##############################################################################
# Import things for easier access.
from .allocation import (
    FullAllocation,
    ValidationReport,
    WeightAllocation,
    allocation_for,
    expand_to_full,
    optimal_allocation,
    optimal_log_probs,
    samy_allocation,
    validate,
    validate_log_probs,
)
from .audit import (
    LeakageReport,
    QueryDistribution,
    exact_download_cost,
    measure_leakage,
    monte_carlo_cost,
    query_distribution,
    verify_correctness,
)
from .core import KeyVector, Permutation, QueryVector, SchemeParams, new_params
from .optimizer import (
    KktCertificate,
    build_p1,
    build_p2,
    build_p2_scaled,
    kkt_certificate,
    reduce_allocation,
    solve_p2,
    verify_prop1,
)
from .protocol import (
    Answer,
    MessageStore,
    RandomKey,
    RetrievalTranscript,
    answer_query,
    decode,
    make_queries,
    retrieve,
    run_retrieval,
    sample_key,
)
from .simplex import LinearProgram, solve
from .tradeoff import (
    ExponentBounds,
    TradeoffPoint,
    cost_lb,
    cost_tsc,
    cost_ub,
    eps_tsc,
    eps_ub,
    sweep,
    theorem1_bounds,
)
from .types import (
    DecodeError,
    GuardExceeded,
    InfeasibleCost,
    Infeasible,
    InvalidParameters,
    IterationLimit,
    LPError,
    LPIRError,
    NumericalBreakdown,
    PermutationScope,
    Unbounded,
)

##############################################################################
# Define what importing * means.
__all__ = (
    "LPIRError",
    "InvalidParameters",
    "InfeasibleCost",
    "GuardExceeded",
    "DecodeError",
    "LPError",
    "Infeasible",
    "Unbounded",
    "IterationLimit",
    "NumericalBreakdown",
    "PermutationScope",
    "SchemeParams",
    "KeyVector",
    "QueryVector",
    "Permutation",
    "new_params",
    "WeightAllocation",
    "FullAllocation",
    "ValidationReport",
    "optimal_allocation",
    "samy_allocation",
    "allocation_for",
    "validate",
    "validate_log_probs",
    "optimal_log_probs",
    "expand_to_full",
    "TradeoffPoint",
    "ExponentBounds",
    "cost_tsc",
    "cost_ub",
    "cost_lb",
    "eps_tsc",
    "eps_ub",
    "theorem1_bounds",
    "sweep",
    "MessageStore",
    "RandomKey",
    "Answer",
    "RetrievalTranscript",
    "sample_key",
    "make_queries",
    "answer_query",
    "decode",
    "run_retrieval",
    "retrieve",
    "QueryDistribution",
    "LeakageReport",
    "query_distribution",
    "measure_leakage",
    "exact_download_cost",
    "monte_carlo_cost",
    "verify_correctness",
    "LinearProgram",
    "solve",
    "KktCertificate",
    "build_p1",
    "build_p2",
    "build_p2_scaled",
    "solve_p2",
    "verify_prop1",
    "kkt_certificate",
    "reduce_allocation",
)

### __init__.py ends here
