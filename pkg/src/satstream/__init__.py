"""Single-pass Max-SAT and Min-SAT approximation.

The estimators :class:`StreamingMaxSAT` and :class:`StreamingMinSAT` take a
clause stream (a stream file, a :class:`ClauseStream` or a list of clauses)
and keep only sampled or sketched state while reading it.
"""
from .cnf import (
    CONJUNCTIVE,
    DISJUNCTIVE,
    Clause,
    ClauseStream,
    Literal,
    Parameters,
    StreamEvent,
    clause_decode,
    clause_index,
    normalize_clause,
    parse_event,
    read_stream,
    universe_size,
)
from .evaluation import evaluate
from .exceptions import SatStreamError
from .hardness import (
    HardnessConfig,
    IndexInstance,
    exact_maxand,
    gen_and_system,
    gen_ksat_index,
    gen_maxand_index,
    gen_minsat_index,
    gen_Sk,
    random_ksat_instance,
    random_maxand_instance,
    random_minsat_instance,
    systems_pairwise_exclusive,
)
from .harness import (
    ExperimentConfig,
    random_dynamic_instance,
    random_f_bounded,
    random_instance,
    run_experiment,
)
from .lp import build_lp, lp_round, solve_lp, solve_lp_exact
from .maxsat import MaxSatConfig, StreamingMaxSAT, one_literal_branch, stream_maxsat
from .minsat import (
    StreamingMinSAT,
    detect_opt_zero,
    kohli_greedy,
    kohli_values,
    minsat_bounded_freq,
    minsat_f0_bruteforce,
    minsat_settled,
    minsat_subsampled,
)
from .oracle import exact_maxsat, exact_minsat, verify_all_satisfiable
from .samplers import F0Sketch, L0Sampler, Reservoir, l0_sample_set

__version__ = "0.1.0"

__all__ = [
    "CONJUNCTIVE",
    "DISJUNCTIVE",
    "Clause",
    "ClauseStream",
    "ExperimentConfig",
    "F0Sketch",
    "HardnessConfig",
    "IndexInstance",
    "L0Sampler",
    "Literal",
    "MaxSatConfig",
    "Parameters",
    "Reservoir",
    "SatStreamError",
    "StreamEvent",
    "StreamingMaxSAT",
    "StreamingMinSAT",
    "build_lp",
    "clause_decode",
    "clause_index",
    "detect_opt_zero",
    "evaluate",
    "exact_maxand",
    "exact_maxsat",
    "exact_minsat",
    "gen_Sk",
    "gen_and_system",
    "gen_ksat_index",
    "gen_maxand_index",
    "gen_minsat_index",
    "kohli_greedy",
    "kohli_values",
    "l0_sample_set",
    "lp_round",
    "minsat_bounded_freq",
    "minsat_f0_bruteforce",
    "minsat_settled",
    "minsat_subsampled",
    "normalize_clause",
    "one_literal_branch",
    "parse_event",
    "random_dynamic_instance",
    "random_f_bounded",
    "random_instance",
    "random_ksat_instance",
    "random_maxand_instance",
    "random_minsat_instance",
    "read_stream",
    "run_experiment",
    "solve_lp",
    "solve_lp_exact",
    "stream_maxsat",
    "systems_pairwise_exclusive",
    "universe_size",
    "verify_all_satisfiable",
]
