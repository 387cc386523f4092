"""FGLSS Lab - Label Cover to graph coloring reduction through a Hadamard-predicate PCP."""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    LabError,
    LabInputError,
    MissingAnswerError,
    MissingArtifactError,
    PreconditionError,
    ProofShapeError,
    format_lab_error,
    handle_lab_errors,
)

from .predicate import HadamardPredicate, hk_accepting_set, hk_evaluate

from .label_cover import (
    LabelCoverInstance,
    Labeling,
    extend,
    gen_planted,
    gen_random,
    satisfied_fraction,
    value_exact,
)

from .pcp import (
    VerifierConfig,
    accept_prob_exact_enum,
    accept_prob_exact_product,
    accept_prob_mc,
    sample_query,
)

from .proofs import make_correct_proof, make_random_proof, make_table_proof

from .fglss import FglssGraph, build_sampled, is_from_proof, strategy_from_is

from .mwis import mwis_exact

from .coloring import alpha_coloring, good_fraction_mc, is_good_query, verify_coloring

from .reports import ReductionParams

__all__ = [
    "CapExceededError",
    "LabError",
    "LabInputError",
    "MissingAnswerError",
    "MissingArtifactError",
    "PreconditionError",
    "ProofShapeError",
    "format_lab_error",
    "handle_lab_errors",
    "HadamardPredicate",
    "hk_accepting_set",
    "hk_evaluate",
    "LabelCoverInstance",
    "Labeling",
    "extend",
    "gen_planted",
    "gen_random",
    "satisfied_fraction",
    "value_exact",
    "VerifierConfig",
    "accept_prob_exact_enum",
    "accept_prob_exact_product",
    "accept_prob_mc",
    "sample_query",
    "make_correct_proof",
    "make_random_proof",
    "make_table_proof",
    "FglssGraph",
    "build_sampled",
    "is_from_proof",
    "strategy_from_is",
    "mwis_exact",
    "alpha_coloring",
    "good_fraction_mc",
    "is_good_query",
    "verify_coloring",
    "ReductionParams",
]
