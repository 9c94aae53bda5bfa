"""Tsetlin machine toolkit: block-parallel training of coalesced weighted
clause banks (dense or sparse), compiled rule-set inference with
explanations, and standalone C99 export."""

from .core import (
    Config,
    ConfigError,
    DataError,
    RngStream,
    augment_literals,
    dense_state_bytes,
    dense_weight_bytes,
    derive_stream,
)
from .dense import (
    ContractViolation,
    DenseClauseBank,
    EvalMode,
    clause_update,
    compute_block_votes,
    evaluate_clause,
    type_i_feedback,
    type_ii_feedback,
)
from .executor import TrainRun, evaluate, partition_clauses, train
from .export_c import export_program, export_rules_text
from .feedback import UpdateDecision, clip_votes, sample_updates, update_probabilities
from .predictor import (
    Explanation,
    RuleSet,
    compile_ruleset,
    predict,
    predict_and_explain,
    rule_votes,
)
from .dataio import load_dense, load_model, load_sparse, save_dense, save_model, save_sparse
from .sparse import SparseClauseBank, SparseDataset, SparseExample
from .tuning import CvReport, SearchSpace, Trial, cross_validate, random_search, stratified_kfold

__version__ = "0.1.0"

__all__ = [
    "Config",
    "ConfigError",
    "ContractViolation",
    "CvReport",
    "DataError",
    "DenseClauseBank",
    "EvalMode",
    "Explanation",
    "RngStream",
    "RuleSet",
    "SearchSpace",
    "SparseClauseBank",
    "SparseDataset",
    "SparseExample",
    "TrainRun",
    "Trial",
    "UpdateDecision",
    "augment_literals",
    "clause_update",
    "clip_votes",
    "compile_ruleset",
    "compute_block_votes",
    "cross_validate",
    "dense_state_bytes",
    "dense_weight_bytes",
    "derive_stream",
    "evaluate",
    "evaluate_clause",
    "export_program",
    "export_rules_text",
    "load_dense",
    "load_model",
    "load_sparse",
    "partition_clauses",
    "predict",
    "predict_and_explain",
    "random_search",
    "rule_votes",
    "sample_updates",
    "save_dense",
    "save_model",
    "save_sparse",
    "stratified_kfold",
    "train",
    "type_i_feedback",
    "type_ii_feedback",
    "update_probabilities",
]
