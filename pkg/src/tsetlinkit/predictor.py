"""Frozen weighted rule sets compiled from trained banks.

Training state (automaton depths, budgets, streams) is gone after
compilation: a rule is just a sorted include list over the augmented
literal layout plus one signed weight per class.  Rules with nothing
included or an all-zero weight row can never change a prediction and
are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataError, augment_literals
from .sparse import SparseExample, _in_sorted


@dataclass(frozen=True)
class RuleSet:
    n_literals: int
    n_classes: int
    negated_literals_enabled: bool
    includes: tuple[np.ndarray, ...]
    weights: np.ndarray  # (n_rules, n_classes) int32

    @property
    def n_rules(self) -> int:
        return len(self.includes)

    @property
    def n_positions(self) -> int:
        return 2 * self.n_literals if self.negated_literals_enabled \
            else self.n_literals


@dataclass(frozen=True)
class Explanation:
    level: str
    for_class: int
    scores: np.ndarray


def compile_ruleset(bank) -> RuleSet:
    """Compile a trained bank into rules, preserving clause order.

    The include set of a clause is every position with state >= 0;
    clauses with no includes or a zero weight row are dropped.
    """
    includes = []
    weights = []
    if bank.kind == "sparse":
        rows = [bank.included_literals(j) for j in range(bank.n_clauses)]
    else:
        rows = [np.flatnonzero(bank.states[j] >= 0).astype(np.int64)
                for j in range(bank.n_clauses)]
    for j, inc in enumerate(rows):
        if inc.size == 0 or not bank.weights[j].any():
            continue
        includes.append(inc)
        weights.append(bank.weights[j])
    weight_rows = (np.array(weights, dtype=np.int32) if weights
                   else np.empty((0, bank.n_classes), dtype=np.int32))
    cfg = bank.cfg
    return RuleSet(cfg.n_literals, cfg.n_classes,
                   cfg.negated_literals_enabled,
                   tuple(includes), weight_rows)


def _check_width(rs: RuleSet, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape[-1] != rs.n_literals:
        raise DataError(f"input width {x.shape[-1]} does not match "
                        f"rule set n_literals {rs.n_literals}")
    return x


def rule_votes(rs: RuleSet, x: np.ndarray) -> np.ndarray:
    """Class votes of the rule set on one raw feature vector."""
    lit = augment_literals(_check_width(rs, x), rs.negated_literals_enabled)
    votes = np.zeros(rs.n_classes, dtype=np.int64)
    for inc, w in zip(rs.includes, rs.weights):
        if np.all(lit[inc] == 1):
            votes += w
    return votes


def predict(rs: RuleSet, x: np.ndarray) -> int:
    """Argmax class of the rule votes; ties go to the lowest index."""
    return int(np.argmax(rule_votes(rs, x)))


def predict_batch(rs: RuleSet, x: np.ndarray) -> np.ndarray:
    x = _check_width(rs, x)
    return np.array([predict(rs, row) for row in x], dtype=np.int64)


def predict_and_explain(rs: RuleSet, x: np.ndarray, level: str = "literal",
                        for_class: int | None = None) -> tuple[int, Explanation]:
    """Predict and attribute: each firing rule adds its weight for the
    explained class to every literal position it includes.  Feature-level
    scores are the literal score of the feature minus that of its
    negation.
    """
    if level not in ("literal", "feature"):
        raise ValueError("level must be 'literal' or 'feature'")
    lit = augment_literals(_check_width(rs, x), rs.negated_literals_enabled)
    votes = np.zeros(rs.n_classes, dtype=np.int64)
    firing = []
    for inc, w in zip(rs.includes, rs.weights):
        if np.all(lit[inc] == 1):
            votes += w
            firing.append((inc, w))
    predicted = int(np.argmax(votes))
    cls = predicted if for_class is None else for_class
    if not 0 <= cls < rs.n_classes:
        raise ValueError(f"for_class {cls} outside [0, {rs.n_classes})")
    scores = np.zeros(rs.n_positions, dtype=np.int64)
    for inc, w in firing:
        scores[inc] += int(w[cls])
    if level == "feature" and rs.negated_literals_enabled:
        scores = scores[:rs.n_literals] - scores[rs.n_literals:]
    return predicted, Explanation(level, cls, scores)


def sparse_rule_votes(rs: RuleSet, example: SparseExample) -> np.ndarray:
    """Votes on a sparse example (rule sets without negations only)."""
    if rs.negated_literals_enabled:
        raise DataError("sparse inputs require a rule set without negations")
    votes = np.zeros(rs.n_classes, dtype=np.int64)
    for inc, w in zip(rs.includes, rs.weights):
        if np.all(_in_sorted(inc, example.active)):
            votes += w
    return votes
