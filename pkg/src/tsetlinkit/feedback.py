"""Feedback block: aggregates block votes, clips against the threshold,
picks the negative class, and samples per-clause update decisions.

Runs on the coordinating thread between the two block phases of each
example; it owns its own derived stream and never mutates clause banks.
Draw order per example is normative: one draw for the negative class,
then one Bernoulli draw per clause for the target direction, then one
per clause for the negative direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RngStream


def clip_votes(v: int, threshold: int) -> int:
    """Clamp a vote sum to [-T, T]."""
    return min(threshold, max(-threshold, v))


@dataclass(frozen=True)
class UpdateDecision:
    target_class: int
    negative_class: int
    p_target: float
    p_negative: float


def update_probabilities(votes: np.ndarray, label: int, threshold: int,
                         rng: RngStream) -> UpdateDecision:
    """Update probabilities for the target class and a uniformly sampled
    negative class:  p_t = (T - clip(v_label)) / 2T,
    p_n = (T + clip(v_neg)) / 2T."""
    n_classes = votes.shape[0]
    u = rng.next_u01()
    offset = 1 + int(u * (n_classes - 1))
    negative = (label + offset) % n_classes
    p_target = (threshold - clip_votes(int(votes[label]), threshold)) / (2.0 * threshold)
    p_negative = (threshold + clip_votes(int(votes[negative]), threshold)) / (2.0 * threshold)
    return UpdateDecision(label, negative, p_target, p_negative)


def sample_updates(decision: UpdateDecision, n_clauses: int,
                   rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Independent per-clause Bernoulli update flags for both directions;
    all target draws precede all negative draws, in clause order."""
    u_target = rng.u01_block(n_clauses)
    u_negative = rng.u01_block(n_clauses)
    return u_target < decision.p_target, u_negative < decision.p_negative
