"""Dense clause bank: automaton states over every literal position plus
signed per-class clause weights, with Type I / Type II feedback.

The module-level functions are the scalar reference semantics, written
out in plain numpy; `DenseClauseBank` routes the same operations through
the selected kernel backend for speed.  Both consume draws from the same
position-indexed windows, so they agree bit for bit.
"""

from __future__ import annotations

import enum

import numpy as np

from . import kernels
from .core import Config, RngStream, stream_u01_block


class EvalMode(enum.Enum):
    TRAINING = "training"
    INFERENCE = "inference"


class ContractViolation(ValueError):
    """An operation was called with arguments violating its contract."""


def evaluate_clause(states_row: np.ndarray, literals: np.ndarray,
                    mode: EvalMode, budget: int) -> int:
    """Output of a single clause on one literal vector.

    A clause fires when every included literal (state >= 0) is 1.  Empty
    clauses output 1 while training and 0 at inference; while training,
    clauses with more included literals than the budget are forced to 0
    so that subsequent inaction feedback shrinks them.
    """
    if states_row.shape[0] != literals.shape[0]:
        raise ContractViolation(
            f"states row has {states_row.shape[0]} positions, "
            f"literal vector has {literals.shape[0]}")
    included = states_row >= 0
    n_included = int(included.sum())
    if n_included == 0:
        return 1 if mode is EvalMode.TRAINING else 0
    if mode is EvalMode.TRAINING and n_included > budget:
        return 0
    return int(np.all(literals[included] == 1))


def type_i_feedback(states_row: np.ndarray, literals: np.ndarray,
                    clause_output: int, s: float, rng: RngStream, *,
                    boost_true_positive: bool = False,
                    state_min: int = -127, state_max: int = 127) -> None:
    """Stochastic reinforcement combating false negatives.

    Draws one Bernoulli sample per literal position per event, in
    ascending position order, consuming a full window of the stream.
    """
    n = literals.shape[0]
    base = rng.take_window()
    u = stream_u01_block(rng.stream_seed, base, n)
    p_dec = 1.0 / s
    row = states_row.astype(np.int16)
    if clause_output == 1:
        lit_on = literals == 1
        if boost_true_positive:
            inc = lit_on
        else:
            inc = lit_on & (u < (s - 1.0) / s)
        row[inc] += 1
        row[~lit_on & (u < p_dec)] -= 1
    else:
        row[u < p_dec] -= 1
    np.clip(row, state_min, state_max, out=row)
    states_row[:] = row.astype(states_row.dtype)


def type_ii_feedback(states_row: np.ndarray, literals: np.ndarray,
                     clause_output: int) -> None:
    """Deterministic reinforcement combating false positives: push
    excluded zero-valued literals one step toward inclusion."""
    if clause_output != 1:
        return
    mask = (literals == 0) & (states_row < 0)
    states_row[mask] += 1


def clause_update(bank: "DenseClauseBank", clause: int, cls: int,
                  direction: int, update_sampled: bool, clause_output: int,
                  literals: np.ndarray, rng: RngStream) -> None:
    """One sampled feedback event for one (clause, class) pair.

    Target direction (+1) applies Type I to positively weighted clauses
    and Type II otherwise; the negative direction (-1) swaps the roles.
    A firing clause also moves its weight one step in the direction.
    """
    if direction not in (1, -1):
        raise ContractViolation("direction must be +1 or -1")
    if not update_sampled:
        return
    w = bank.weights[clause, cls]
    wants_type_i = (w >= 0) if direction == 1 else (w < 0)
    row = bank.states[clause]
    if wants_type_i:
        type_i_feedback(row, literals, clause_output, bank.s, rng,
                        boost_true_positive=bank.boost_true_positive,
                        state_min=bank.state_min, state_max=bank.state_max)
    else:
        type_ii_feedback(row, literals, clause_output)
        rng.take_window()
    if clause_output == 1:
        bank.weights[clause, cls] += direction


def compute_block_votes(bank: "DenseClauseBank", literals: np.ndarray,
                        mode: EvalMode) -> np.ndarray:
    """Weight-summed class votes over the bank's clauses; pure."""
    outputs = bank.clause_outputs(literals, mode)
    return bank.votes(outputs)


class DenseClauseBank:
    """States and weights for a contiguous group of clauses.

    Owned by exactly one clause block during training; never shared
    across threads.
    """

    kind = "dense"

    def __init__(self, cfg: Config, n_clauses: int | None = None):
        self.cfg = cfg
        self.n_clauses = cfg.n_clauses if n_clauses is None else n_clauses
        self.n_positions = cfg.n_literal_positions
        self.n_classes = cfg.n_classes
        self.s = cfg.s
        self.boost_true_positive = cfg.boost_true_positive
        self.state_min = cfg.state_min
        self.state_max = cfg.state_max
        self.budget = cfg.effective_budget
        self.states = np.full((self.n_clauses, self.n_positions),
                              cfg.init_state, dtype=np.int8)
        self.weights = np.zeros((self.n_clauses, self.n_classes),
                                dtype=np.int32)

    def clause_outputs(self, literals: np.ndarray, mode: EvalMode) -> np.ndarray:
        if literals.shape[0] != self.n_positions:
            raise ContractViolation("literal vector width mismatch")
        return kernels.clause_outputs(self.states, literals,
                                      mode is EvalMode.TRAINING, self.budget)

    def votes(self, outputs: np.ndarray) -> np.ndarray:
        return outputs.astype(np.int64) @ self.weights.astype(np.int64)

    def apply_feedback(self, literals: np.ndarray, outputs: np.ndarray,
                       label: int, negative: int,
                       update_target: np.ndarray, update_negative: np.ndarray,
                       rng: RngStream) -> None:
        rng.counter = int(kernels.bank_feedback(
            self.states, self.weights, literals, outputs, label, negative,
            update_target, update_negative, self.s, self.boost_true_positive,
            self.state_min, self.state_max,
            np.uint64(rng.stream_seed), np.uint64(rng.counter)))

    def batch_outputs(self, x_lit: np.ndarray, mode: EvalMode) -> np.ndarray:
        return kernels.clause_outputs_batch(self.states, x_lit,
                                            mode is EvalMode.TRAINING,
                                            self.budget)

    def batch_votes(self, x_lit: np.ndarray) -> np.ndarray:
        """Inference-mode votes for every row of a literal matrix."""
        outputs = self.batch_outputs(x_lit, EvalMode.INFERENCE)
        return outputs.astype(np.int64) @ self.weights.astype(np.int64)

    def copy(self) -> "DenseClauseBank":
        dup = DenseClauseBank(self.cfg, self.n_clauses)
        dup.states[:] = self.states
        dup.weights[:] = self.weights
        return dup
