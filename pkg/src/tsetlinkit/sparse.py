"""Sparse clause bank: per-clause sorted (literal, state) pairs over an
implicit floor state, for universes far too wide to materialize.

Memory tracks the data, not the vocabulary: a pair exists only while its
state sits above the floor; pairs falling back to the floor are evicted.
Feedback is restricted to literals that can matter — the stored pairs,
the example's active literals, and (for Type II) the bank's candidate
set, i.e. literals observed active anywhere in the training data.
Indices outside the candidate set are never touched or stored, so
padding the universe with dead indices changes nothing.

With the floor placed at the dense engine's state clamp and negations
disabled, the restriction is lossless: updates outside it would be
decrements already clamped at the floor, so the sparse engine replays
the dense engine exactly while storing only the pairs above floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Config, RngStream, stream_u01
from .dense import ContractViolation, EvalMode


@dataclass(frozen=True)
class SparseExample:
    """Active literal indices (sorted, unique) plus a class label."""

    active: np.ndarray
    label: int

    def __post_init__(self):
        active = np.asarray(self.active, dtype=np.int64)
        if active.ndim != 1:
            raise ContractViolation("active indices must be a 1-D sequence")
        if active.size and (np.any(np.diff(active) <= 0) or active[0] < 0):
            raise ContractViolation("active indices must be sorted, unique "
                                    "and non-negative")
        object.__setattr__(self, "active", active)

    def check_range(self, n_literals: int) -> None:
        if self.active.size and self.active[-1] >= n_literals:
            raise ContractViolation(
                f"active index {int(self.active[-1])} outside universe of "
                f"{n_literals} literals")


@dataclass
class SparseDataset:
    """A sparse example list with its declared literal universe."""

    n_literals: int
    examples: list[SparseExample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([ex.label for ex in self.examples], dtype=np.int64)

    def candidate_literals(self) -> np.ndarray:
        """Union of active indices over the dataset, sorted."""
        if not self.examples:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([ex.active for ex in self.examples]))

    def densify(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.zeros((len(self.examples), self.n_literals), dtype=np.uint8)
        for i, ex in enumerate(self.examples):
            x[i, ex.active] = 1
        return x, self.labels


class SparseClauseBank:
    """Sorted pair lists per clause; weights as in the dense bank."""

    kind = "sparse"

    def __init__(self, cfg: Config, n_clauses: int | None = None,
                 candidate_literals: np.ndarray | None = None):
        if cfg.negated_literals_enabled:
            raise ContractViolation(
                "sparse banks require negated_literals_enabled=False")
        self.cfg = cfg
        self.n_clauses = cfg.n_clauses if n_clauses is None else n_clauses
        self.n_literals = cfg.n_literals
        self.n_positions = cfg.n_literals
        self.n_classes = cfg.n_classes
        self.s = cfg.s
        self.boost_true_positive = cfg.boost_true_positive
        self.floor = cfg.sparse_floor
        self.state_max = cfg.state_max
        self.capacity = cfg.sparse_capacity
        self.budget = cfg.effective_budget
        if candidate_literals is None:
            candidate_literals = np.empty(0, dtype=np.int64)
        self.candidates = np.asarray(candidate_literals, dtype=np.int64)
        self.clause_literals: list[np.ndarray] = [
            np.empty(0, dtype=np.int64) for _ in range(self.n_clauses)]
        self.clause_states: list[np.ndarray] = [
            np.empty(0, dtype=np.int8) for _ in range(self.n_clauses)]
        self.weights = np.zeros((self.n_clauses, self.n_classes),
                                dtype=np.int32)

    # -- queries ----------------------------------------------------------

    def lookup(self, clause: int, literal: int) -> int:
        """Stored state of (clause, literal), or the floor if unstored."""
        idx = self.clause_literals[clause]
        pos = int(np.searchsorted(idx, literal))
        if pos < idx.size and idx[pos] == literal:
            return int(self.clause_states[clause][pos])
        return self.floor

    def included_literals(self, clause: int) -> np.ndarray:
        idx = self.clause_literals[clause]
        return idx[self.clause_states[clause] >= 0]

    def evaluate_clause(self, clause: int, example: SparseExample,
                        mode: EvalMode) -> int:
        """Fires iff every included literal appears in the example's
        active set; same empty-clause and budget conventions as dense."""
        include = self.included_literals(clause)
        if include.size == 0:
            return 1 if mode is EvalMode.TRAINING else 0
        if mode is EvalMode.TRAINING and include.size > self.budget:
            return 0
        return int(np.all(_in_sorted(include, example.active)))

    def clause_outputs(self, example: SparseExample, mode: EvalMode) -> np.ndarray:
        out = np.empty(self.n_clauses, dtype=np.uint8)
        for j in range(self.n_clauses):
            out[j] = self.evaluate_clause(j, example, mode)
        return out

    def votes(self, outputs: np.ndarray) -> np.ndarray:
        return outputs.astype(np.int64) @ self.weights.astype(np.int64)

    def batch_votes(self, examples: list[SparseExample]) -> np.ndarray:
        votes = np.empty((len(examples), self.n_classes), dtype=np.int64)
        for i, ex in enumerate(examples):
            votes[i] = self.votes(self.clause_outputs(ex, EvalMode.INFERENCE))
        return votes

    def memory_report(self) -> dict:
        """Stored pair count and a byte estimate (index + state bytes per
        pair, plus the weight matrix)."""
        pairs = sum(int(a.size) for a in self.clause_literals)
        bytes_ = pairs * (4 + 1) + self.weights.size * 4
        return {"pairs": pairs, "bytes": bytes_}

    # -- feedback ---------------------------------------------------------

    def _set_clause(self, clause: int, literals: list[int], states: list[int]):
        self.clause_literals[clause] = np.array(literals, dtype=np.int64)
        self.clause_states[clause] = np.array(states, dtype=np.int8)

    def _type_i(self, clause: int, example: SparseExample, output: int,
                rng: RngStream) -> None:
        base = rng.take_window()
        seed = rng.stream_seed
        p_inc = (self.s - 1.0) / self.s
        p_dec = 1.0 / self.s
        stored = self.clause_literals[clause]
        states = self.clause_states[clause]
        domain = np.union1d(stored, example.active)
        active_mask = _in_sorted(domain, example.active)
        stored_pos = np.searchsorted(stored, domain)
        new_lits: list[int] = []
        new_states: list[int] = []
        n_stored = stored.size
        for i, lit in enumerate(domain):
            pos = stored_pos[i]
            was_stored = pos < n_stored and stored[pos] == lit
            st = int(states[pos]) if was_stored else self.floor
            u = stream_u01(seed, base + int(lit))
            if output == 1:
                if active_mask[i]:
                    if (self.boost_true_positive or u < p_inc) and st < self.state_max:
                        st += 1
                elif u < p_dec and st > self.floor:
                    st -= 1
            elif u < p_dec and st > self.floor:
                st -= 1
            self._keep(was_stored, lit, st, new_lits, new_states)
        self._set_clause(clause, new_lits, new_states)

    def _type_ii(self, clause: int, example: SparseExample, output: int) -> None:
        if output != 1:
            return
        stored = self.clause_literals[clause]
        states = self.clause_states[clause]
        domain = np.union1d(stored, self.candidates)
        active_mask = _in_sorted(domain, example.active)
        stored_pos = np.searchsorted(stored, domain)
        new_lits: list[int] = []
        new_states: list[int] = []
        n_stored = stored.size
        for i, lit in enumerate(domain):
            pos = stored_pos[i]
            was_stored = pos < n_stored and stored[pos] == lit
            st = int(states[pos]) if was_stored else self.floor
            if not active_mask[i] and st < 0:
                st += 1
            self._keep(was_stored, lit, st, new_lits, new_states)
        self._set_clause(clause, new_lits, new_states)

    def _keep(self, was_stored: bool, lit: int, st: int,
              new_lits: list[int], new_states: list[int]) -> None:
        if st <= self.floor:
            return  # evicted (or never materialized)
        if not was_stored and self.capacity is not None \
                and len(new_lits) >= self.capacity:
            return  # insertion skipped, existing pairs untouched
        new_lits.append(int(lit))
        new_states.append(st)

    def feedback(self, clause: int, cls: int, direction: int,
                 update_sampled: bool, clause_output: int,
                 example: SparseExample, rng: RngStream) -> None:
        """Sparse counterpart of the dense clause update; same decision
        logic, restricted update domain, one draw window per event."""
        if direction not in (1, -1):
            raise ContractViolation("direction must be +1 or -1")
        if not update_sampled:
            return
        w = self.weights[clause, cls]
        wants_type_i = (w >= 0) if direction == 1 else (w < 0)
        if wants_type_i:
            self._type_i(clause, example, clause_output, rng)
        else:
            self._type_ii(clause, example, clause_output)
            rng.take_window()
        if clause_output == 1:
            self.weights[clause, cls] += direction

    def apply_feedback(self, example: SparseExample, outputs: np.ndarray,
                       label: int, negative: int,
                       update_target: np.ndarray, update_negative: np.ndarray,
                       rng: RngStream) -> None:
        for j in range(self.n_clauses):
            if update_target[j]:
                self.feedback(j, label, 1, True, int(outputs[j]), example, rng)
            if update_negative[j]:
                self.feedback(j, negative, -1, True, int(outputs[j]), example, rng)

    def copy(self) -> "SparseClauseBank":
        dup = SparseClauseBank(self.cfg, self.n_clauses, self.candidates)
        dup.clause_literals = [a.copy() for a in self.clause_literals]
        dup.clause_states = [a.copy() for a in self.clause_states]
        dup.weights = self.weights.copy()
        return dup


def _in_sorted(values: np.ndarray, sorted_ref: np.ndarray) -> np.ndarray:
    """Membership of each value in a sorted unique reference array."""
    if sorted_ref.size == 0:
        return np.zeros(values.shape, dtype=bool)
    pos = np.searchsorted(sorted_ref, values)
    pos_clipped = np.minimum(pos, sorted_ref.size - 1)
    return (pos < sorted_ref.size) & (sorted_ref[pos_clipped] == values)


def sparse_lookup(bank: SparseClauseBank, clause: int, literal: int) -> int:
    return bank.lookup(clause, literal)


def sparse_evaluate_clause(bank: SparseClauseBank, clause: int,
                           example: SparseExample, mode: EvalMode) -> int:
    return bank.evaluate_clause(clause, example, mode)


def sparse_feedback(bank: SparseClauseBank, clause: int, cls: int,
                    direction: int, update_sampled: bool, clause_output: int,
                    example: SparseExample, rng: RngStream) -> None:
    bank.feedback(clause, cls, direction, update_sampled, clause_output,
                  example, rng)


def sparse_memory_report(bank: SparseClauseBank) -> dict:
    return bank.memory_report()
