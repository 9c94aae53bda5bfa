"""Executor and input block: the per-example training loop, epoch
iteration, shuffling, clause-block threading, and evaluation.

Each training example passes through four steps: the input block
prepares it; every clause block evaluates its clauses and reports
partial votes; the feedback block aggregates, clips, samples the
negative class and the per-clause update decisions; and the clause
blocks apply their updates.  Blocks own private banks and private
draw streams, and votes are an order-independent integer sum, so the
trained model depends on the block count but never on the worker
count or thread schedule.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Config,
    DataError,
    FEEDBACK_STREAM,
    RngStream,
    SHUFFLE_STREAM,
    augment_literals,
)
from .dense import DenseClauseBank, EvalMode
from .feedback import sample_updates, update_probabilities
from .sparse import SparseClauseBank, SparseDataset, SparseExample


def partition_clauses(n_clauses: int, n_blocks: int) -> list[range]:
    """Contiguous clause ranges with sizes differing by at most one."""
    if not 1 <= n_blocks <= n_clauses:
        raise ValueError("n_blocks must be in [1, n_clauses]")
    base, extra = divmod(n_clauses, n_blocks)
    ranges = []
    start = 0
    for b in range(n_blocks):
        size = base + (1 if b < extra else 0)
        ranges.append(range(start, start + size))
        start += size
    return ranges


def shuffle_permutation(n: int, rng: RngStream) -> np.ndarray:
    """Seeded Fisher-Yates permutation of [0, n)."""
    perm = np.arange(n, dtype=np.int64)
    if n > 1:
        u = rng.u01_block(n - 1)
        for t, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[t] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass
class EpochMetric:
    epoch: int
    accuracy: float | None
    seconds: float


@dataclass
class TrainRun:
    config: Config
    epoch_metrics: list[EpochMetric]
    model: DenseClauseBank | SparseClauseBank


@dataclass
class ClauseBlock:
    index: int
    clauses: range
    bank: DenseClauseBank | SparseClauseBank
    rng: RngStream
    outputs: np.ndarray | None = None


class _InputBlock:
    """Validated training data plus the per-epoch shuffle stream."""

    def __init__(self, cfg: Config, data, name: str):
        self.sparse = isinstance(data, SparseDataset)
        if self.sparse:
            if data.n_literals != cfg.n_literals:
                raise DataError(
                    f"{name}: dataset universe {data.n_literals} does not "
                    f"match config n_literals {cfg.n_literals}")
            for ex in data.examples:
                ex.check_range(cfg.n_literals)
            self.examples = data.examples
            self.labels = data.labels
        else:
            x, y = data
            x = np.ascontiguousarray(x, dtype=np.uint8)
            if x.ndim != 2 or x.shape[1] != cfg.n_literals:
                raise DataError(
                    f"{name}: feature width {x.shape[-1] if x.ndim else 0} "
                    f"does not match config n_literals {cfg.n_literals}")
            self.literal_matrix = augment_literals(
                x, cfg.negated_literals_enabled)
            self.labels = np.asarray(y, dtype=np.int64)
            if self.literal_matrix.shape[0] != self.labels.shape[0]:
                raise DataError(f"{name}: example/label count mismatch")
        if len(self.labels) == 0:
            raise DataError(f"{name}: dataset is empty")
        if self.labels.min() < 0 or self.labels.max() >= cfg.n_classes:
            raise DataError(f"{name}: label outside [0, {cfg.n_classes})")

    def __len__(self) -> int:
        return len(self.labels)

    def prepared(self, idx: int):
        if self.sparse:
            return self.examples[idx]
        return self.literal_matrix[idx]


def _make_blocks(cfg: Config, sparse: bool,
                 candidates: np.ndarray | None) -> list[ClauseBlock]:
    blocks = []
    for b, rng_range in enumerate(partition_clauses(cfg.n_clauses, cfg.n_blocks)):
        if sparse:
            bank = SparseClauseBank(cfg, len(rng_range), candidates)
        else:
            bank = DenseClauseBank(cfg, len(rng_range))
        blocks.append(ClauseBlock(b, rng_range, bank,
                                  RngStream.derive(cfg.seed, b)))
    return blocks


def merge_blocks(cfg: Config, blocks: list[ClauseBlock]):
    """Concatenate block banks into one model bank, clause order preserved."""
    if blocks[0].bank.kind == "dense":
        model = DenseClauseBank(cfg)
        for blk in blocks:
            model.states[blk.clauses.start:blk.clauses.stop] = blk.bank.states
            model.weights[blk.clauses.start:blk.clauses.stop] = blk.bank.weights
        return model
    model = SparseClauseBank(cfg, candidate_literals=blocks[0].bank.candidates)
    lits, states, rows = [], [], []
    for blk in blocks:
        lits.extend(blk.bank.clause_literals)
        states.extend(blk.bank.clause_states)
        rows.append(blk.bank.weights)
    model.clause_literals = lits
    model.clause_states = states
    model.weights = np.concatenate(rows, axis=0)
    return model


class _StepContext:
    """Per-example state passed between the coordinator and workers.

    A fresh context per example keeps in-flight updates of one step from
    ever seeing the next step's fields.
    """

    __slots__ = ("step", "prepared", "label", "decision", "upd_t", "upd_n")

    def __init__(self, step, prepared, label):
        self.step = step
        self.prepared = prepared
        self.label = label
        self.decision = None
        self.upd_t = None
        self.upd_n = None


class _SerialDriver:
    def __init__(self, blocks):
        self.blocks = blocks

    def run_example(self, ctx, eval_fn, decide_fn, update_fn):
        for blk in self.blocks:
            eval_fn(blk, ctx)
        decide_fn(ctx)
        for blk in self.blocks:
            update_fn(blk, ctx)

    def close(self):
        pass


class _ParallelDriver:
    """Persistent worker threads in barrier lockstep with the coordinator.

    Three rendezvous per example: command published, votes written,
    decision published.  Workers arriving back at the command barrier is
    what tells the coordinator the previous updates are complete.
    """

    def __init__(self, blocks, n_workers):
        self.blocks = blocks
        groups = [blocks[i::n_workers] for i in range(n_workers)]
        self.groups = [g for g in groups if g]
        parties = len(self.groups) + 1
        self.command_ready = threading.Barrier(parties)
        self.votes_ready = threading.Barrier(parties)
        self.decision_ready = threading.Barrier(parties)
        self.command = None
        self.payload = None
        self.errors: list[BaseException] = []
        self.threads = [
            threading.Thread(target=self._worker_loop, args=(g,), daemon=True)
            for g in self.groups
        ]
        for t in self.threads:
            t.start()

    def _worker_loop(self, my_blocks):
        try:
            while True:
                self.command_ready.wait()
                if self.command == "stop":
                    return
                ctx, eval_fn, update_fn = self.payload
                for blk in my_blocks:
                    eval_fn(blk, ctx)
                self.votes_ready.wait()
                self.decision_ready.wait()
                for blk in my_blocks:
                    update_fn(blk, ctx)
        except threading.BrokenBarrierError:
            return
        except BaseException as exc:  # propagate to the coordinator
            self.errors.append(exc)
            self._abort()

    def _abort(self):
        self.command_ready.abort()
        self.votes_ready.abort()
        self.decision_ready.abort()

    def run_example(self, ctx, eval_fn, decide_fn, update_fn):
        try:
            self.command = "step"
            self.payload = (ctx, eval_fn, update_fn)
            self.command_ready.wait()
            self.votes_ready.wait()
            decide_fn(ctx)
            self.decision_ready.wait()
        except threading.BrokenBarrierError:
            self.close(join_only=True)
            if self.errors:
                raise self.errors[0]
            raise

    def close(self, join_only=False):
        if not join_only:
            try:
                self.command = "stop"
                self.command_ready.wait()
            except threading.BrokenBarrierError:
                pass
        for t in self.threads:
            t.join(timeout=30.0)
        if self.errors and not join_only:
            raise self.errors[0]


def _resolve_jobs(n_jobs: int, n_blocks: int) -> int:
    if n_jobs == -1:
        n_jobs = os.cpu_count() or 1
    if n_jobs < 1:
        raise ValueError("n_jobs must be positive or -1")
    return min(n_jobs, n_blocks)


def train(cfg: Config, train_data, eval_data=None, n_epochs: int = 1,
          n_jobs: int = 1, epoch_callback=None, observer=None) -> TrainRun:
    """Run the four-step training loop for ``n_epochs`` epochs.

    ``train_data`` is either ``(x, y)`` with binary features or a
    `SparseDataset`; ``eval_data`` (same shape) adds an inference-mode
    accuracy to each epoch's metrics.  ``observer`` is a testing hook
    called as ``observer(event, step, block_index)`` at each phase
    transition.
    """
    inp = _InputBlock(cfg, train_data, "train data")
    evl = _InputBlock(cfg, eval_data, "eval data") if eval_data is not None else None
    candidates = None
    if inp.sparse:
        candidates = train_data.candidate_literals()
    blocks = _make_blocks(cfg, inp.sparse, candidates)

    shuffle_rng = RngStream.derive(cfg.seed, SHUFFLE_STREAM)
    feedback_rng = RngStream.derive(cfg.seed, FEEDBACK_STREAM)
    votes_parts = np.zeros((len(blocks), cfg.n_classes), dtype=np.int64)

    def eval_block(blk, ctx):
        blk.outputs = blk.bank.clause_outputs(ctx.prepared, EvalMode.TRAINING)
        votes_parts[blk.index] = blk.bank.votes(blk.outputs)
        if observer:
            observer("votes", ctx.step, blk.index)

    def decide(ctx):
        votes = votes_parts.sum(axis=0)
        ctx.decision = update_probabilities(votes, ctx.label,
                                            cfg.threshold, feedback_rng)
        ctx.upd_t, ctx.upd_n = sample_updates(ctx.decision, cfg.n_clauses,
                                              feedback_rng)
        if observer:
            observer("decision", ctx.step, None)

    def update_block(blk, ctx):
        if observer:
            observer("update", ctx.step, blk.index)
        sl = slice(blk.clauses.start, blk.clauses.stop)
        blk.bank.apply_feedback(ctx.prepared, blk.outputs, ctx.label,
                                ctx.decision.negative_class,
                                ctx.upd_t[sl], ctx.upd_n[sl], blk.rng)

    n_workers = _resolve_jobs(n_jobs, len(blocks))
    driver = (_ParallelDriver(blocks, n_workers) if n_workers > 1
              else _SerialDriver(blocks))
    metrics: list[EpochMetric] = []
    try:
        for epoch in range(n_epochs):
            t0 = time.perf_counter()
            order = shuffle_permutation(len(inp), shuffle_rng)
            for step, idx in enumerate(order):
                ctx = _StepContext((epoch, step), inp.prepared(idx),
                                   int(inp.labels[idx]))
                driver.run_example(ctx, eval_block, decide, update_block)
            accuracy = None
            if evl is not None:
                accuracy = _blocks_accuracy(blocks, evl)
            metrics.append(EpochMetric(epoch, accuracy,
                                       time.perf_counter() - t0))
            if epoch_callback:
                epoch_callback(metrics[-1])
    finally:
        driver.close()
    return TrainRun(cfg, metrics, merge_blocks(cfg, blocks))


def _blocks_accuracy(blocks, inp: _InputBlock) -> float:
    votes = None
    for blk in blocks:
        if inp.sparse:
            part = blk.bank.batch_votes(inp.examples)
        else:
            part = blk.bank.batch_votes(inp.literal_matrix)
        votes = part if votes is None else votes + part
    pred = np.argmax(votes, axis=1)
    return float(np.mean(pred == inp.labels))


def dataset_votes(bank, data) -> np.ndarray:
    """Inference-mode votes of a model bank on a whole dataset."""
    if isinstance(data, SparseDataset):
        if bank.kind != "sparse":
            raise DataError("sparse data requires a sparse model")
        for ex in data.examples:
            ex.check_range(bank.n_literals)
        return bank.batch_votes(data.examples)
    x, _ = data
    x = np.ascontiguousarray(x, dtype=np.uint8)
    if bank.kind == "sparse":
        raise DataError("sparse model requires sparse data")
    if x.shape[1] != bank.cfg.n_literals:
        raise DataError(
            f"feature width {x.shape[1]} does not match model "
            f"n_literals {bank.cfg.n_literals}")
    x_lit = augment_literals(x, bank.cfg.negated_literals_enabled)
    return bank.batch_votes(x_lit)


def evaluate(bank, data) -> float:
    """Accuracy of inference-mode argmax votes (ties to the lowest class)."""
    if isinstance(data, SparseDataset):
        labels = data.labels
    else:
        labels = np.asarray(data[1], dtype=np.int64)
    votes = dataset_votes(bank, data)
    pred = np.argmax(votes, axis=1)
    return float(np.mean(pred == labels))
