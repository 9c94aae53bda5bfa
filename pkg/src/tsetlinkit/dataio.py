"""Dataset parsing and model serialization.

Datasets are human-inspectable text; models are an exact little-endian
binary format (magic ``GTM1``) that round-trips states, weights and
rule sets byte for byte.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .core import Config, DataError
from .dense import DenseClauseBank
from .predictor import RuleSet
from .sparse import SparseClauseBank, SparseDataset, SparseExample

MAGIC = b"GTM1"
FORMAT_VERSION = 1

_KIND_DENSE = 1
_KIND_SPARSE = 2
_KIND_RULESET = 3

_UNLIMITED = 0xFFFFFFFF


class ParseError(DataError):
    """Malformed dataset text; the message carries the line number."""


class ModelFormatError(DataError):
    """Malformed model file (bad magic, bad version, or truncation)."""


# -- dataset text formats --------------------------------------------------


def load_dense(path) -> tuple[np.ndarray, np.ndarray]:
    """Load comma-separated 0/1 features with a trailing integer label,
    one example per line; width is fixed by the first line."""
    rows = []
    labels = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields) - 1
                if width < 1:
                    raise ParseError(f"line {lineno}: expected at least one "
                                     "feature and a label")
            elif len(fields) - 1 != width:
                raise ParseError(f"line {lineno}: ragged row, expected "
                                 f"{width} features")
            try:
                label = int(fields[-1])
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer label "
                                 f"{fields[-1]!r}") from None
            bits = []
            for f in fields[:-1]:
                if f == "0":
                    bits.append(0)
                elif f == "1":
                    bits.append(1)
                else:
                    raise ParseError(f"line {lineno}: non-binary feature "
                                     f"value {f!r}")
            rows.append(bits)
            labels.append(label)
    if width is None:
        raise ParseError("line 0: empty dataset file")
    return (np.array(rows, dtype=np.uint8),
            np.array(labels, dtype=np.int64))


def save_dense(x: np.ndarray, y: np.ndarray, path) -> None:
    x = np.asarray(x, dtype=np.uint8)
    y = np.asarray(y, dtype=np.int64)
    with open(path, "w", encoding="ascii") as fh:
        for row, label in zip(x, y):
            fh.write(",".join(str(int(v)) for v in row))
            fh.write(f",{int(label)}\n")


def load_sparse(path) -> SparseDataset:
    """Load ``label<TAB>i1 i2 ...`` lines under a ``#literals=N`` header;
    indices must be ascending, unique, and inside the universe."""
    examples = []
    n_literals = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if n_literals is None:
                if not line.startswith("#literals="):
                    raise ParseError(f"line {lineno}: missing #literals=N "
                                     "header")
                try:
                    n_literals = int(line[len("#literals="):])
                except ValueError:
                    raise ParseError(f"line {lineno}: bad literal count in "
                                     "header") from None
                if n_literals < 1:
                    raise ParseError(f"line {lineno}: literal count must be "
                                     "positive")
                continue
            label_part, _, index_part = line.partition("\t")
            try:
                label = int(label_part)
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer label "
                                 f"{label_part!r}") from None
            try:
                indices = [int(tok) for tok in index_part.split()]
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer literal "
                                 "index") from None
            arr = np.array(indices, dtype=np.int64)
            if arr.size and (np.any(np.diff(arr) <= 0) or arr[0] < 0):
                raise ParseError(f"line {lineno}: indices must be ascending "
                                 "and unique")
            if arr.size and arr[-1] >= n_literals:
                raise ParseError(f"line {lineno}: index {int(arr[-1])} "
                                 f"outside universe of {n_literals}")
            examples.append(SparseExample(arr, label))
    if n_literals is None:
        raise ParseError("line 0: empty dataset file")
    return SparseDataset(n_literals, examples)


def save_sparse(data: SparseDataset, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"#literals={data.n_literals}\n")
        for ex in data.examples:
            indices = " ".join(str(int(i)) for i in ex.active)
            fh.write(f"{ex.label}\t{indices}\n")


# -- binary model format ---------------------------------------------------


class _Reader:
    def __init__(self, buf: bytes):
        self._view = memoryview(buf)
        self._pos = 0

    def take(self, n: int) -> memoryview:
        if self._pos + n > len(self._view):
            raise ModelFormatError("truncated model file")
        out = self._view[self._pos:self._pos + n]
        self._pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack("<" + fmt, self.take(struct.calcsize("<" + fmt)))

    def done(self) -> bool:
        return self._pos == len(self._view)


_CONFIG_FMT = "QIIdiIBbbbQIBbI"


def _pack_config(cfg: Config) -> bytes:
    budget = _UNLIMITED if cfg.n_literal_budget is None else cfg.n_literal_budget
    capacity = _UNLIMITED if cfg.sparse_capacity is None else cfg.sparse_capacity
    return struct.pack(
        "<" + _CONFIG_FMT,
        cfg.n_literals, cfg.n_clauses, cfg.n_classes, cfg.s, cfg.threshold,
        budget, int(cfg.boost_true_positive), cfg.init_state, cfg.state_min,
        cfg.state_max, cfg.seed, cfg.n_blocks,
        int(cfg.negated_literals_enabled), cfg.sparse_floor, capacity)


def _unpack_config(reader: _Reader) -> Config:
    (n_literals, n_clauses, n_classes, s, threshold, budget, boost,
     init_state, state_min, state_max, seed, n_blocks, negated, floor,
     capacity) = reader.unpack(_CONFIG_FMT)
    return Config(
        n_literals=n_literals, n_clauses=n_clauses, n_classes=n_classes,
        s=s, threshold=threshold,
        n_literal_budget=None if budget == _UNLIMITED else budget,
        boost_true_positive=bool(boost), init_state=init_state,
        state_min=state_min, state_max=state_max, seed=seed,
        n_blocks=n_blocks, negated_literals_enabled=bool(negated),
        sparse_floor=floor,
        sparse_capacity=None if capacity == _UNLIMITED else capacity)


def save_model(model, path) -> None:
    """Serialize a dense bank, sparse bank, or rule set."""
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<H", FORMAT_VERSION))
    if isinstance(model, DenseClauseBank):
        buf.write(struct.pack("<B", _KIND_DENSE))
        buf.write(_pack_config(model.cfg))
        buf.write(np.ascontiguousarray(model.states).tobytes())
        buf.write(np.ascontiguousarray(
            model.weights.astype("<i4", copy=False)).tobytes())
    elif isinstance(model, SparseClauseBank):
        buf.write(struct.pack("<B", _KIND_SPARSE))
        buf.write(_pack_config(model.cfg))
        for j in range(model.n_clauses):
            idx = model.clause_literals[j]
            st = model.clause_states[j]
            buf.write(struct.pack("<I", idx.size))
            for lit, state in zip(idx, st):
                buf.write(struct.pack("<Ib", int(lit), int(state)))
        buf.write(np.ascontiguousarray(
            model.weights.astype("<i4", copy=False)).tobytes())
    elif isinstance(model, RuleSet):
        buf.write(struct.pack("<B", _KIND_RULESET))
        buf.write(struct.pack("<QII", model.n_literals, model.n_rules,
                              model.n_classes))
        buf.write(struct.pack("<B", int(model.negated_literals_enabled)))
        for inc, row in zip(model.includes, model.weights):
            buf.write(struct.pack("<I", inc.size))
            buf.write(np.ascontiguousarray(
                inc.astype("<u4", copy=False)).tobytes())
            buf.write(np.ascontiguousarray(
                row.astype("<i4", copy=False)).tobytes())
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    Path(path).write_bytes(buf.getvalue())


def load_model(path):
    """Inverse of `save_model`; returns the same kind of object."""
    raw = Path(path).read_bytes()
    reader = _Reader(raw)
    if bytes(reader.take(4)) != MAGIC:
        raise ModelFormatError("bad magic: not a model file")
    (version,) = reader.unpack("H")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    (kind,) = reader.unpack("B")
    if kind == _KIND_DENSE:
        cfg = _unpack_config(reader)
        bank = DenseClauseBank(cfg)
        n_state = bank.n_clauses * bank.n_positions
        bank.states = np.frombuffer(reader.take(n_state), dtype=np.int8) \
            .reshape(bank.n_clauses, bank.n_positions).copy()
        n_w = bank.n_clauses * bank.n_classes
        bank.weights = np.frombuffer(reader.take(4 * n_w), dtype="<i4") \
            .reshape(bank.n_clauses, bank.n_classes).astype(np.int32)
        model = bank
    elif kind == _KIND_SPARSE:
        cfg = _unpack_config(reader)
        bank = SparseClauseBank(cfg)
        for j in range(bank.n_clauses):
            (count,) = reader.unpack("I")
            lits = np.empty(count, dtype=np.int64)
            states = np.empty(count, dtype=np.int8)
            for i in range(count):
                lit, state = reader.unpack("Ib")
                lits[i] = lit
                states[i] = state
            bank.clause_literals[j] = lits
            bank.clause_states[j] = states
        n_w = bank.n_clauses * bank.n_classes
        bank.weights = np.frombuffer(reader.take(4 * n_w), dtype="<i4") \
            .reshape(bank.n_clauses, bank.n_classes).astype(np.int32)
        model = bank
    elif kind == _KIND_RULESET:
        n_literals, n_rules, n_classes = reader.unpack("QII")
        (negated,) = reader.unpack("B")
        includes = []
        weights = np.empty((n_rules, n_classes), dtype=np.int32)
        for r in range(n_rules):
            (count,) = reader.unpack("I")
            inc = np.frombuffer(reader.take(4 * count), dtype="<u4")
            includes.append(inc.astype(np.int64))
            weights[r] = np.frombuffer(reader.take(4 * n_classes),
                                       dtype="<i4")
        model = RuleSet(n_literals, n_classes, bool(negated),
                        tuple(includes), weights)
    else:
        raise ModelFormatError(f"unknown model kind {kind}")
    if not reader.done():
        raise ModelFormatError("trailing bytes after model payload")
    return model
