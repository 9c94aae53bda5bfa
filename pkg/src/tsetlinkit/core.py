"""Core types shared by every other module: configuration, seeded stream
derivation, literal augmentation, and the canonical model memory formulas.

All randomness in the package flows through counter-based SplitMix64
streams.  A stream is identified by a 64-bit stream seed (derived from the
model seed and a stream index) and a draw counter; draw ``k`` of a stream
is a pure function of ``(stream_seed, k)``.  This makes draws random-access:
an engine may skip any subset of a draw window without generating the
skipped values, while remaining bit-identical to an engine that consumes
the window sequentially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Config",
    "ConfigError",
    "DataError",
    "mix64",
    "derive_stream",
    "stream_u01",
    "stream_u64",
    "stream_u01_block",
    "stream_u64_block",
    "RngStream",
    "augment_literals",
    "dense_state_bytes",
    "dense_weight_bytes",
    "SHUFFLE_STREAM",
    "FEEDBACK_STREAM",
    "SEARCH_STREAM",
    "KFOLD_STREAM",
    "HOLDOUT_STREAM",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_C1 = 0xBF58476D1CE4E5B9
_MIX_C2 = 0x94D049BB133111EB
_INV53 = 2.0**-53

# Reserved stream indices; clause blocks use their block index, so block
# counts must stay below the smallest reserved value.
SHUFFLE_STREAM = 0xD157
FEEDBACK_STREAM = 0xFEED
SEARCH_STREAM = 0x5EA7
KFOLD_STREAM = 0xF01D
HOLDOUT_STREAM = 0x401D

_MAX_BLOCKS = SHUFFLE_STREAM  # exclusive upper bound for block indices


class ConfigError(ValueError):
    """Raised when a configuration violates its invariants."""


class DataError(ValueError):
    """Raised for malformed datasets or dataset/model mismatches."""


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit permutation with strong avalanche."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_C1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_C2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _rotl64(v: int, r: int) -> int:
    v &= _MASK64
    return ((v << r) | (v >> (64 - r))) & _MASK64


def derive_stream(seed: int, index: int) -> int:
    """Derive the 64-bit seed of sub-stream ``index`` from a model seed.

    Pure function of ``(seed, index)``; distinct indices give distinct
    stream seeds at any realistic scale.
    """
    return mix64((seed & _MASK64) ^ _rotl64((index + 1) & _MASK64, 32))


def stream_u64(stream_seed: int, k: int) -> int:
    """Draw ``k`` (0-based) of the stream as a uint64."""
    return mix64((stream_seed + _GOLDEN * (k + 1)) & _MASK64)


def stream_u01(stream_seed: int, k: int) -> float:
    """Draw ``k`` of the stream as a float in [0, 1)."""
    return (stream_u64(stream_seed, k) >> 11) * _INV53


def stream_u64_block(stream_seed: int, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start+count-1`` as a uint64 vector (wrapping math)."""
    idx = np.arange(1, count + 1, dtype=np.uint64) + np.uint64(int(start) & _MASK64)
    z = np.uint64(int(stream_seed) & _MASK64) + np.uint64(_GOLDEN) * idx
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_C1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_C2)
    return z ^ (z >> np.uint64(31))


def stream_u01_block(stream_seed: int, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start+count-1`` as floats in [0, 1)."""
    return (stream_u64_block(stream_seed, start, count) >> np.uint64(11)) * _INV53


WINDOW_SHIFT = 32


@dataclass
class RngStream:
    """Cursor over one counter-based draw stream.

    Two addressing modes, never mixed on one stream: sequential draws
    (``next_u01`` / ``u01_block``) advance the counter one index per
    draw; windowed draws (``take_window``) reserve one fixed-size window
    of 2**32 indices per event and address draws inside it by literal
    position.  The fixed stride makes a window's draws independent of
    the literal universe width, and position addressing lets sparse
    consumers skip draws without generating them while staying aligned
    with dense consumers.
    """

    stream_seed: int
    counter: int = 0

    @classmethod
    def derive(cls, seed: int, index: int) -> "RngStream":
        return cls(derive_stream(seed, index))

    def next_u01(self) -> float:
        u = stream_u01(self.stream_seed, self.counter)
        self.counter += 1
        return u

    def take_window(self) -> int:
        """Reserve the next event window; returns its base draw index."""
        base = (self.counter << WINDOW_SHIFT) & _MASK64
        self.counter += 1
        return base

    def u01_at(self, index: int) -> float:
        return stream_u01(self.stream_seed, index)

    def u01_block(self, n: int) -> np.ndarray:
        base = self.counter
        self.counter += n
        return stream_u01_block(self.stream_seed, base, n)


@dataclass(frozen=True)
class Config:
    """Hyperparameters of one machine instance.

    ``n_literal_budget=None`` means unconstrained clause sizes.  ``seed``
    is the root of every random stream the instance consumes, so two
    instances with equal configs train to identical models.  ``n_blocks``
    partitions the clause pool into independently seeded blocks and is
    model-semantic; the worker count used to run those blocks is not.
    """

    n_literals: int
    n_clauses: int
    n_classes: int
    s: float
    threshold: int
    n_literal_budget: int | None = None
    boost_true_positive: bool = False
    init_state: int = -1
    state_min: int = -127
    state_max: int = 127
    seed: int = 0
    n_blocks: int = 1
    negated_literals_enabled: bool = True
    sparse_floor: int = -15
    sparse_capacity: int | None = None

    def __post_init__(self) -> None:
        if self.n_literals < 1:
            raise ConfigError("n_literals must be positive")
        if self.n_clauses < 1:
            raise ConfigError("n_clauses must be positive")
        if self.n_classes < 2:
            raise ConfigError("n_classes must be at least 2")
        if not self.s > 1.0:
            raise ConfigError("s must be greater than 1.0")
        if self.threshold < 1:
            raise ConfigError("threshold must be positive")
        if self.n_literal_budget is not None and self.n_literal_budget < 1:
            raise ConfigError("n_literal_budget must be >= 1 (or None)")
        if not (self.state_min <= self.init_state < 0 <= self.state_max):
            raise ConfigError("require state_min <= init_state < 0 <= state_max")
        if self.state_min < -127 or self.state_max > 127:
            raise ConfigError("automaton states must fit a signed byte")
        if not 1 <= self.n_blocks <= self.n_clauses:
            raise ConfigError("n_blocks must be in [1, n_clauses]")
        if self.n_blocks >= _MAX_BLOCKS:
            raise ConfigError(f"n_blocks must be below {_MAX_BLOCKS}")
        if not 0 <= self.seed <= _MASK64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not self.sparse_floor < 0:
            raise ConfigError("sparse_floor must be negative")
        if self.sparse_floor < -127:
            raise ConfigError("sparse_floor must fit a signed byte")
        if self.sparse_capacity is not None and self.sparse_capacity < 1:
            raise ConfigError("sparse_capacity must be >= 1 (or None)")

    @property
    def n_literal_positions(self) -> int:
        """Length of the literal vector: 2*n_literals with negations."""
        if self.negated_literals_enabled:
            return 2 * self.n_literals
        return self.n_literals

    @property
    def effective_budget(self) -> int:
        """Budget as a plain int; unconstrained maps to the vector length
        (an include count can never exceed it)."""
        if self.n_literal_budget is None:
            return self.n_literal_positions
        return min(self.n_literal_budget, self.n_literal_positions)

    def with_overrides(self, **kwargs) -> "Config":
        return replace(self, **kwargs)


def augment_literals(x: np.ndarray, negated_literals_enabled: bool = True) -> np.ndarray:
    """Build the literal vector(s) for raw feature bits.

    Layout ``[x_0..x_{n-1}, not x_0..not x_{n-1}]``; with negations
    disabled the input is returned as uint8 unchanged.  Accepts a single
    example or a 2-D batch.
    """
    x = np.asarray(x, dtype=np.uint8)
    if not negated_literals_enabled:
        return np.ascontiguousarray(x)
    return np.ascontiguousarray(np.concatenate([x, 1 - x], axis=-1))


_BYTES_PER_STATE = 1
_BYTES_PER_WEIGHT = 4
_MAX_BYTES = 2**63 - 1


def dense_state_bytes(cfg: Config) -> int:
    """Bytes of automaton state a dense bank occupies, computed
    analytically for the augmented layout (one signed byte per literal
    position, feature and negation both counted).
    """
    total = cfg.n_clauses * 2 * cfg.n_literals * _BYTES_PER_STATE
    if total > _MAX_BYTES:
        raise OverflowError("dense state byte count exceeds a signed 64-bit count")
    return total


def dense_weight_bytes(cfg: Config) -> int:
    """Bytes of clause weights (signed 32-bit per clause per class)."""
    total = cfg.n_clauses * cfg.n_classes * _BYTES_PER_WEIGHT
    if total > _MAX_BYTES:
        raise OverflowError("weight byte count exceeds a signed 64-bit count")
    return total
