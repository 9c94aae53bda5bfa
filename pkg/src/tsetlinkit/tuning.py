"""Hyperparameter random search and stratified cross-validation.

All sampling flows through derived streams keyed on the caller's seed,
so a search or CV run is reproducible from its arguments alone.  Caller
data and base configs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .core import (
    Config,
    DataError,
    HOLDOUT_STREAM,
    KFOLD_STREAM,
    RngStream,
    SEARCH_STREAM,
    derive_stream,
)
from .executor import evaluate, shuffle_permutation, train
from .sparse import SparseDataset

_INT_FIELDS = {f.name for f in fields(Config)
               if f.type in ("int", "int | None")}
_FLOAT_FIELDS = {f.name for f in fields(Config) if f.type == "float"}
_BOOL_FIELDS = {f.name for f in fields(Config) if f.type == "bool"}


@dataclass(frozen=True)
class SearchSpace:
    """Per-parameter range specs over Config fields.

    Kinds: ``int`` (inclusive bounds), ``uniform`` and ``loguniform``
    (real bounds), ``cat`` (explicit values).
    """

    params: tuple[tuple[str, str, tuple], ...]

    def __post_init__(self):
        for name, kind, spec in self.params:
            if kind in ("int", "uniform", "loguniform"):
                lo, hi = spec
                if lo > hi:
                    raise ValueError(f"{name}: lower bound {lo} above upper "
                                     f"bound {hi}")
                if kind == "loguniform" and lo <= 0:
                    raise ValueError(f"{name}: loguniform requires positive "
                                     "bounds")
            elif kind == "cat":
                if not spec:
                    raise ValueError(f"{name}: empty categorical list")
            else:
                raise ValueError(f"{name}: unknown kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "SearchSpace":
        """Parse the one-line-per-parameter text format:
        ``name kind lower upper`` or ``name cat v1,v2,...``."""
        params = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) == 3 and tokens[1] == "cat":
                values = tuple(_parse_scalar(v) for v in tokens[2].split(","))
                params.append((tokens[0], "cat", values))
            elif len(tokens) == 4 and tokens[1] in ("int", "uniform",
                                                    "loguniform"):
                caster = int if tokens[1] == "int" else float
                params.append((tokens[0], tokens[1],
                               (caster(tokens[2]), caster(tokens[3]))))
            else:
                raise ValueError(f"space line {lineno}: unrecognized spec "
                                 f"{line!r}")
        return cls(tuple(params))

    def sample(self, rng: RngStream) -> dict:
        """One configuration draw; one stream draw per parameter, in
        declaration order."""
        out = {}
        for name, kind, spec in self.params:
            u = rng.next_u01()
            if kind == "int":
                lo, hi = spec
                out[name] = min(hi, lo + int(u * (hi - lo + 1)))
            elif kind == "uniform":
                lo, hi = spec
                out[name] = lo + u * (hi - lo)
            elif kind == "loguniform":
                lo, hi = spec
                out[name] = math.exp(math.log(lo) +
                                     u * (math.log(hi) - math.log(lo)))
            else:
                values = spec
                out[name] = values[min(len(values) - 1, int(u * len(values)))]
        return out


def _parse_scalar(token: str):
    if token.lower() in ("true", "false"):
        return token.lower() == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def _coerce(name: str, value):
    if name in _INT_FIELDS:
        return int(round(value)) if not isinstance(value, bool) else value
    if name in _FLOAT_FIELDS:
        return float(value)
    if name in _BOOL_FIELDS:
        return bool(value)
    return value


@dataclass
class Trial:
    index: int
    params: dict
    config: Config
    accuracy: float


@dataclass
class CvReport:
    fold_accuracies: list[float]
    mean: float
    std: float
    fold_assignments: np.ndarray


def _labels_of(data) -> np.ndarray:
    if isinstance(data, SparseDataset):
        return data.labels
    return np.asarray(data[1], dtype=np.int64)


def _subset(data, mask: np.ndarray):
    if isinstance(data, SparseDataset):
        keep = [ex for ex, m in zip(data.examples, mask) if m]
        return SparseDataset(data.n_literals, keep)
    x, y = data
    return np.asarray(x)[mask], np.asarray(y)[mask]


def stratified_kfold(labels: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Fold index per example: seeded shuffle within each class, then
    round-robin, so per-class counts across folds differ by at most 1."""
    labels = np.asarray(labels, dtype=np.int64)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = RngStream.derive(seed, KFOLD_STREAM)
    folds = np.empty(labels.shape[0], dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            raise DataError(f"class {int(cls)} has {idx.size} examples, "
                            f"fewer than k={k}")
        perm = shuffle_permutation(idx.size, rng)
        for position, member in enumerate(idx[perm]):
            folds[member] = position % k
    return folds


def cross_validate(cfg: Config, data, k: int, n_epochs: int, seed: int,
                   n_jobs: int = 1) -> CvReport:
    """k training runs, each holding out one stratified fold and seeding
    the model from the fold index."""
    labels = _labels_of(data)
    folds = stratified_kfold(labels, k, seed)
    accuracies = []
    for fold in range(k):
        held_out = folds == fold
        fold_cfg = cfg.with_overrides(seed=derive_stream(seed, fold))
        run = train(fold_cfg, _subset(data, ~held_out),
                    n_epochs=n_epochs, n_jobs=n_jobs)
        accuracies.append(evaluate(run.model, _subset(data, held_out)))
    mean = float(np.mean(accuracies))
    std = float(np.std(accuracies, ddof=1)) if k > 1 else 0.0
    return CvReport(accuracies, mean, std, folds)


def random_search(space: SearchSpace, base_cfg: Config, data, n_trials: int,
                  n_epochs: int, seed: int, cv_k: int | None = None,
                  holdout_fraction: float = 0.2,
                  n_jobs: int = 1) -> list[Trial]:
    """Draw, train, and rank ``n_trials`` configurations.

    Evaluation uses a stratified holdout split (shared by every trial)
    unless ``cv_k`` selects cross-validation.  Ties keep the earlier
    trial first; the result is fully reproducible from ``seed``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    rng = RngStream.derive(seed, SEARCH_STREAM)
    holdout_mask = None
    if cv_k is None:
        labels = _labels_of(data)
        per_fold = max(2, int(round(1.0 / max(holdout_fraction, 1e-9))))
        folds = stratified_kfold(labels, per_fold,
                                 derive_stream(seed, HOLDOUT_STREAM))
        holdout_mask = folds == 0
    trials = []
    for index in range(n_trials):
        params = space.sample(rng)
        cfg = base_cfg.with_overrides(
            **{name: _coerce(name, value) for name, value in params.items()})
        if cv_k is None:
            run = train(cfg, _subset(data, ~holdout_mask),
                        n_epochs=n_epochs, n_jobs=n_jobs)
            accuracy = evaluate(run.model, _subset(data, holdout_mask))
        else:
            accuracy = cross_validate(cfg, data, cv_k, n_epochs, seed,
                                      n_jobs).mean
        trials.append(Trial(index, params, cfg, accuracy))
    return sorted(trials, key=lambda t: (-t.accuracy, t.index))
