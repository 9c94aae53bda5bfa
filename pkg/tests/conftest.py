import numpy as np
import pytest

from tsetlinkit import Config, kernels
from tsetlinkit.sparse import SparseDataset, SparseExample


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile jit kernels once so timed tests measure steady state."""
    kernels.warmup()


def xor_dataset(n_train=1000, n_eval=200, n_noise=4, data_seed=1234):
    """y = x0 XOR x1 with noise bits appended; the canonical sanity task."""
    rng = np.random.default_rng(data_seed)
    n = n_train + n_eval
    x = rng.integers(0, 2, size=(n, 2 + n_noise)).astype(np.uint8)
    y = (x[:, 0] ^ x[:, 1]).astype(np.int64)
    return (x[:n_train], y[:n_train]), (x[n_train:], y[n_train:])


def xor_config(seed=42, **overrides):
    params = dict(n_literals=6, n_clauses=8, n_classes=2, s=1.9,
                  threshold=11, n_literal_budget=3, seed=seed)
    params.update(overrides)
    return Config(**params)


def random_sparse_dataset(n_literals=50, n_examples=100, n_classes=2,
                          data_seed=11, min_active=3, max_active=12,
                          support=None):
    rng = np.random.default_rng(data_seed)
    pool = np.arange(n_literals) if support is None else np.asarray(support)
    examples = []
    for _ in range(n_examples):
        k = int(rng.integers(min_active, max_active))
        active = np.sort(rng.choice(pool, size=k, replace=False)).astype(np.int64)
        examples.append(SparseExample(active, int(rng.integers(0, n_classes))))
    return SparseDataset(n_literals, examples)
