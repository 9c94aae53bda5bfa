"""Kernel backend selection.

Two interchangeable backends implement the hot loops: ``numba`` (jit
loop kernels, default when importable) and ``numpy`` (vectorized
fallback).  Select explicitly with ``TSETLINKIT_BACKEND=numba|numpy``.
Both produce bit-identical models; the benchmark script under
``benchmarks/`` measures the gap.
"""

from __future__ import annotations

import os
import warnings

from . import _numpy

_ENV_VAR = "TSETLINKIT_BACKEND"


def load_backend(name: str):
    """Return the kernel module for ``name`` ('numba' or 'numpy')."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba

        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")


def _select_default():
    requested = os.environ.get(_ENV_VAR, "").strip().lower()
    if requested:
        return load_backend(requested)
    try:
        return load_backend("numba")
    except ImportError:
        warnings.warn(
            "numba is not importable; falling back to the slower numpy "
            f"kernels (set {_ENV_VAR}=numpy to silence this)",
            RuntimeWarning,
            stacklevel=2,
        )
        return _numpy


backend = _select_default()

clause_outputs = backend.clause_outputs
clause_outputs_batch = backend.clause_outputs_batch
bank_feedback = backend.bank_feedback
warmup = backend.warmup
BACKEND_NAME = backend.NAME
