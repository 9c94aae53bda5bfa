"""Jit-compiled loop kernels (numba, nopython, nogil).

The nogil kernels are what make clause blocks scale across worker
threads.  Draws are indexed by (stream seed, counter + literal position)
exactly as in the numpy backend, so both produce identical models.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_C1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_C2 = np.uint64(0x94D049BB133111EB)
_INV53 = 2.0**-53
_U1 = np.uint64(1)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S32 = np.uint64(32)


@njit(cache=True, nogil=True, inline="always")
def _u01_at(seed, idx):
    z = seed + _GOLDEN * (idx + _U1)
    z = (z ^ (z >> _S30)) * _MIX_C1
    z = (z ^ (z >> _S27)) * _MIX_C2
    z = z ^ (z >> _S31)
    return np.float64(z >> _S11) * _INV53


@njit(cache=True, nogil=True, inline="always")
def _one_output(states, j, lits, training, budget):
    n_included = 0
    for k in range(lits.shape[0]):
        if states[j, k] >= 0:
            if lits[k] == 0:
                return 0
            n_included += 1
    if training:
        if n_included > budget:
            return 0
        return 1
    if n_included == 0:
        return 0
    return 1


@njit(cache=True, nogil=True)
def clause_outputs(states, lits, training, budget):
    out = np.empty(states.shape[0], dtype=np.uint8)
    for j in range(states.shape[0]):
        out[j] = _one_output(states, j, lits, training, budget)
    return out


@njit(cache=True, nogil=True)
def clause_outputs_batch(states, x_lit, training, budget):
    n = x_lit.shape[0]
    out = np.empty((n, states.shape[0]), dtype=np.uint8)
    for e in range(n):
        for j in range(states.shape[0]):
            out[e, j] = _one_output(states, j, x_lit[e], training, budget)
    return out


@njit(cache=True, nogil=True, inline="always")
def _type_i(states, j, lits, output, s, boost, state_min, state_max, seed, base):
    p_inc = (s - 1.0) / s
    p_dec = 1.0 / s
    if output == 1:
        for k in range(lits.shape[0]):
            u = _u01_at(seed, base + np.uint64(k))
            st = states[j, k]
            if lits[k] == 1:
                if (boost or u < p_inc) and st < state_max:
                    states[j, k] = st + 1
            else:
                if u < p_dec and st > state_min:
                    states[j, k] = st - 1
    else:
        for k in range(lits.shape[0]):
            u = _u01_at(seed, base + np.uint64(k))
            st = states[j, k]
            if u < p_dec and st > state_min:
                states[j, k] = st - 1


@njit(cache=True, nogil=True, inline="always")
def _type_ii(states, j, lits, output):
    if output == 1:
        for k in range(lits.shape[0]):
            if lits[k] == 0 and states[j, k] < 0:
                states[j, k] += 1


@njit(cache=True, nogil=True)
def bank_feedback(states, weights, lits, outputs, label, negative,
                  update_target, update_negative, s, boost,
                  state_min, state_max, seed, counter):
    for j in range(states.shape[0]):
        output = outputs[j]
        if update_target[j]:
            if weights[j, label] >= 0:
                _type_i(states, j, lits, output, s, boost,
                        state_min, state_max, seed, counter << _S32)
            else:
                _type_ii(states, j, lits, output)
            if output == 1:
                weights[j, label] += 1
            counter += _U1
        if update_negative[j]:
            if weights[j, negative] >= 0:
                _type_ii(states, j, lits, output)
            else:
                _type_i(states, j, lits, output, s, boost,
                        state_min, state_max, seed, counter << _S32)
            if output == 1:
                weights[j, negative] -= 1
            counter += _U1
    return counter


def warmup():
    """Force compilation of every kernel on tiny inputs."""
    states = np.zeros((2, 4), dtype=np.int8)
    weights = np.zeros((2, 2), dtype=np.int32)
    lits = np.array([1, 0, 1, 0], dtype=np.uint8)
    flags = np.array([True, False])
    clause_outputs(states, lits, True, 4)
    clause_outputs_batch(states, lits.reshape(1, -1), False, 4)
    bank_feedback(states, weights, lits, np.ones(2, dtype=np.uint8),
                  0, 1, flags, flags, 2.0, False, -127, 127,
                  np.uint64(1), np.uint64(0))
