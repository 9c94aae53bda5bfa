"""Vectorized numpy implementations of the hot clause kernels.

Bit-identical to the jit backend: both index the same counter-based
draw streams by literal position, so a run is reproducible regardless
of which backend executed it.
"""

from __future__ import annotations

import numpy as np

from ..core import WINDOW_SHIFT, stream_u01_block

NAME = "numpy"

_MASK64 = (1 << 64) - 1


def clause_outputs(states, lits, training, budget):
    """Outputs of every clause in a bank on one literal vector."""
    include = states >= 0
    violated = (include & (lits == 0)).any(axis=1)
    n_included = include.sum(axis=1)
    if training:
        out = ~violated & (n_included <= budget)
    else:
        out = ~violated & (n_included > 0)
    return out.astype(np.uint8)


def clause_outputs_batch(states, x_lit, training, budget, chunk=512):
    """Outputs of every clause on every row of a literal matrix."""
    include = states >= 0
    n_included = include.sum(axis=1)
    include_f = include.T.astype(np.float64)
    n = x_lit.shape[0]
    out = np.empty((n, states.shape[0]), dtype=np.uint8)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        miss = (x_lit[lo:hi] == 0).astype(np.float64)
        violated = (miss @ include_f) > 0.5
        if training:
            fired = ~violated & (n_included <= budget)
        else:
            fired = ~violated & (n_included > 0)
        out[lo:hi] = fired.astype(np.uint8)
    return out


def _type_i(states, j, lit_on, output, s, boost, state_min, state_max, seed, base):
    u = stream_u01_block(seed, base, states.shape[1])
    p_dec = 1.0 / s
    row = states[j].astype(np.int16)
    if output == 1:
        if boost:
            inc = lit_on
        else:
            inc = lit_on & (u < (s - 1.0) / s)
        dec = ~lit_on & (u < p_dec)
        row[inc] += 1
        row[dec] -= 1
    else:
        row[u < p_dec] -= 1
    np.clip(row, state_min, state_max, out=row)
    states[j] = row.astype(np.int8)


def _type_ii(states, j, lit_on, output):
    if output == 1:
        mask = ~lit_on & (states[j] < 0)
        states[j, mask] += 1


def bank_feedback(states, weights, lits, outputs, label, negative,
                  update_target, update_negative, s, boost,
                  state_min, state_max, seed, counter):
    """Apply one example's sampled feedback to a whole bank.

    Per clause, the target-direction event runs before the negative one;
    every applied event consumes one draw window (whether or not it
    reads draws) by advancing the event counter.  Returns the new
    counter.
    """
    seed = int(seed)
    counter = int(counter)
    lit_on = lits == 1
    for j in np.flatnonzero(update_target | update_negative):
        output = outputs[j]
        if update_target[j]:
            if weights[j, label] >= 0:
                base = (counter << WINDOW_SHIFT) & _MASK64
                _type_i(states, j, lit_on, output, s, boost,
                        state_min, state_max, seed, base)
            else:
                _type_ii(states, j, lit_on, output)
            if output == 1:
                weights[j, label] += 1
            counter += 1
        if update_negative[j]:
            if weights[j, negative] >= 0:
                _type_ii(states, j, lit_on, output)
            else:
                base = (counter << WINDOW_SHIFT) & _MASK64
                _type_i(states, j, lit_on, output, s, boost,
                        state_min, state_max, seed, base)
            if output == 1:
                weights[j, negative] -= 1
            counter += 1
    return counter


def warmup():
    """No compilation step for this backend."""
