"""Emit a rule set as a standalone C99 translation unit.

The output is a single header-style file: fixed-width integer types
only, static constant arrays for the rules, no heap, no recursion, no
external calls.  Inputs are the raw feature bits as 0/1 unsigned bytes;
negated literals are computed internally, and prediction/explanation
match the in-process predictor bit for bit (same argmax, same lowest-
index tie-break, same additive scores).
"""

from __future__ import annotations

import re

from .predictor import RuleSet

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _array_literal(values, per_line=16) -> str:
    values = [str(int(v)) for v in values]
    if not values:
        values = ["0"]  # C99 forbids zero-length arrays; never read
    lines = []
    for i in range(0, len(values), per_line):
        lines.append("    " + ", ".join(values[i:i + per_line]))
    return ",\n".join(lines)


def export_program(rs: RuleSet, symbol_prefix: str = "tm") -> str:
    """Render the rule set as C99 source text; deterministic per input."""
    if not _IDENT.match(symbol_prefix):
        raise ValueError(f"invalid symbol prefix {symbol_prefix!r}")
    p = symbol_prefix
    guard = f"{p.upper()}_RULES_H"
    offsets = [0]
    flat = []
    for inc in rs.includes:
        flat.extend(int(v) for v in inc)
        offsets.append(len(flat))
    weights = [int(w) for row in rs.weights for w in row]
    n_lit = rs.n_literals
    n_pos = rs.n_positions
    negated = 1 if rs.negated_literals_enabled else 0

    return f"""#ifndef {guard}
#define {guard}

#include <stdint.h>

/* Weighted conjunctive rules over {n_lit} input bits
 * ({'with' if negated else 'without'} negated literals; {rs.n_rules} rules,
 * {rs.n_classes} classes).  x must point at {n_lit} bytes valued 0 or 1. */

#define {p}_N_LITERALS {n_lit}
#define {p}_N_POSITIONS {n_pos}u
#define {p}_N_CLASSES {rs.n_classes}
#define {p}_N_RULES {rs.n_rules}u

static const uint32_t {p}_rule_offsets[{rs.n_rules + 1}] = {{
{_array_literal(offsets)}
}};

static const uint32_t {p}_rule_literals[{max(len(flat), 1)}] = {{
{_array_literal(flat)}
}};

static const int32_t {p}_rule_weights[{max(len(weights), 1)}] = {{
{_array_literal(weights)}
}};

static uint8_t {p}_literal_value(const uint8_t* x, uint32_t position)
{{
    if (position < {n_lit}u) {{
        return x[position];
    }}
    return (uint8_t)(1u - x[position - {n_lit}u]);
}}

static int {p}_rule_fires(const uint8_t* x, uint32_t rule)
{{
    uint32_t t;
    for (t = {p}_rule_offsets[rule]; t < {p}_rule_offsets[rule + 1u]; ++t) {{
        if ({p}_literal_value(x, {p}_rule_literals[t]) == 0u) {{
            return 0;
        }}
    }}
    return 1;
}}

static int {p}_predict(const uint8_t* x)
{{
    int32_t votes[{max(rs.n_classes, 1)}];
    uint32_t r;
    int k;
    int best = 0;
    for (k = 0; k < {p}_N_CLASSES; ++k) {{
        votes[k] = 0;
    }}
    for (r = 0u; r < {p}_N_RULES; ++r) {{
        if ({p}_rule_fires(x, r)) {{
            for (k = 0; k < {p}_N_CLASSES; ++k) {{
                votes[k] += {p}_rule_weights[r * {p}_N_CLASSES + (uint32_t)k];
            }}
        }}
    }}
    for (k = 1; k < {p}_N_CLASSES; ++k) {{
        if (votes[k] > votes[best]) {{
            best = k;
        }}
    }}
    return best;
}}

static void {p}_explain(const uint8_t* x, int for_class, int32_t* out_scores)
{{
    uint32_t r;
    uint32_t t;
    for (t = 0u; t < {p}_N_POSITIONS; ++t) {{
        out_scores[t] = 0;
    }}
    for (r = 0u; r < {p}_N_RULES; ++r) {{
        if ({p}_rule_fires(x, r)) {{
            for (t = {p}_rule_offsets[r]; t < {p}_rule_offsets[r + 1u]; ++t) {{
                out_scores[{p}_rule_literals[t]] +=
                    {p}_rule_weights[r * {p}_N_CLASSES + (uint32_t)for_class];
            }}
        }}
    }}
}}

#endif /* {guard} */
"""


def export_rules_text(rs: RuleSet) -> str:
    """One line per rule: the conjunction of named literals and the
    weight row, in stored rule order."""
    lines = []
    for inc, row in zip(rs.includes, rs.weights):
        parts = []
        for lit in inc:
            lit = int(lit)
            if lit < rs.n_literals:
                parts.append(f"x{lit}")
            else:
                parts.append(f"NOT x{lit - rs.n_literals}")
        weights = ", ".join(str(int(w)) for w in row)
        lines.append(f"{' AND '.join(parts)} : [{weights}]")
    return "".join(line + "\n" for line in lines)
