"""Exhaustive oracles for small instances.

Counting over all 2^n assignments is done as a matrix product.  Split the
variables into a low half and a high half.  A clause fixes a pattern on its
variables; the assignment ``(hi, lo)`` matches it iff ``lo`` matches the
clause's low-half pattern and ``hi`` its high-half pattern.  Stacking those
indicators into ``L`` (m x 2^lo) and ``H`` (m x 2^hi) gives the match count of
every assignment as ``H.T @ L``.  For a disjunction the relevant pattern is
the unique falsifying one, for a conjunction the unique satisfying one.

Only variables that occur in some clause are enumerated; the rest are set to
False.  Ties resolve to the numerically smallest assignment, reading
``x_1`` as the least significant bit.
"""
from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from .cnf import CONJUNCTIVE, DISJUNCTIVE
from .exceptions import TooManyVariables

MAX_EXACT_VARS = 30
_BLOCK_ELEMS = 1 << 22


def _patterns(clauses, var_pos, kind):
    """Per clause: (mask, pattern) over the compressed variable positions."""
    masks = np.zeros(len(clauses), dtype=np.int64)
    pats = np.zeros(len(clauses), dtype=np.int64)
    for j, c in enumerate(clauses):
        mk = pt = 0
        for k in c.lits:
            bit = 1 << var_pos[abs(k)]
            mk |= bit
            # disjunction: falsifying value is 1 for negated literals;
            # conjunction: satisfying value is 1 for positive literals
            if (k > 0) == (kind == CONJUNCTIVE):
                pt |= bit
        masks[j] = mk
        pats[j] = pt
    return masks, pats


def _match_blocks(clauses, n_vars_used, var_pos, kind) -> Iterator:
    """Yield ``(start, counts)`` where counts[t] = #clauses matched by assignment start+t."""
    masks, pats = _patterns(clauses, var_pos, kind)
    n_lo = (n_vars_used + 1) // 2
    n_hi = n_vars_used - n_lo
    lo_mask = (1 << n_lo) - 1
    lo = np.arange(1 << n_lo, dtype=np.int64)
    # float32 products are exact while counts stay below 2^24
    dtype = np.float32 if len(clauses) < (1 << 24) else np.float64
    L = ((lo[None, :] & (masks & lo_mask)[:, None]) == (pats & lo_mask)[:, None]).astype(dtype)
    hm, hp = masks >> n_lo, pats >> n_lo
    rows_per_block = max(1, _BLOCK_ELEMS // (1 << n_lo))
    n_hi_total = 1 << n_hi
    for h0 in range(0, n_hi_total, rows_per_block):
        hi = np.arange(h0, min(h0 + rows_per_block, n_hi_total), dtype=np.int64)
        H = ((hi[None, :] & hm[:, None]) == hp[:, None]).astype(dtype)
        counts = np.rint(H.T @ L).astype(np.int64).ravel()
        yield h0 << n_lo, counts


def _used_vars(clauses):
    return sorted({abs(k) for c in clauses for k in c.lits})


def _search(clauses, n, kind, objective, guard):
    """Exhaustive search; ``objective`` in {'max', 'min'} over satisfied count."""
    clauses = list(clauses)
    m = len(clauses)
    a = np.zeros(n, dtype=bool)
    if m == 0:
        return a, 0
    used = _used_vars(clauses)
    if len(used) > guard:
        raise TooManyVariables(f"{len(used)} variables exceed the exhaustive guard of {guard}")
    var_pos = {v: i for i, v in enumerate(used)}
    best_val, best_idx = None, 0
    for start, matched in _match_blocks(clauses, len(used), var_pos, kind):
        sat = matched if kind == CONJUNCTIVE else m - matched
        t = int(np.argmax(sat)) if objective == "max" else int(np.argmin(sat))
        v = int(sat[t])
        if best_val is None or (v > best_val if objective == "max" else v < best_val):
            best_val, best_idx = v, start + t
    for v, i in var_pos.items():
        a[v - 1] = bool((best_idx >> i) & 1)
    return a, best_val


def exact_maxsat(clauses, n: int, kind: str = DISJUNCTIVE, guard: int = MAX_EXACT_VARS):
    """Optimal Max-SAT (or Max-AND with ``kind='and'``) assignment and value."""
    return _search(clauses, n, kind, "max", guard)


def exact_minsat(clauses, n: int, guard: int = MAX_EXACT_VARS):
    """Optimal Min-SAT assignment and value."""
    return _search(clauses, n, DISJUNCTIVE, "min", guard)


def all_counts(clauses, n: int, kind: str = DISJUNCTIVE, guard: int = 25) -> np.ndarray:
    """Satisfied count for every assignment of all ``n`` variables (test helper)."""
    if n > guard:
        raise TooManyVariables(f"n={n} exceeds guard {guard}")
    clauses = list(clauses)
    if not clauses:
        return np.zeros(1 << n, dtype=np.int64)
    var_pos = {v: v - 1 for v in range(1, n + 1)}
    out = np.concatenate([c for _, c in _match_blocks(clauses, n, var_pos, kind)])
    return out if kind == CONJUNCTIVE else len(clauses) - out


def verify_all_satisfiable(clauses, n: int, guard: int = 25) -> Optional[np.ndarray]:
    """A witness satisfying every clause, or ``None`` if none exists."""
    clauses = list(clauses)
    kind = clauses[0].kind if clauses else DISJUNCTIVE
    a, v = _search(clauses, n, kind, "max", guard)
    return a if v == len(clauses) else None
