"""Vectorized clause evaluation.

Assignments are boolean numpy vectors of length ``n``; entry ``i`` holds
``x_{i+1}``.
"""
from __future__ import annotations

import numpy as np

from .cnf import CONJUNCTIVE, DISJUNCTIVE, Clause


def as_assignment(values, n=None) -> np.ndarray:
    a = np.asarray(values, dtype=bool).ravel()
    if n is not None and a.shape[0] != n:
        raise ValueError(f"assignment has length {a.shape[0]}, expected {n}")
    return a


def to_bitstring(a) -> str:
    return "".join("1" if v else "0" for v in np.asarray(a, dtype=bool))


def from_bitstring(s: str) -> np.ndarray:
    return np.array([c == "1" for c in s.strip()], dtype=bool)


def assignment_from_int(value: int, n: int) -> np.ndarray:
    return np.array([(value >> i) & 1 for i in range(n)], dtype=bool)


class ClauseMatrix:
    """Dense literal-incidence form of a clause list for batch evaluation."""

    def __init__(self, clauses, n: int, kind: str | None = None):
        clauses = list(clauses)
        if kind is None:
            kind = clauses[0].kind if clauses else DISJUNCTIVE
        self.kind = kind
        self.n = n
        m = len(clauses)
        self.pos = np.zeros((m, n), dtype=np.int32)
        self.neg = np.zeros((m, n), dtype=np.int32)
        for j, c in enumerate(clauses):
            for k in c.lits:
                if k > 0:
                    self.pos[j, k - 1] = 1
                else:
                    self.neg[j, -k - 1] = 1
        self.sizes = self.pos.sum(axis=1) + self.neg.sum(axis=1)

    def __len__(self):
        return self.pos.shape[0]

    def satisfied(self, assignments) -> np.ndarray:
        """Boolean matrix ``(num_assignments, m)`` of satisfied clauses."""
        A = np.atleast_2d(np.asarray(assignments, dtype=np.int32))
        true_lits = A @ self.pos.T + (1 - A) @ self.neg.T
        if self.kind == CONJUNCTIVE:
            return true_lits == self.sizes[None, :]
        return true_lits > 0

    def count(self, assignments) -> np.ndarray:
        if len(self) == 0:
            return np.zeros(np.atleast_2d(assignments).shape[0], dtype=np.int64)
        return self.satisfied(assignments).sum(axis=1)


def evaluate(a, clauses, kind: str | None = None) -> int:
    """Exact number of clauses satisfied by assignment ``a``."""
    clauses = list(clauses)
    if not clauses:
        return 0
    a = as_assignment(a)
    if kind is not None and any(c.kind != kind for c in clauses):
        clauses = [Clause(c.lits, kind) for c in clauses]
    return int(ClauseMatrix(clauses, a.shape[0], kind).count(a)[0])


def complement(a) -> np.ndarray:
    return ~as_assignment(a)
