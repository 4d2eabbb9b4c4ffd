"""Streaming Min-SAT.

* Settled variables: once a literal occurs in more than ``u`` clauses it
  must be false in any assignment of value at most ``u``, so its variable is
  fixed and the stored clauses shrink.  At most ``2 n u`` clauses are ever
  stored.
* Subsampling: one settled instance per optimum guess ``z = 1, 2, 4, ...``,
  each keeping clauses with probability ``min(1, K n / (eps^2 z))``.
* Bounded frequency: with every variable in at most ``f`` clauses, pick
  each literal by comparing occurrence counts among clauses of size at most
  ``sqrt(f n)``.
* Randomized greedy (Kohli et al.) as a cheap offline solver.
* Literal coverage sketches: one F0 sketch per literal, minimum estimated
  union over all ``2^n`` literal choices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .cnf import DISJUNCTIVE, INSERT, Parameters
from .evaluation import ClauseMatrix, evaluate
from .exceptions import (
    AllInstancesTerminated,
    ConfigError,
    FrequencyBoundViolated,
    SpaceBudgetExceeded,
    TooManyVariables,
)
from .oracle import exact_minsat
from .samplers import F0Sketch, f0_size, seed_from
from .space import SpaceMeter, SpaceReport
from .validation import check_clauses, check_delta, check_stream

EXACT = "exact"
KOHLI = "kohli"
F0_MAX_VARS = 25
BUDGET_FACTOR = 4

UNSETTLED, SET_TRUE, SET_FALSE = 0, 1, -1


def _insert_only(events):
    for ev in events:
        if ev.op != INSERT:
            raise ConfigError("Min-SAT algorithms need an insertion-only stream")
        yield ev.clause


@dataclass
class MinSatConfig:
    """Per-guess settings.  ``p`` and ``u`` default to
    ``min(1, K n / (eps^2 z))`` and ``ceil(2 K n / eps^2)``."""

    params: Parameters
    z: int = 1
    p: Optional[float] = None
    u: Optional[int] = None
    f: Optional[int] = None
    offline: str = EXACT

    def __post_init__(self):
        P = self.params
        if self.z < 1:
            raise ConfigError("guess z must be at least 1")
        if self.p is None:
            self.p = min(1.0, P.K * P.n / (P.eps**2 * self.z))
        if self.u is None:
            self.u = math.ceil(2 * P.K * P.n / P.eps**2)
        if not 0 < self.p <= 1 or self.u < 1:
            raise ConfigError(f"need 0 < p <= 1 and u >= 1, got p={self.p}, u={self.u}")
        if self.offline not in (EXACT, KOHLI):
            raise ConfigError(f"unknown offline solver {self.offline!r}")

    @property
    def budget_words(self) -> int:
        return BUDGET_FACTOR * self.params.n * self.u


def guesses(m: int) -> list:
    out, z = [], 1
    while z <= 2 * max(m, 1):
        out.append(z)
        z *= 2
    return out


# --------------------------------------------------------------------------
# settled variables


class SettledState:
    """Streaming state of the settled-variable algorithm.

    ``forced`` counts clauses that contain a literal made true by settling;
    every completion satisfies them.  ``emptied`` counts clauses whose
    literals were all settled false: no completion satisfies them, so they
    cost nothing.
    """

    def __init__(self, n: int, u: int, meter: Optional[SpaceMeter] = None):
        self.n = n
        self.u = u
        self.status = np.zeros(n + 1, dtype=np.int8)
        self.counts = {}
        self.stored = {}
        self._by_lit = {}
        self._next = 0
        self.forced = 0
        self.emptied = 0
        self.seen = 0
        self.max_stored = 0
        self.meter = meter
        self._words = 0
        if meter is not None:
            meter.set("counters", 3 * n)

    def _lit_true(self, k: int) -> bool:
        s = self.status[abs(k)]
        return s == (SET_TRUE if k > 0 else SET_FALSE)

    def _lit_false(self, k: int) -> bool:
        s = self.status[abs(k)]
        return s == (SET_FALSE if k > 0 else SET_TRUE)

    def _bill(self, delta_words: int):
        self._words += delta_words
        if self.meter is not None:
            self.meter.set("stored", self._words)

    def _store(self, lits: tuple):
        cid = self._next
        self._next += 1
        self.stored[cid] = lits
        for k in lits:
            self._by_lit.setdefault(k, set()).add(cid)
        self._bill(2 + len(lits))

    def _unstore(self, cid: int):
        lits = self.stored.pop(cid)
        for k in lits:
            self._by_lit[k].discard(cid)
        self._bill(-(2 + len(lits)))
        return lits

    def _settle(self, k: int):
        """Make literal ``k`` false."""
        v = abs(k)
        self.status[v] = SET_FALSE if k > 0 else SET_TRUE
        for cid in list(self._by_lit.get(-k, ())):
            self._unstore(cid)
            self.forced += 1
        for cid in list(self._by_lit.get(k, ())):
            lits = self._unstore(cid)
            rest = tuple(x for x in lits if x != k)
            if rest:
                self._store(rest)
            else:
                self.emptied += 1
        self._by_lit.pop(k, None)
        self._by_lit.pop(-k, None)
        self.counts.pop(k, None)
        self.counts.pop(-k, None)

    def update(self, clause) -> "SettledState":
        self.seen += 1
        lits = clause.lits if hasattr(clause, "lits") else tuple(clause)
        if any(self._lit_true(k) for k in lits):
            self.forced += 1
            return self
        rest = tuple(k for k in lits if not self._lit_false(k))
        if not rest:
            self.emptied += 1
            return self
        self._store(rest)
        over = []
        for k in rest:
            c = self.counts.get(k, 0) + 1
            self.counts[k] = c
            if c > self.u:
                over.append(k)
        for k in over:
            if self.status[abs(k)] == UNSETTLED:
                self._settle(k)
        self.max_stored = max(self.max_stored, len(self.stored))
        return self

    @property
    def settled_count(self) -> int:
        return int(np.count_nonzero(self.status[1:]))

    def stored_clauses(self) -> list:
        from .cnf import Clause
        return [Clause(tuple(sorted(l, key=lambda k: (abs(k), k < 0))), DISJUNCTIVE)
                for l in self.stored.values()]


def settled_update(st: SettledState, c, u: Optional[int] = None) -> SettledState:
    if u is not None:
        st.u = u
    return st.update(c)


def settled_finish(st: SettledState, offline: str = EXACT, rng=None, repeats: Optional[int] = None):
    """Solve the stored clauses offline and merge with the settled values.

    Returns ``(assignment, value)`` where ``value`` is the offline value on
    the stored clauses plus the forced count.
    """
    W = st.stored_clauses()
    if offline == EXACT:
        a, val = exact_minsat(W, st.n)
    elif offline == KOHLI:
        a, val = kohli_greedy(W, st.n, rng, repeats=repeats or 1)
    else:
        raise ConfigError(f"unknown offline solver {offline!r}")
    a = a.copy()
    s = st.status[1:]
    a[s == SET_TRUE] = True
    a[s == SET_FALSE] = False
    return a, int(val) + st.forced


def minsat_settled(events, n: int, u: int, offline: str = EXACT, rng=None, repeats=None,
                   budget_words=None):
    """The settled-variable algorithm without subsampling.

    Returns ``(assignment, value, state)``.
    """
    meter = SpaceMeter(budget_words)
    st = SettledState(n, u, meter)
    for c in _insert_only(events):
        st.update(c)
    a, val = settled_finish(st, offline, rng, repeats)
    return a, val, st


# --------------------------------------------------------------------------
# offline greedy


def _kohli_runs(clauses, n, rng, repeats):
    cm = ClauseMatrix(clauses, n)
    pos, neg = cm.pos.astype(bool), cm.neg.astype(bool)
    alive = np.ones((repeats, len(clauses)), dtype=bool)
    A = np.zeros((repeats, n), dtype=bool)
    for i in range(n):
        a = (alive & pos[:, i]).sum(axis=1)
        b = (alive & neg[:, i]).sum(axis=1)
        prob = np.where(a + b > 0, b / np.maximum(a + b, 1), 0.0)
        x = rng.random(repeats) < prob
        A[:, i] = x
        alive &= ~np.where(x[:, None], pos[:, i][None, :], neg[:, i][None, :])
    return A, len(clauses) - alive.sum(axis=1)


def kohli_greedy(clauses, n: int, rng=None, repeats: int = 1):
    """Randomized greedy: for ``x_1 .. x_n`` in order, with ``a`` (``b``)
    the number of still-unsatisfied clauses that setting the variable true
    (false) would satisfy, set it true with probability ``b / (a + b)``
    (false when both are zero).

    ``repeats`` independent runs are made and the best kept (earliest on
    ties).  Returns ``(assignment, value)``.
    """
    clauses = list(clauses)
    if not clauses:
        return np.zeros(n, dtype=bool), 0
    A, values = _kohli_runs(clauses, n, np.random.default_rng(rng), max(1, int(repeats)))
    best = int(np.argmin(values))
    return A[best], int(values[best])


def kohli_values(clauses, n: int, rng=None, repeats: int = 1000) -> np.ndarray:
    """Values of ``repeats`` independent single greedy runs."""
    clauses = list(clauses)
    if not clauses:
        return np.zeros(repeats, dtype=np.int64)
    return _kohli_runs(clauses, n, np.random.default_rng(rng), repeats)[1]


# --------------------------------------------------------------------------
# subsampling over guesses


@dataclass
class MinSatResult:
    """Unpacks as ``(assignment, value)``."""

    assignment: np.ndarray
    value: float
    space: SpaceReport = field(default_factory=SpaceReport)
    guesses_run: int = 0
    guesses_terminated: int = 0
    settled_count: int = 0
    chosen_z: Optional[int] = None
    estimates: dict = field(default_factory=dict)
    opt_zero: bool = False
    upper_bound: Optional[float] = None

    def __iter__(self):
        return iter((self.assignment, self.value))


def minsat_subsampled(events, params: Parameters, rng=None, offline: str = EXACT,
                      oracle: bool = True, u: Optional[int] = None, repeats=None) -> MinSatResult:
    """Run one settled instance per guess ``z`` and combine them.

    Guesses with ``p = 1`` behave identically, so only the first is run.
    An instance whose stored words exceed ``4 n u`` is terminated.  With
    ``oracle=True`` every surviving assignment is evaluated exactly on a
    separate copy of the input and the smallest wins; otherwise the
    smallest ``z`` whose scaled estimate ``value / p`` is at most ``z`` is
    chosen, falling back to the smallest estimate.
    """
    rng = np.random.default_rng(rng)
    n = params.n
    cfgs = []
    for z in guesses(params.m):
        cfg = MinSatConfig(params, z, u=u, offline=offline)
        if cfg.p >= 1.0 and cfgs and cfgs[-1].p >= 1.0:
            continue
        cfgs.append(cfg)
    rngs = rng.spawn(len(cfgs) + 1)
    total = SpaceMeter()
    meters = [SpaceMeter(c.budget_words) for c in cfgs]
    states = [SettledState(n, c.u, mt) for c, mt in zip(cfgs, meters)]
    alive = [True] * len(cfgs)
    kept = [] if oracle else None
    for c in _insert_only(events):
        if kept is not None:
            kept.append(c)
        for t, (cfg, st) in enumerate(zip(cfgs, states)):
            if not alive[t]:
                continue
            if cfg.p < 1.0 and rngs[t].random() >= cfg.p:
                continue
            try:
                st.update(c)
            except SpaceBudgetExceeded:
                alive[t] = False
                states[t] = None
        total.set("instances", sum(mt.current.get("stored", 0) + mt.current.get("counters", 0)
                                   for mt, ok in zip(meters, alive) if ok))
    survivors = [t for t in range(len(cfgs)) if alive[t]]
    if not survivors:
        raise AllInstancesTerminated("every guess exceeded its space budget")
    outcomes = {}
    for t in survivors:
        a, val = settled_finish(states[t], offline, rngs[-1], repeats)
        outcomes[t] = (a, val, val / cfgs[t].p)
    estimates = {cfgs[t].z: outcomes[t][2] for t in survivors}
    if oracle:
        exact = {t: evaluate(outcomes[t][0], kept) for t in survivors}
        best = min(survivors, key=lambda t: (exact[t], t))
        value = float(exact[best])
    else:
        ok = [t for t in survivors if outcomes[t][2] <= cfgs[t].z]
        best = ok[0] if ok else min(survivors, key=lambda t: (outcomes[t][2], t))
        value = float(outcomes[best][2])
    return MinSatResult(
        assignment=outcomes[best][0],
        value=value,
        space=SpaceReport(total.peak, 0, 0, {f"z={cfgs[t].z}": meters[t].peak for t in range(len(cfgs))}),
        guesses_run=len(cfgs),
        guesses_terminated=len(cfgs) - len(survivors),
        settled_count=states[best].settled_count,
        chosen_z=cfgs[best].z,
        estimates=estimates,
    )


# --------------------------------------------------------------------------
# OPT = 0 and bounded frequency


class SignTracker:
    """Per variable: has it occurred positively, negatively?"""

    def __init__(self, n: int):
        self.n = n
        self.pos = np.zeros(n + 1, dtype=bool)
        self.neg = np.zeros(n + 1, dtype=bool)

    def update(self, clause):
        for k in clause.lits:
            if k > 0:
                self.pos[k] = True
            else:
                self.neg[-k] = True

    def result(self):
        if (self.pos & self.neg).any():
            return False, None
        # positive-only -> false, negative-only -> true, unused -> false
        return True, self.neg[1:].copy()


def detect_opt_zero(events, n: Optional[int] = None):
    """``(True, witness)`` iff some assignment satisfies no clause.

    That happens exactly when no variable occurs with both signs: set each
    variable to the value falsifying its literals.
    """
    clauses = list(_insert_only(events))
    if n is None:
        n = max((max(c.vars) for c in clauses), default=0)
    tr = SignTracker(n)
    for c in clauses:
        tr.update(c)
    return tr.result()


def minsat_bounded_freq(events, n: int, f: int) -> MinSatResult:
    """Min-SAT when every variable occurs in at most ``f`` clauses.

    Clauses longer than ``sqrt(f n)`` are only counted.  Among the rest,
    ``x_i`` is set true iff it occurs positively no more often than
    negatively.  The reported value is the streaming upper bound
    ``large + sum_i |S(l_i)|`` on the assignment's cost (each short clause
    satisfied by the assignment contains some chosen literal ``l_i``).  If
    the optimum is zero the sign-tracking witness is returned with value 0.
    """
    if f < 1:
        raise ConfigError("f must be at least 1")
    limit = math.sqrt(f * n)
    occ = np.zeros(n + 1, dtype=np.int64)
    s_pos = np.zeros(n + 1, dtype=np.int64)
    s_neg = np.zeros(n + 1, dtype=np.int64)
    tr = SignTracker(n)
    large = 0
    meter = SpaceMeter()
    meter.set("counters", 5 * n + 1)
    for c in _insert_only(events):
        tr.update(c)
        v = np.fromiter((abs(k) for k in c.lits), dtype=np.int64)
        occ[v] += 1
        if occ[v].max() > f:
            bad = int(v[np.argmax(occ[v])])
            raise FrequencyBoundViolated(f"variable {bad} occurs in more than f={f} clauses")
        if len(c) > limit:
            large += 1
            continue
        for k in c.lits:
            if k > 0:
                s_pos[k] += 1
            else:
                s_neg[-k] += 1
    zero, witness = tr.result()
    if zero:
        return MinSatResult(witness, 0.0, meter.report(), opt_zero=True, upper_bound=0.0)
    a = s_pos[1:] <= s_neg[1:]
    bound = float(large + np.where(a, s_pos[1:], s_neg[1:]).sum())
    return MinSatResult(a, bound, meter.report(), upper_bound=bound)


# --------------------------------------------------------------------------
# literal coverage sketches


class LiteralSketchBank:
    """One F0 sketch per literal over the ids of the clauses containing it.

    Clause ids are stream positions, so repeated clauses count separately.
    """

    def __init__(self, n: int, k: int, seed: int = 0, delta: float = 1e-3):
        self.n = n
        self.k = k
        self.seed = seed
        self.sketches = {lit: F0Sketch(k, seed, delta)
                         for v in range(1, n + 1) for lit in (v, -v)}
        self.seen = 0
        self._buf = {}

    def update(self, clause):
        for k in clause.lits:
            self._buf.setdefault(k, []).append(self.seen)
        self.seen += 1
        if self.seen % 256 == 0:
            self.flush()

    def flush(self):
        for k, ids in self._buf.items():
            self.sketches[k].update_many(ids)
        self._buf = {}

    @property
    def words(self) -> int:
        return sum(len(s) for s in self.sketches.values()) + 2 * self.n

    def coverage_estimate(self, assignment) -> float:
        """Estimated number of clauses satisfied by ``assignment``."""
        self.flush()
        lits = [v if assignment[v - 1] else -v for v in range(1, self.n + 1)]
        hs = np.unique(np.concatenate([self.sketches[k].min_hashes for k in lits]))
        if hs.size < self.k:
            return float(hs.size)
        return self.k * float(2**64) / (float(hs[self.k - 1]) + 1.0)


def minsat_f0_bruteforce(events, n: int, eps: float = 0.2, delta: float = 1e-3, seed=None):
    """Minimum estimated coverage over all ``2^n`` assignments.

    Returns a :class:`MinSatResult` whose value is the estimate.
    """
    if n > F0_MAX_VARS:
        raise TooManyVariables(f"n={n} exceeds the brute-force guard of {F0_MAX_VARS}")
    bank = LiteralSketchBank(n, f0_size(eps, delta), seed_from(seed), delta)
    for c in _insert_only(events):
        bank.update(c)
    bank.flush()
    best_val, best_a = None, None
    for code in range(1 << n):
        a = np.array([(code >> i) & 1 for i in range(n)], dtype=bool)
        est = bank.coverage_estimate(a)
        if best_val is None or est < best_val:
            best_val, best_a = est, a
    space = SpaceReport(bank.words, 0, 0, {"sketches": bank.words})
    return MinSatResult(best_a, float(best_val), space)


# --------------------------------------------------------------------------
# estimator


class StreamingMinSAT(BaseEstimator):
    """Single-pass Min-SAT approximation.

    Parameters
    ----------
    algo : {"settled", "freq", "f0"}
        Subsampled settled-variable algorithm, bounded-frequency algorithm,
        or literal coverage sketches.
    eps : float
    K : float
    offline : {"exact", "kohli"}
        Offline solver for the settled algorithm.
    f : int or None
        Occurrence bound for ``algo="freq"`` (required there).
    u : int or None
        Override the settling threshold.
    oracle : bool
        Choose among guesses by exact evaluation on a second copy of the
        input (test mode) rather than by scaled estimates.
    delta : float
        Sketch failure probability for ``algo="f0"``.
    random_state : int, Generator or None
    """

    def __init__(self, algo="settled", eps=0.15, K=4.0, offline="exact", f=None, u=None,
                 oracle=True, delta=1e-3, random_state=None):
        self.algo = algo
        self.eps = eps
        self.K = K
        self.offline = offline
        self.f = f
        self.u = u
        self.oracle = oracle
        self.delta = delta
        self.random_state = random_state

    def fit(self, X, y=None, n=None):
        stream = check_stream(X, n=n)
        params = Parameters(stream.n, stream.m, self.eps, self.K)
        if self.algo == "settled":
            repeats = math.ceil(math.log(max(stream.n, 2)) / self.eps) if self.offline == KOHLI else None
            res = minsat_subsampled(stream, params, self.random_state, self.offline,
                                    self.oracle, self.u, repeats)
        elif self.algo == "freq":
            if self.f is None:
                raise ConfigError("algo='freq' needs f")
            res = minsat_bounded_freq(stream, stream.n, int(self.f))
        elif self.algo == "f0":
            res = minsat_f0_bruteforce(stream, stream.n, self.eps, check_delta(self.delta),
                                       self.random_state)
        else:
            raise ConfigError(f"unknown algo {self.algo!r}")
        self.n_vars_ = stream.n
        self.assignment_ = res.assignment
        self.value_ = res.value
        self.space_ = res.space
        self.result_ = res
        return self

    def predict(self, X):
        """Per-clause satisfaction of ``X`` under the fitted assignment."""
        if not hasattr(self, "assignment_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit before predict")
        clauses = check_clauses(X)
        if not clauses:
            return np.zeros(0, dtype=bool)
        return ClauseMatrix(clauses, self.n_vars_).satisfied(self.assignment_)[0]

    def score(self, X, y=None):
        """Number of clauses of ``X`` satisfied (lower is better)."""
        return int(self.predict(X).sum())
