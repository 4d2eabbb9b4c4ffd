"""Streaming Max-SAT.

The pipeline drops large clauses (they are satisfied with high probability
by any assignment that sets every literal true with probability at least
``gamma``), keeps a uniform sample ``W`` of the small ones and post-processes
``W`` offline:

* ``exact_perturb``: solve ``W`` exactly, then keep the best of ``Q``
  perturbed copies where each bit is flipped with probability ``eps``.
* ``lp_round``: solve the LP relaxation of ``W`` and keep the best of ``Q``
  roundings with ``P[x_i] = 1/4 + y*_i / 2``.

Static streams sample with a reservoir, dynamic streams with L0 samplers
over the encoded small-clause universe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from sklearn.base import BaseEstimator

from .cnf import (
    DISJUNCTIVE,
    INSERT,
    Clause,
    Parameters,
    check_no_duplicate,
    clause_decode,
    clause_index,
    universe_size,
)
from .evaluation import ClauseMatrix, as_assignment, evaluate
from .exceptions import ConfigError, SpaceBudgetExceeded
from .lp import build_lp, lp_round, solve_lp
from .oracle import exact_maxsat
from .samplers import MERSENNE_61, L0Sampler, Reservoir, l0_final_sample, seed_from
from .space import SpaceMeter, SpaceReport, clause_words
from .validation import check_clauses, check_delta, check_stream

__all__ = [
    "EXACT_PERTURB",
    "LP_ROUND",
    "MaxSatConfig",
    "MaxSatResult",
    "StreamingMaxSAT",
    "best_of_trials",
    "evaluate",
    "exact_maxsat",
    "is_large",
    "one_literal_branch",
    "perturb",
    "postprocess_exact_perturb",
    "postprocess_lp_round",
    "stream_maxsat",
]

EXACT_PERTURB = "exact_perturb"
LP_ROUND = "lp_round"
_MODE_ALIASES = {"exact": EXACT_PERTURB, EXACT_PERTURB: EXACT_PERTURB,
                 "lp": LP_ROUND, LP_ROUND: LP_ROUND}


def log_m(m: int) -> float:
    # ln 1 = 0 would make every clause large; treat tiny m as 2
    return math.log(max(m, 2))


@dataclass
class MaxSatConfig:
    """Derived sizes for one run.

    ``beta``, ``Q`` and ``s`` default to ``ceil(K ln m / gamma)``,
    ``ceil(K ln m / eps)`` and ``ceil(K n / eps^2)``; pass explicit values to
    override them.
    """

    params: Parameters
    mode: str = EXACT_PERTURB
    dynamic: bool = False
    beta: Optional[int] = None
    Q: Optional[int] = None
    s: Optional[int] = None

    def __post_init__(self):
        if self.mode not in _MODE_ALIASES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        self.mode = _MODE_ALIASES[self.mode]
        p = self.params
        lm = log_m(p.m)
        if self.beta is None:
            self.beta = math.ceil(p.K * lm / self.gamma)
        if self.Q is None:
            self.Q = math.ceil(p.K * lm / p.eps)
        if self.s is None:
            self.s = math.ceil(p.K * p.n / p.eps**2)
        self.beta, self.Q, self.s = max(1, int(self.beta)), max(1, int(self.Q)), max(1, int(self.s))

    @classmethod
    def build(cls, n, m, eps=0.15, K=4.0, mode=EXACT_PERTURB, dynamic=False, **overrides):
        return cls(Parameters(n, m, eps, K), mode, dynamic, **overrides)

    @property
    def gamma(self) -> float:
        return self.params.eps if self.mode == EXACT_PERTURB else 0.25

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def eps(self) -> float:
        return self.params.eps

    @property
    def stream_kind(self) -> str:
        return "dynamic" if self.dynamic else "static"

    def to_dict(self) -> dict:
        p = self.params
        return {"n": p.n, "m": p.m, "eps": p.eps, "K": p.K, "mode": self.mode,
                "gamma": self.gamma, "beta": self.beta, "Q": self.Q, "s": self.s,
                "stream_kind": self.stream_kind}


@dataclass
class MaxSatResult:
    """Unpacks as ``(assignment, estimate, space)``."""

    assignment: np.ndarray
    estimate: float
    space: SpaceReport
    estimate_conservative: float = 0.0
    satisfied_on_sample: int = 0
    sample: list = field(default_factory=list)
    small_count: int = 0
    large_count: int = 0
    branch: str = "meta"

    def __iter__(self):
        return iter((self.assignment, self.estimate, self.space))


def is_large(c: Clause, beta: int) -> bool:
    return len(c) >= beta


def perturb(a, eps: float, rng=None, size: Optional[int] = None) -> np.ndarray:
    """Flip each bit of ``a`` independently with probability ``eps``.

    With ``size``, returns that many independent perturbations as rows.
    """
    a = as_assignment(a)
    rng = np.random.default_rng(rng)
    shape = a.shape if size is None else (size,) + a.shape
    return a ^ (rng.random(shape) < eps)


def _scores(trials, W, n) -> np.ndarray:
    if not W:
        return np.zeros(len(trials), dtype=np.int64)
    return ClauseMatrix(W, n).count(np.asarray(trials))


def best_of_trials(make_trial: Callable, Q: int, W, n: Optional[int] = None) -> np.ndarray:
    """Best of ``Q`` calls to ``make_trial()`` by satisfied count on ``W``.

    The earliest trial wins ties.
    """
    if Q < 1:
        raise ConfigError("Q must be at least 1")
    trials = np.array([as_assignment(make_trial()) for _ in range(Q)])
    W = list(W)
    scores = _scores(trials, W, n if n is not None else trials.shape[1])
    return trials[int(np.argmax(scores))]


def postprocess_exact_perturb(W, cfg: MaxSatConfig, rng=None, eps: Optional[float] = None) -> np.ndarray:
    """Exact optimum of ``W`` followed by the best of ``cfg.Q`` perturbations.

    ``eps`` overrides the flip probability (``0`` leaves the optimum as is).
    """
    W = list(W)
    n = cfg.n
    if not W:
        return np.zeros(n, dtype=bool)
    rng = np.random.default_rng(rng)
    opt, _ = exact_maxsat(W, n)
    flip = cfg.eps if eps is None else eps
    trials = perturb(opt, flip, rng, size=cfg.Q)
    return trials[int(np.argmax(_scores(trials, W, n)))]


def postprocess_lp_round(W, cfg: MaxSatConfig, rng=None) -> np.ndarray:
    """Best of ``cfg.Q`` LP roundings on ``W``."""
    W = list(W)
    n = cfg.n
    if not W:
        return np.zeros(n, dtype=bool)
    rng = np.random.default_rng(rng)
    sol = solve_lp(build_lp(W, n))
    trials = lp_round(sol, rng, size=cfg.Q)
    return trials[int(np.argmax(_scores(trials, W, n)))]


def _postprocess(W, cfg, rng):
    if cfg.mode == EXACT_PERTURB:
        return postprocess_exact_perturb(W, cfg, rng)
    return postprocess_lp_round(W, cfg, rng)


def _reservoir_sample(events, cfg, rng, meter):
    res = Reservoir(cfg.s, rng)
    small = large = 0
    words = 0
    meter.set("counters", 3)
    for ev in events:
        if ev.op != INSERT:
            raise ConfigError("delete event in a static stream")
        c = ev.clause
        if is_large(c, cfg.beta):
            large += 1
            continue
        small += 1
        accepted, evicted = res.update(c)
        if accepted:
            words += clause_words(c) - (clause_words(evicted) if evicted is not None else 0)
            meter.set("reservoir", words)
    return list(res.items), small, large


def _l0_sample(events, cfg, rng, meter, delta, strict, batch=512):
    n, bsmall = cfg.n, cfg.beta - 1
    meter.set("counters", 2)
    small = large = 0
    sampler = None
    if bsmall >= 1:
        universe = universe_size(n, bsmall)
        if universe > MERSENNE_61:
            raise ConfigError(f"small-clause universe of {universe} exceeds the sampler range; reduce n or beta")
        sampler = L0Sampler(universe, copies=cfg.s, delta=delta, random_state=seed_from(rng))
        meter.set("l0", sampler.words)
    live = set() if strict else None
    buf_i, buf_d = [], []
    for ev in events:
        if live is not None:
            check_no_duplicate(live, ev)
        c = ev.clause
        d = 1 if ev.op == INSERT else -1
        if is_large(c, cfg.beta):
            large += d
            continue
        small += d
        buf_i.append(clause_index(c, n, bsmall))
        buf_d.append(d)
        if len(buf_i) >= batch:
            sampler.update_many(buf_i, buf_d)
            buf_i, buf_d = [], []
    if sampler is None:
        return [], small, large
    sampler.update_many(buf_i, buf_d)
    W = [clause_decode(i, n, bsmall) for i in l0_final_sample(sampler)]
    meter.set("sample", sum(clause_words(c) for c in W))
    return W, small, large


def stream_maxsat(events, cfg: MaxSatConfig, rng=None, budget_words=None, strict: bool = True,
                  delta: float = 1e-3) -> MaxSatResult:
    """One pass over ``events`` followed by post-processing of the sample.

    The estimate is ``sat_W * small / |W| + large``: the satisfied count on
    the sample scaled to all small clauses, plus the dropped large clauses
    (satisfied with high probability, so this is not a certificate).
    ``estimate_conservative`` leaves the large clauses out.
    """
    rng = np.random.default_rng(rng)
    sample_rng, post_rng = rng.spawn(2)
    meter = SpaceMeter(budget_words)
    if cfg.dynamic:
        W, small, large = _l0_sample(events, cfg, sample_rng, meter, check_delta(delta), strict)
    else:
        W, small, large = _reservoir_sample(events, cfg, sample_rng, meter)
    a = _postprocess(W, cfg, post_rng)
    sat = evaluate(a, W) if W else 0
    scaled = sat * small / len(W) if W else 0.0
    return MaxSatResult(
        assignment=a,
        estimate=float(scaled + max(large, 0)),
        space=meter.report(len(W), max(large, 0)),
        estimate_conservative=float(scaled),
        satisfied_on_sample=int(sat),
        sample=W,
        small_count=small,
        large_count=large,
    )


def one_literal_branch(events, cfg: MaxSatConfig, rng=None, budget_words=None) -> MaxSatResult:
    """Max-SAT on an insertion-only stream that tracks unit clauses.

    Two bookkeeping paths run side by side:

    * A: ``Q`` fair-coin assignments fixed up front, each scored online on
      the clauses with at least two literals.
    * B: every clause with at most ``K ln m`` literals is stored, within
      ``(2n/eps + 1)`` clauses' worth of words.

    At the end, if at most ``eps * m`` unit clauses arrived, the best A
    assignment is returned.  Otherwise at most ``2n`` distinct units forces
    ``m < 2n/eps``, so B holds every short clause and is LP-rounded.  If B
    overflowed in that case the stream had duplicates.
    """
    rng = np.random.default_rng(rng)
    coin_rng, post_rng = rng.spawn(2)
    p, n = cfg.params, cfg.n
    meter = SpaceMeter(budget_words)
    short = max(1, math.floor(p.K * log_m(p.m)))
    cap_b = (math.floor(2 * n / p.eps) + 1) * (2 + short)

    trials = coin_rng.random((cfg.Q, n)) < 0.5
    scores = np.zeros(cfg.Q, dtype=np.int64)
    meter.set("branch_a", cfg.Q * (math.ceil(n / 64) + 1))
    meter.set("counters", 3)
    stored, b_words, overflow = [], 0, False
    units = seen = long_b = 0
    for ev in events:
        if ev.op != INSERT:
            raise ConfigError("the one-literal branch needs an insertion-only stream")
        c = ev.clause
        seen += 1
        if len(c) == 1:
            units += 1
        else:
            lits = np.array(c.lits)
            cols = trials[:, np.abs(lits) - 1]
            scores += (cols == (lits > 0)).any(axis=1)
        if len(c) > short:
            long_b += 1
        elif not overflow:
            if b_words + clause_words(c) > cap_b:
                overflow = True
                stored, b_words = [], 0
            else:
                stored.append(c)
                b_words += clause_words(c)
            meter.set("branch_b", b_words)

    if units <= p.eps * seen:
        best = int(np.argmax(scores))
        est = float(scores[best])
        return MaxSatResult(trials[best], est, meter.report(0, 0), est, int(scores[best]),
                            [], seen - units, 0, "A")
    if overflow:
        raise SpaceBudgetExceeded(
            f"branch B needed more than {cap_b} words; the stream likely repeats clauses")
    lp_cfg = MaxSatConfig(p, LP_ROUND, False, beta=cfg.beta, Q=cfg.Q, s=cfg.s)
    a = postprocess_lp_round(stored, lp_cfg, post_rng)
    sat = evaluate(a, stored) if stored else 0
    return MaxSatResult(a, float(sat + long_b), meter.report(len(stored), long_b), float(sat),
                        int(sat), stored, len(stored), long_b, "B")


class StreamingMaxSAT(BaseEstimator):
    """Single-pass Max-SAT approximation.

    Parameters
    ----------
    mode : {"exact", "lp"}
        Post-processing: exact solve plus perturbation, or LP rounding.
    eps : float
        Accuracy, in (0, 1/4).
    K : float
        Sampling constant.
    dynamic : bool or None
        Force the L0 path (True) or the reservoir path (False); by default
        follow the stream header.
    strict : bool
        Reject duplicate inserts of live clauses in dynamic streams.
    budget_words : int or None
        Abort with ``SpaceBudgetExceeded`` past this many stored words.
    delta : float
        Per-sampler failure probability on the L0 path.
    one_literal : bool
        Use the unit-clause branch instead of the sampling pipeline.
    random_state : int, Generator or None
    """

    def __init__(self, mode="exact", eps=0.15, K=4.0, dynamic=None, strict=True,
                 budget_words=None, delta=1e-3, one_literal=False, random_state=None):
        self.mode = mode
        self.eps = eps
        self.K = K
        self.dynamic = dynamic
        self.strict = strict
        self.budget_words = budget_words
        self.delta = delta
        self.one_literal = one_literal
        self.random_state = random_state

    def _config(self, stream):
        dynamic = stream.dynamic if self.dynamic is None else bool(self.dynamic)
        return MaxSatConfig(Parameters(stream.n, stream.m, self.eps, self.K), self.mode, dynamic)

    def fit(self, X, y=None, n=None):
        stream = check_stream(X, n=n)
        if stream.kind != DISJUNCTIVE:
            raise ConfigError("StreamingMaxSAT expects disjunctive clauses")
        cfg = self._config(stream)
        if self.one_literal:
            res = one_literal_branch(stream, cfg, self.random_state, self.budget_words)
        else:
            res = stream_maxsat(stream, cfg, self.random_state, self.budget_words,
                                self.strict, self.delta)
        self.config_ = cfg
        self.n_vars_ = stream.n
        self.assignment_ = res.assignment
        self.estimate_ = res.estimate
        self.estimate_conservative_ = res.estimate_conservative
        self.satisfied_on_sample_ = res.satisfied_on_sample
        self.sample_ = res.sample
        self.space_ = res.space
        self.branch_ = res.branch
        self.result_ = res
        return self

    def _check_fitted(self):
        if not hasattr(self, "assignment_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("call fit before predict")

    def predict(self, X):
        """Per-clause satisfaction of ``X`` under the fitted assignment."""
        self._check_fitted()
        clauses = check_clauses(X)
        if not clauses:
            return np.zeros(0, dtype=bool)
        return ClauseMatrix(clauses, self.n_vars_).satisfied(self.assignment_)[0]

    def score(self, X, y=None):
        """Number of clauses of ``X`` satisfied by the fitted assignment."""
        return int(self.predict(X).sum())
