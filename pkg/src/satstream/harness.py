"""Experiment runner: random corpora, oracle comparison and JSON-lines reports.

An experiment file looks like::

    {"master_seed": 7,
     "experiments": [
        {"name": "exact-small", "task": "maxsat",
         "params": {"mode": "exact", "eps": 0.15},
         "instances": [{"random": {"n": 12, "m": 300, "size_range": [1, 8], "seed": 1}},
                       {"path": "inst.stream"}],
         "runs": 5,
         "threshold": {"ratio": 0.55, "success_fraction": 0.95}}]}

``task`` is ``maxsat``, ``minsat`` or ``index`` (a generator round trip with
``family`` in ``ksat|maxand|minsat``).  Every run gets a seed derived from
the master seed and its position, so reports are byte-identical across
reruns.  Oracles always work on a separate copy of the clauses.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cnf import (
    DELETE,
    INSERT,
    ClauseStream,
    StreamEvent,
    StreamHeader,
    normalize_clause,
)
from .exceptions import ConfigError, OracleGuardViolated
from .hardness import (
    HardnessConfig,
    exact_maxand,
    gen_and_system,
    gen_ksat_index,
    gen_maxand_index,
    gen_minsat_index,
    ground_truth,
    random_ksat_instance,
    random_maxand_instance,
    random_minsat_instance,
    systems_pairwise_exclusive,
)
from .maxsat import StreamingMaxSAT
from .minsat import StreamingMinSAT
from .oracle import MAX_EXACT_VARS, exact_maxsat, exact_minsat, verify_all_satisfiable
from .validation import check_stream


# --------------------------------------------------------------------------
# corpora


def clause_universe(n: int, lo: int, hi: int) -> int:
    return sum(math.comb(n, k) * 2**k for k in range(lo, hi + 1))


def _check_sizes(n, size_range):
    lo, hi = (size_range, size_range) if isinstance(size_range, int) else tuple(size_range)
    if n < 1 or not 1 <= lo <= hi <= n:
        raise ConfigError(f"size range {size_range} must lie within [1, n={n}]")
    return int(lo), int(hi)


def random_clauses(n: int, m: int, size_range=(1, 3), seed=None) -> list:
    """``m`` distinct random clauses; size uniform in ``size_range``, then
    variables and signs uniform."""
    lo, hi = _check_sizes(n, size_range)
    if m < 0 or m > clause_universe(n, lo, hi):
        raise ConfigError(f"cannot draw {m} distinct clauses of size {lo}..{hi} over {n} variables")
    rng = np.random.default_rng(seed)
    seen, out = set(), []
    while len(out) < m:
        k = int(rng.integers(lo, hi + 1))
        vs = rng.choice(n, size=k, replace=False) + 1
        neg = rng.random(k) < 0.5
        c = normalize_clause(np.where(neg, -vs, vs).tolist())
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def random_instance(n: int, m: int, size_range=(1, 3), seed=None) -> ClauseStream:
    """Insert-only stream of ``m`` distinct random clauses, reproducible by seed."""
    return ClauseStream.from_clauses(random_clauses(n, m, size_range, seed), n=n, m=max(m, 1))


def random_dynamic_instance(n: int, inserts: int, delete_frac: float = 0.3, size_range=(1, 3),
                            seed=None) -> ClauseStream:
    """``inserts`` distinct clauses, a ``delete_frac`` share of which are
    deleted again at a uniformly random later point."""
    if not 0 <= delete_frac <= 1:
        raise ConfigError("delete_frac must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    clauses = random_clauses(n, inserts, size_range, rng)
    gone = rng.choice(inserts, size=int(round(delete_frac * inserts)), replace=False)
    timed = [(float(j), 0, StreamEvent(INSERT, c)) for j, c in enumerate(clauses)]
    for j in sorted(gone.tolist()):
        timed.append((float(rng.uniform(j, inserts)), 1, StreamEvent(DELETE, clauses[j])))
    timed.sort(key=lambda t: (t[0], t[1]))
    return ClauseStream(StreamHeader(n, max(len(timed), 1), True), [e for _, _, e in timed])


def random_f_bounded(n: int, f: int, m: int, size_range=(1, 3), seed=None) -> ClauseStream:
    """Up to ``m`` distinct clauses where no variable occurs in more than ``f``.

    Generation stops early once no clause of the smallest size fits.
    """
    lo, hi = _check_sizes(n, size_range)
    rng = np.random.default_rng(seed)
    room = np.full(n, f, dtype=np.int64)
    seen, out = set(), []
    misses = 0
    while len(out) < m and misses < 200:
        free = np.flatnonzero(room > 0)
        k = int(rng.integers(lo, hi + 1))
        if free.size < k:
            misses += 1
            continue
        vs = rng.choice(free, size=k, replace=False)
        neg = rng.random(k) < 0.5
        c = normalize_clause(np.where(neg, -(vs + 1), vs + 1).tolist())
        if c in seen:
            misses += 1
            continue
        seen.add(c)
        out.append(c)
        room[vs] -= 1
    return ClauseStream.from_clauses(out, n=n, m=max(len(out), 1))


# --------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    master_seed: int = 0
    experiments: list = field(default_factory=list)
    timing: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("experiment config must be a JSON object")
        unknown = set(d) - {"master_seed", "experiments", "timing"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        exps = d.get("experiments", [])
        if not isinstance(exps, list):
            raise ConfigError("'experiments' must be a list")
        for e in exps:
            if not isinstance(e, dict) or e.get("task") not in ("maxsat", "minsat", "index"):
                raise ConfigError(f"experiment needs task maxsat|minsat|index: {e!r}")
        return cls(int(d.get("master_seed", 0)), exps, bool(d.get("timing", False)))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad experiment file: {exc}") from None


@dataclass
class ResultReport:
    runs: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.get("passed", True) for a in self.aggregates)

    def lines(self) -> list:
        return [json.dumps(r, sort_keys=True) for r in self.runs + self.aggregates]

    def to_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.lines())


def run_seed(master: int, *path) -> int:
    return int(np.random.SeedSequence([master, *path]).generate_state(1, np.uint64)[0] >> np.uint64(2))


def _load_instance(item, seed):
    if "path" in item:
        return check_stream(item["path"])
    if "random" in item:
        r = dict(item["random"])
        r.setdefault("seed", seed)
        if r.pop("dynamic", False):
            return random_dynamic_instance(r["n"], r["m"], r.get("delete_frac", 0.3),
                                           r.get("size_range", (1, 3)), r["seed"])
        return random_instance(r["n"], r["m"], r.get("size_range", (1, 3)), r["seed"])
    raise ConfigError(f"instance needs 'path' or 'random': {item!r}")


def _oracle(task, clauses, n, guard):
    used = len({abs(k) for c in clauses for k in c.lits})
    if used > guard:
        raise OracleGuardViolated(f"{used} variables exceed the oracle guard of {guard}")
    if task == "maxsat":
        return exact_maxsat(clauses, n)[1]
    return exact_minsat(clauses, n)[1]


def _ratio(task, value, opt):
    if opt is None:
        return None
    if task == "maxsat":
        return 1.0 if opt == 0 else value / opt
    return value / max(opt, 1)


def _run_solver(exp, e_idx, master, timing):
    task = exp["task"]
    params = dict(exp.get("params", {}))
    threshold = exp.get("threshold", {})
    runs = exp.get("runs", 1)
    use_oracle = exp.get("oracle", True)
    guard = int(exp.get("oracle_guard", MAX_EXACT_VARS))
    out = []
    for i_idx, item in enumerate(exp.get("instances", [])):
        stream = _load_instance(item, run_seed(master, e_idx, i_idx))
        final = stream.final_clauses()
        opt = _oracle(task, final, stream.n, guard) if use_oracle else None
        for r in range(runs):
            seed = run_seed(master, e_idx, i_idx, r)
            t0 = time.perf_counter()
            if task == "maxsat":
                est = StreamingMaxSAT(random_state=seed, **params).fit(stream)
                value = est.score(final)
                extra = {"estimate": est.estimate_, "branch": est.branch_}
            else:
                est = StreamingMinSAT(random_state=seed, **params).fit(stream)
                value = est.score(final)
                extra = {"estimate": est.value_}
            rec = {"experiment": exp.get("name", f"exp{e_idx}"), "instance": i_idx, "run": r,
                   "seed": seed, "value": int(value), "opt": opt, "ratio": _ratio(task, value, opt),
                   "space": est.space_.to_dict(), **extra}
            if timing:
                rec["runtime_ms"] = round(1000 * (time.perf_counter() - t0), 3)
            if "ratio" in threshold and opt is not None:
                if task == "maxsat":
                    rec["success"] = value >= threshold["ratio"] * opt
                else:
                    rec["success"] = value <= threshold["ratio"] * max(opt, 1)
            out.append(rec)
    return out


def _run_index(exp, e_idx, master):
    family = exp.get("family", "ksat")
    count = int(exp.get("count", 1))
    cfg = HardnessConfig(**exp.get("config", {}))
    out = []
    for t in range(count):
        seed = run_seed(master, e_idx, t)
        rng = np.random.default_rng(seed)
        rec = {"experiment": exp.get("name", f"exp{e_idx}"), "instance": t, "seed": seed}
        if family == "ksat":
            inst = random_ksat_instance(cfg, rng)
            W = gen_ksat_index(inst, cfg)
            truth = ground_truth("ksat", inst, cfg, len(W))
            got = verify_all_satisfiable(W, cfg.n) is not None
            rec.update(expected=truth["satisfiable"], observed=got, success=got == truth["satisfiable"])
        elif family == "maxand":
            cfg.seed = seed
            inst = random_maxand_instance(cfg, rng)
            ok = systems_pairwise_exclusive(gen_and_system(cfg.m, cfg.T, cfg.seed))
            W = gen_maxand_index(inst, cfg)
            truth = ground_truth("maxand", inst, cfg)
            got = exact_maxand(W, cfg.n + cfg.T)[1]
            rec.update(system_ok=ok, expected=truth["expected_opt"], observed=got,
                       success=(got == truth["expected_opt"]) if ok else None)
        elif family == "minsat":
            inst = random_minsat_instance(cfg.n, rng)
            W = gen_minsat_index(inst, cfg.n)
            truth = ground_truth("minsat", inst, cfg)
            got = exact_minsat(W, cfg.n)[1]
            rec.update(expected=truth["expected_opt"], observed=got, success=got == truth["expected_opt"])
        else:
            raise ConfigError(f"unknown index family {family!r}")
        out.append(rec)
    return out


def _aggregate(exp, e_idx, runs):
    judged = [r for r in runs if r.get("success") is not None]
    ratios = [r["ratio"] for r in runs if r.get("ratio") is not None]
    agg = {"experiment": exp.get("name", f"exp{e_idx}"), "aggregate": True, "runs": len(runs),
           "success_fraction": (sum(bool(r["success"]) for r in judged) / len(judged)) if judged else None,
           "mean_ratio": float(np.mean(ratios)) if ratios else None}
    need = exp.get("threshold", {}).get("success_fraction")
    if need is not None:
        agg["passed"] = agg["success_fraction"] is not None and agg["success_fraction"] >= need
    return agg


def run_experiment(cfg) -> ResultReport:
    """Run every experiment in ``cfg`` (an :class:`ExperimentConfig` or dict)."""
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    report = ResultReport()
    for e_idx, exp in enumerate(cfg.experiments):
        if exp["task"] == "index":
            runs = _run_index(exp, e_idx, cfg.master_seed)
        else:
            runs = _run_solver(exp, e_idx, cfg.master_seed, cfg.timing)
        report.runs.extend(runs)
        report.aggregates.append(_aggregate(exp, e_idx, runs))
    return report
