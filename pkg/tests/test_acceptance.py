"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the "acceptance criteria" section of the pytest
terminal summary.  Tolerances are the stated ones; nothing is retried.
"""
import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import make_clauses, record
from satstream import (
    ClauseStream,
    F0Sketch,
    HardnessConfig,
    L0Sampler,
    StreamingMaxSAT,
    StreamingMinSAT,
    build_lp,
    detect_opt_zero,
    evaluate,
    exact_maxand,
    exact_maxsat,
    exact_minsat,
    gen_and_system,
    gen_ksat_index,
    gen_maxand_index,
    gen_minsat_index,
    gen_Sk,
    kohli_values,
    minsat_bounded_freq,
    minsat_f0_bruteforce,
    minsat_settled,
    random_dynamic_instance,
    random_f_bounded,
    random_instance,
    random_ksat_instance,
    random_maxand_instance,
    random_minsat_instance,
    solve_lp,
    solve_lp_exact,
    systems_pairwise_exclusive,
    verify_all_satisfiable,
)
from satstream.cnf import normalize_clause
from satstream.hardness import ksat_flat_index
from satstream.harness import random_clauses

EPS, K = 0.15, 4.0
RUNS_PER_INSTANCE = 5


def _outcome(number, ok, detail):
    record(number, ok, detail)
    assert ok, detail


@pytest.fixture(scope="module")
def maxsat_corpus():
    """20 instances: n from 12 to 20, m from 300 to 3000, clause sizes 1..8."""
    out = []
    for i in range(20):
        n = 12 + (8 * i) // 19
        m = int(round(300 + i * 2700 / 19))
        stream = random_instance(n, m, (1, 8), seed=1000 + i)
        clauses = stream.final_clauses()
        opt = exact_maxsat(clauses, n)[1]
        out.append((stream, clauses, n, opt))
    return out


def _maxsat_runs(corpus, mode, factor):
    hits, total, slowest = 0, 0, 0.0
    for i, (stream, clauses, n, opt) in enumerate(corpus):
        for r in range(RUNS_PER_INSTANCE):
            t0 = time.perf_counter()
            est = StreamingMaxSAT(mode=mode, eps=EPS, K=K, random_state=10_000 * i + r).fit(stream)
            slowest = max(slowest, time.perf_counter() - t0)
            hits += est.score(clauses) >= factor * opt
            total += 1
    return hits, total, slowest


def test_criterion_01_exact_perturb(maxsat_corpus):
    hits, total, slowest = _maxsat_runs(maxsat_corpus, "exact", 1 - 3 * EPS)
    ok = hits >= 0.95 * total and slowest < 10
    _outcome(1, ok, f"exact_perturb: {hits}/{total} runs >= (1-3eps)OPT, slowest run {slowest:.2f}s")


def test_criterion_02_lp_round(maxsat_corpus):
    hits, total, slowest = _maxsat_runs(maxsat_corpus, "lp", 0.75 - 3 * EPS)
    worst = 0.0
    for j in range(20):
        n = 6 + j % 7
        m = 10 + (40 * j) // 19
        clauses = random_clauses(n, m, (1, 4), seed=2000 + j)
        model = build_lp(clauses, n)
        exact = float(solve_lp_exact(model)[0])
        worst = max(worst, abs(solve_lp(model).objective - exact))
    ok = hits >= 0.95 * total and worst <= 1e-6
    _outcome(2, ok, f"lp_round: {hits}/{total} runs >= (3/4-3eps)OPT, LP vs rational max gap {worst:.2e}")


def test_criterion_03_folklore_bound():
    rng = np.random.default_rng(3)
    violations = 0
    for t in range(1000):
        n = int(rng.integers(1, 11))
        hi = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, 41))
        clauses = make_clauses(n, m, 1, hi, seed=30_000 + t)
        violations += exact_maxsat(clauses, n)[1] < math.ceil(len(clauses) / 2)
    _outcome(3, violations == 0, f"oracle value >= ceil(m/2) on 1000 instances, {violations} violations")


def test_criterion_04_dynamic_streams():
    n, eps, k = 10, 0.2, 1.0
    dyn, ins = [], []
    for seed in range(100):
        stream = random_dynamic_instance(n, 700, 0.3, (1, 8), seed=4000 + seed)
        final = stream.final_clauses()
        opt = exact_maxsat(final, n)[1]
        a = StreamingMaxSAT(mode="lp", eps=eps, K=k, random_state=seed).fit(stream)
        assert a.config_.dynamic
        b = StreamingMaxSAT(mode="lp", eps=eps, K=k, random_state=seed).fit(
            ClauseStream.from_clauses(final, n=n))
        dyn.append(a.score(final) / opt)
        ins.append(b.score(final) / opt)
    diff = abs(np.mean(dyn) - np.mean(ins))

    # uniformity of single extractions from the support {0, 37, ..., 259}
    support = [37 * j for j in range(8)]
    counts = np.zeros(8, dtype=np.int64)
    failures = 0
    for chunk in range(10):
        st = L0Sampler(1 << 10, copies=1000, delta=0.01, random_state=400 + chunk)
        st.update_many(support, 1)
        for idx in st.extract_all():
            if idx is None:
                failures += 1
            else:
                counts[support.index(idx)] += 1
    pval = stats.chisquare(counts).pvalue
    ok = diff <= 0.05 and pval > 0.01 and failures <= 0.01 * 10_000
    _outcome(4, ok, f"mean ratio dynamic {np.mean(dyn):.4f} vs insert-only {np.mean(ins):.4f} "
                    f"(diff {diff:.4f}); chi-square p={pval:.3f} over {counts.sum()} draws, "
                    f"{failures} failed extractions")


def test_criterion_05_sk_unsatisfiable():
    bad = []
    for k in range(1, 5):
        S = gen_Sk(k)
        if verify_all_satisfiable(S, k) is not None:
            bad.append((k, "satisfiable"))
        for j in range(len(S)):
            if verify_all_satisfiable(S[:j] + S[j + 1:], k) is None:
                bad.append((k, j))
    _outcome(5, not bad, f"S_k unsatisfiable and every deletion satisfiable for k=1..4, failures {bad}")


def test_criterion_06_ksat_reduction():
    cfg = HardnessConfig(n=9, k=3)
    rng = np.random.default_rng(6)
    agree, outside = 0, 0
    sigma = math.sqrt(27 * 0.25)
    counts = []
    for _ in range(50):
        inst = random_ksat_instance(cfg, rng)
        clauses = gen_ksat_index(inst, cfg)
        sat = verify_all_satisfiable(clauses, 9) is not None
        agree += sat == (not inst.bits[ksat_flat_index(inst.index, 3)])
        alice = len(clauses) - 7
        counts.append(alice)
        outside += abs(alice - 13.5) > 3 * sigma
    ok = agree == 50 and outside == 0
    _outcome(6, ok, f"satisfiable == (A_i = 0) in {agree}/50; Alice counts {min(counts)}..{max(counts)}, "
                    f"{outside} outside 13.5 +- {3 * sigma:.2f}")


def test_criterion_07_maxand_reduction():
    passing, correct = 0, 0
    rng = np.random.default_rng(7)
    for trial in range(50):
        cfg = HardnessConfig(n=16, m=16, T=12, seed=7000 + trial)
        if not systems_pairwise_exclusive(gen_and_system(cfg.m, cfg.T, cfg.seed)):
            continue
        passing += 1
        inst = random_maxand_instance(cfg, rng)
        clauses = gen_maxand_index(inst, cfg)
        i1, i2 = inst.index
        expected = 1 + int(inst.bits[(i1 - 1) * cfg.n + (i2 - 1)])
        correct += exact_maxand(clauses, cfg.n + cfg.T)[1] == expected
    ok = passing >= 45 and correct == passing
    _outcome(7, ok, f"system check passed {passing}/50; Max-AND value == 1 + A in {correct}/{passing}")


def test_criterion_08_settled_exact():
    rng = np.random.default_rng(8)
    violations, over_budget, settled_runs = 0, 0, 0
    for t in range(100):
        n = int(rng.integers(4, 13))
        m = int(rng.integers(20, 121))
        bias = float(rng.choice([0.5, 0.8, 0.9]))
        clauses = make_clauses(n, m, 1, 4, seed=8000 + t, pos_bias=bias)
        opt = exact_minsat(clauses, n)[1]
        u = max(opt, 1)
        stream = ClauseStream.from_clauses(clauses, n=n)
        a, val, st = minsat_settled(stream, n, u, offline="exact")
        violations += not (val == opt and evaluate(a, clauses) == opt)
        over_budget += st.max_stored > 2 * n * u
        settled_runs += st.settled_count > 0
    ok = violations == 0 and over_budget == 0
    _outcome(8, ok, f"value == OPT on 100 instances ({violations} violations), stored > 2nu in "
                    f"{over_budget}; {settled_runs} instances settled at least one variable")


def test_criterion_09_subsampled():
    n, eps = 10, 0.2
    stream = random_instance(n, 5000, (1, 8), seed=9)
    clauses = stream.final_clauses()
    opt = exact_minsat(clauses, n)[1]
    hits = 0
    for r in range(50):
        est = StreamingMinSAT(algo="settled", eps=eps, offline="exact", random_state=r).fit(stream)
        hits += est.score(clauses) <= (1 + 3 * eps) * opt
    _outcome(9, hits >= 45, f"value <= (1+3eps)OPT in {hits}/50 runs (OPT={opt})")


def _sign_consistent(clauses, n, rng):
    sign = np.where(rng.random(n + 1) < 0.5, 1, -1)
    seen, out = set(), []
    for c in clauses:
        d = normalize_clause([int(sign[abs(k)]) * abs(k) for k in c.lits])
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def test_criterion_10_bounded_frequency():
    n, f = 12, 4
    rng = np.random.default_rng(10)
    bound_bad, detect_bad, zeros = 0, 0, 0
    for t in range(100):
        m = int(rng.integers(4, 21))
        clauses = random_f_bounded(n, f, m, (1, 3), seed=10_000 + t).final_clauses()
        if t % 2:
            clauses = _sign_consistent(clauses, n, rng)
        stream = ClauseStream.from_clauses(clauses, n=n)
        opt = exact_minsat(clauses, n)[1]
        res = minsat_bounded_freq(stream, n, f)
        cap = 2 * math.sqrt(f * n) * max(opt, 1)
        actual = evaluate(res.assignment, clauses)
        bound_bad += not (actual <= res.value <= cap)
        zero, witness = detect_opt_zero(stream, n)
        zeros += zero
        detect_bad += zero != (opt == 0) or (zero and evaluate(witness, clauses) != 0)
    ok = bound_bad == 0 and detect_bad == 0
    _outcome(10, ok, f"value <= 2sqrt(fn)max(OPT,1): {bound_bad} violations; opt-zero detection "
                     f"disagreements {detect_bad} ({zeros} instances with OPT=0)")


def test_criterion_11_kohli():
    worst = 0.0
    bad = 0
    for j in range(20):
        n = 6 + j % 7
        clauses = make_clauses(n, 15 + 2 * j, 1, 4, seed=11_000 + j, pos_bias=0.7)
        opt = exact_minsat(clauses, n)[1]
        mean = kohli_values(clauses, n, np.random.default_rng(j), repeats=1000).mean()
        bad += mean > 2 * opt * 1.1
        if opt:
            worst = max(worst, mean / opt)
    _outcome(11, bad == 0, f"mean over 1000 repeats <= 2.2 OPT on {20 - bad}/20 instances, "
                           f"worst mean/OPT {worst:.3f}")


def test_criterion_12_f0():
    eps = 0.1
    good = 0
    for r in range(200):
        sk = F0Sketch.for_accuracy(eps, seed=r).update_many(np.arange(10_000) + 10_000 * r)
        good += abs(sk.estimate() - 10_000) <= eps * 10_000

    n, eps2 = 8, 0.2
    within, runs = 0, 0
    for j in range(10):
        stream = random_instance(n, 2000, (1, 8), seed=12_000 + j)
        opt = exact_minsat(stream.final_clauses(), n)[1]
        for r in range(5):
            est = minsat_f0_bruteforce(stream, n, eps2, seed=100 * j + r).value
            within += opt / (1 + eps2) <= est <= (1 + eps2) * opt
            runs += 1
    ok = good >= 190 and within >= 0.9 * runs
    _outcome(12, ok, f"bottom-k within eps in {good}/200 runs; coverage brute force within (1+eps) "
                     f"in {within}/{runs} runs")


def test_criterion_13_minsat_gadget():
    rng = np.random.default_rng(13)
    bad = 0
    for _ in range(100):
        inst = random_minsat_instance(10, rng)
        opt = exact_minsat(gen_minsat_index(inst, 10), 10)[1]
        bad += (opt > 0) != (not inst.bits[inst.index - 1])
    _outcome(13, bad == 0, f"OPT > 0 iff A_i = 0 on 100 instances, {bad} violations")


def test_criterion_14_space_scaling():
    # sizes 4..8 over 20 variables keep the clause-size mix stationary along
    # the stream (distinct-clause rejection exhausts short clauses otherwise)
    n, k = 20, 1.0
    clauses = random_clauses(n, 100_000, (4, 8), seed=14)
    big = ClauseStream.from_clauses(clauses, n=n)
    small = ClauseStream.from_clauses(clauses[:10_000], n=n)
    svals, words, drift = [], [], []
    for eps in (0.24, 0.2, 0.17, 0.14, 0.12):
        w = []
        for stream in (small, big):
            est = StreamingMaxSAT(mode="exact", eps=eps, K=k, dynamic=False, random_state=1).fit(stream)
            w.append(est.space_.words_stored_peak)
        svals.append(est.config_.s)
        words.append(w[1])
        drift.append(abs(w[1] - w[0]) / w[0])
    r2 = stats.linregress(svals, words).rvalue ** 2
    ok = r2 >= 0.99 and max(drift) <= 0.05
    _outcome(14, ok, f"s={svals}: peak words {words}, R^2={r2:.5f}; max change 1e4->1e5 "
                     f"{100 * max(drift):.2f}%")


def test_corpus_sizes(maxsat_corpus):
    ns = [n for _, _, n, _ in maxsat_corpus]
    ms = [len(c) for _, c, _, _ in maxsat_corpus]
    assert min(ns) == 12 and max(ns) == 20
    assert min(ms) == 300 and max(ms) == 3000
    assert all(1 <= len(c) <= 8 for _, cl, _, _ in maxsat_corpus for c in itertools.islice(cl, 50))
