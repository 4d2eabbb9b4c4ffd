import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from satstream.cnf import normalize_clause

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def make_clauses(n, m, lo=1, hi=3, seed=0, pos_bias=0.5):
    """Distinct random clauses; ``pos_bias`` is the chance a literal is positive."""
    rng = np.random.default_rng(seed)
    seen, out = set(), []
    tries = 0
    while len(out) < m and tries < 50 * m + 100:
        tries += 1
        k = int(rng.integers(lo, min(hi, n) + 1))
        vs = rng.choice(n, size=k, replace=False) + 1
        lits = [int(v) if rng.random() < pos_bias else -int(v) for v in vs]
        c = normalize_clause(lits)
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
