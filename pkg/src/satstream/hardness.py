"""Generators and verifiers for the hard instance families.

Each generator is a pure function of its inputs (and a seed where shared
randomness is needed).  Alice's clauses come before Bob's in every stream.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .cnf import CONJUNCTIVE, DISJUNCTIVE, Clause, normalize_clause
from .exceptions import ConfigError, DimensionMismatch, InstanceTooLarge, KTooLarge
from .oracle import exact_maxsat, verify_all_satisfiable

__all__ = [
    "HardnessConfig",
    "IndexInstance",
    "exact_maxand",
    "gen_Sk",
    "gen_and_system",
    "gen_ksat_index",
    "gen_maxand_index",
    "gen_minsat_index",
    "ground_truth",
    "ksat_flat_index",
    "random_ksat_instance",
    "random_maxand_instance",
    "random_minsat_instance",
    "sidecar",
    "systems_pairwise_exclusive",
    "verify_all_satisfiable",
]

MAX_SK = 20
MAX_AND_CLAUSES = 1000
BRUTE_FORCE_VARS = 25


@dataclass
class IndexInstance:
    """Alice's bits and Bob's index (1-based).

    ``index`` is an int for the Min-SAT gadget, a k-tuple for the k-SAT
    reduction and a pair ``(i1, i2)`` for Max-AND.
    """

    bits: np.ndarray
    index: object

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool).ravel()

    @property
    def t(self) -> int:
        return int(self.bits.size)


@dataclass
class HardnessConfig:
    n: int = 9
    k: int = 3
    m: int = 16
    T: Optional[int] = None
    seed: int = 0
    K: float = 10.0

    def __post_init__(self):
        if self.T is None:
            self.T = max(1, math.ceil(self.K * math.log2(max(self.m, 2))))

    def check_ksat(self):
        if self.k < 1 or self.n % self.k:
            raise DimensionMismatch(f"n={self.n} must be a multiple of k={self.k}")
        if self.k > self.n / math.e:
            raise ConfigError(f"k={self.k} exceeds n/e for n={self.n}")


def gen_Sk(k: int) -> list:
    """The ``2^k`` clauses ``(OR_{l in S} ~x_l) OR (OR_{l not in S} x_l)`` over ``S`` in ``[k]``.

    Clause ``t`` negates exactly the variables whose bit is set in ``t``.
    """
    if k > MAX_SK:
        raise KTooLarge(f"k={k} would emit 2^{k} clauses; the limit is {MAX_SK}")
    if k < 1:
        raise ConfigError("k must be at least 1")
    return [_pattern_clause(range(1, k + 1), t) for t in range(1 << k)]


def _pattern_clause(vars_, mask, kind=DISJUNCTIVE) -> Clause:
    lits = [-v if (mask >> i) & 1 else v for i, v in enumerate(vars_)]
    return normalize_clause(lits, kind)


def _ksat_var(a: int, b: int, r: int) -> int:
    # x_{a,b} with a in [k], b in [n/k]
    return (a - 1) * r + b


def gen_ksat_index(inst: IndexInstance, cfg: HardnessConfig) -> list:
    """Alice: ``(x_{1,j1} v ... v x_{k,jk})`` for every ``j`` with ``A_j = 1``
    (``j`` in lexicographic order).  Bob: the ``2^k - 1`` patterns over
    ``{x_{a,i_a}}`` other than the all-positive one.

    The whole set is satisfiable iff ``A_i = 0``.
    """
    cfg.check_ksat()
    k, r = cfg.k, cfg.n // cfg.k
    if inst.t != r**k:
        raise DimensionMismatch(f"expected {r**k} bits, got {inst.t}")
    idx = tuple(inst.index) if isinstance(inst.index, Sequence) else (inst.index,)
    if len(idx) != k or not all(1 <= j <= r for j in idx):
        raise DimensionMismatch(f"index must lie in [1, {r}]^{k}, got {inst.index}")
    out = []
    for flat, j in enumerate(itertools.product(range(1, r + 1), repeat=k)):
        if inst.bits[flat]:
            out.append(normalize_clause([_ksat_var(a, b, r) for a, b in enumerate(j, 1)]))
    S = [_ksat_var(a, b, r) for a, b in enumerate(idx, 1)]
    out.extend(_pattern_clause(S, t) for t in range(1, 1 << k))
    return out


def ksat_flat_index(index, r: int) -> int:
    flat = 0
    for j in index:
        flat = flat * r + (j - 1)
    return flat


def gen_and_system(m: int, T: int, seed=None) -> list:
    """``m`` conjunctions over ``z_1..z_T`` with independent fair-coin signs."""
    if T < 1 or m < 0:
        raise ConfigError("need T >= 1 and m >= 0")
    rng = np.random.default_rng(seed)
    signs = rng.random((m, T)) < 0.5
    return [normalize_clause([-(t + 1) if s else t + 1 for t, s in enumerate(row)], CONJUNCTIVE)
            for row in signs]


def compatible(a: Clause, b: Clause) -> bool:
    """Conjunctions ``a`` and ``b`` can both be true (no opposite literals)."""
    lits = set(a.lits)
    return not any(-k in lits for k in b.lits)


def systems_pairwise_exclusive(clauses) -> bool:
    """True iff no two conjunctions are simultaneously satisfiable."""
    clauses = list(clauses)
    return not any(compatible(a, b) for a, b in itertools.combinations(clauses, 2))


def _shift(c: Clause, by: int) -> tuple:
    return tuple(k + by if k > 0 else k - by for k in c.lits)


def gen_maxand_index(inst: IndexInstance, cfg: HardnessConfig, seed=None) -> list:
    """Alice: ``D_k = (AND_{A_kj=1} x_j) AND (AND_{A_kj=0} ~x_j) AND C_k``.
    Bob: ``D_B = x_{i2} AND C_{i1}``.

    ``A`` is row-major ``m x n``; ``x`` variables are ``1..n`` and the shared
    system ``C_1..C_m`` (from ``gen_and_system(m, T, seed)``) uses
    ``n+1..n+T``.  Uses ``cfg.seed`` when ``seed`` is None.
    """
    m, n, T = cfg.m, cfg.n, cfg.T
    if inst.t != m * n:
        raise DimensionMismatch(f"expected {m * n} bits, got {inst.t}")
    i1, i2 = inst.index
    if not (1 <= i1 <= m and 1 <= i2 <= n):
        raise DimensionMismatch(f"index must lie in [1, {m}] x [1, {n}], got {inst.index}")
    system = gen_and_system(m, T, cfg.seed if seed is None else seed)
    A = inst.bits.reshape(m, n)
    out = []
    for k in range(m):
        xs = [j + 1 if A[k, j] else -(j + 1) for j in range(n)]
        out.append(normalize_clause(xs + list(_shift(system[k], n)), CONJUNCTIVE))
    out.append(normalize_clause([i2] + list(_shift(system[i1 - 1], n)), CONJUNCTIVE))
    return out


def gen_minsat_index(inst: IndexInstance, n: int) -> list:
    """``C_1 = OR_j (x_j if A_j else ~x_j)`` and ``C_2 = (x_i)``.

    Min-SAT optimum is 0 iff ``A_i = 1``.
    """
    if inst.t != n:
        raise DimensionMismatch(f"expected {n} bits, got {inst.t}")
    i = int(inst.index)
    if not 1 <= i <= n:
        raise DimensionMismatch(f"index must lie in [1, {n}], got {i}")
    c1 = normalize_clause([j + 1 if inst.bits[j] else -(j + 1) for j in range(n)])
    return [c1, normalize_clause([i])]


def exact_maxand(clauses, n: Optional[int] = None):
    """Largest number of simultaneously true conjunctions, with a witness.

    Brute force when at most 25 variables occur, otherwise a maximum clique
    of the pairwise compatibility graph (a set of conjunctions is jointly
    satisfiable iff it is pairwise compatible).
    """
    clauses = list(clauses)
    if len(clauses) > MAX_AND_CLAUSES:
        raise InstanceTooLarge(f"{len(clauses)} conjunctions exceed the limit of {MAX_AND_CLAUSES}")
    used = {abs(k) for c in clauses for k in c.lits}
    if n is None:
        n = max(used, default=0)
    if not clauses:
        return np.zeros(n, dtype=bool), 0
    if len(used) <= BRUTE_FORCE_VARS:
        return exact_maxsat(clauses, n, CONJUNCTIVE)
    g = nx.Graph()
    g.add_nodes_from(range(len(clauses)))
    g.add_edges_from((a, b) for a, b in itertools.combinations(range(len(clauses)), 2)
                     if compatible(clauses[a], clauses[b]))
    clique, size = nx.max_weight_clique(g, weight=None)
    a = np.zeros(n, dtype=bool)
    for j in clique:
        for k in clauses[j].lits:
            if k > 0:
                a[k - 1] = True
    return a, int(size)


# --------------------------------------------------------------------------
# random instances and ground truth


def random_ksat_instance(cfg: HardnessConfig, rng=None) -> IndexInstance:
    rng = np.random.default_rng(rng)
    r = cfg.n // cfg.k
    bits = rng.random(r**cfg.k) < 0.5
    index = tuple(int(j) for j in rng.integers(1, r + 1, size=cfg.k))
    return IndexInstance(bits, index)


def random_maxand_instance(cfg: HardnessConfig, rng=None) -> IndexInstance:
    rng = np.random.default_rng(rng)
    bits = rng.random(cfg.m * cfg.n) < 0.5
    return IndexInstance(bits, (int(rng.integers(1, cfg.m + 1)), int(rng.integers(1, cfg.n + 1))))


def random_minsat_instance(n: int, rng=None) -> IndexInstance:
    rng = np.random.default_rng(rng)
    return IndexInstance(rng.random(n) < 0.5, int(rng.integers(1, n + 1)))


def ground_truth(family: str, inst: Optional[IndexInstance], cfg: HardnessConfig, m: int = 0) -> dict:
    """Planted answer for a generated instance.

    ``expected_opt`` is the Max-SAT optimum for ``ksat``/``sk``, the Max-AND
    optimum for ``maxand`` and the Min-SAT optimum for ``minsat``.
    """
    if family == "sk":
        return {"ground_truth": None, "expected_opt": (1 << cfg.k) - 1, "satisfiable": False}
    if family == "ksat":
        bit = bool(inst.bits[ksat_flat_index(inst.index, cfg.n // cfg.k)])
        return {"ground_truth": int(bit), "expected_opt": m - int(bit), "satisfiable": not bit}
    if family == "maxand":
        i1, i2 = inst.index
        bit = bool(inst.bits[(i1 - 1) * cfg.n + (i2 - 1)])
        return {"ground_truth": int(bit), "expected_opt": 1 + int(bit)}
    if family == "minsat":
        bit = bool(inst.bits[int(inst.index) - 1])
        return {"ground_truth": int(bit), "expected_opt": 0 if bit else 1}
    raise ConfigError(f"unknown family {family!r}")


def sidecar(family: str, inst: Optional[IndexInstance], cfg: HardnessConfig, m: int = 0) -> str:
    info = {"family": family, **ground_truth(family, inst, cfg, m)}
    if inst is not None:
        info["index"] = list(inst.index) if isinstance(inst.index, tuple) else inst.index
    info["config"] = {"n": cfg.n, "k": cfg.k, "m": cfg.m, "T": cfg.T, "seed": cfg.seed}
    return json.dumps(info, sort_keys=True)
