"""Sampling and sketching primitives.

* :class:`Reservoir` -- one-pass uniform sampling without replacement.
* :class:`L0Sampler` -- turnstile L0 samplers over an integer universe, one
  or many independent copies updated together.
* :class:`F0Sketch` -- mergeable bottom-k distinct-count sketch.

Sketches serialize to a framed blob: 4-byte magic, version byte, then a
fixed little-endian header and the raw payload arrays.
"""
from __future__ import annotations

import math
import struct
from typing import Iterable, Optional

import numpy as np

from .exceptions import IndexOutOfRange, SatStreamError, SeedMismatch

MERSENNE_61 = (1 << 61) - 1
_U64 = np.uint64
_LO31 = (1 << 31) - 1
_VERSION = 1


def mix64(x) -> np.ndarray:
    """splitmix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(x, dtype=_U64) + _U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def seeded_hash(x, keys) -> np.ndarray:
    """Hash each element of ``x`` under each key; result shape ``keys.shape + x.shape``."""
    base = mix64(np.asarray(x, dtype=_U64))
    keys = np.asarray(keys, dtype=_U64)
    return mix64(base[(None,) * keys.ndim] ^ keys[(...,) + (None,) * base.ndim])


def _keys(seed, count) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, np.iinfo(np.uint64).max, size=count, dtype=np.uint64, endpoint=True)


def seed_from(random_state) -> int:
    """An integer seed from an int, ``None`` or a numpy ``Generator``."""
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    return int(np.random.default_rng(random_state).integers(2**62))


def _trailing_zeros(h: np.ndarray, cap: int) -> np.ndarray:
    low = h & (~h + _U64(1))
    tz = np.full(h.shape, cap, dtype=np.int64)
    nz = low != 0
    # low is an exact power of two, so log2 in float64 is exact
    tz[nz] = np.log2(low[nz].astype(np.float64)).astype(np.int64)
    return np.minimum(tz, cap)


# --------------------------------------------------------------------------
# reservoir


class Reservoir:
    """Algorithm R: after ``t`` offers every item is retained with
    probability ``min(1, capacity / t)`` and all retained subsets of a given
    size are equally likely."""

    def __init__(self, capacity: int, random_state=None):
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        self.capacity = capacity
        self.items = []
        self.seen = 0
        self._rng = np.random.default_rng(random_state)

    def update(self, item):
        """Offer one item. Returns ``(accepted, evicted)``."""
        self.seen += 1
        if len(self.items) < self.capacity:
            self.items.append(item)
            return True, None
        if self.capacity == 0:
            return False, None
        j = int(self._rng.integers(self.seen))
        if j < self.capacity:
            old = self.items[j]
            self.items[j] = item
            return True, old
        return False, None

    def extend(self, items: Iterable):
        for it in items:
            self.update(it)
        return self

    def __len__(self):
        return len(self.items)


def reservoir_update(st: Reservoir, item) -> Reservoir:
    st.update(item)
    return st


# --------------------------------------------------------------------------
# L0 sampling


class L0Sampler:
    """``copies`` independent L0 samplers over ``range(universe)``.

    Each copy holds ``reps = ceil(log2(1/delta))`` repetitions; a repetition
    hashes every index to a geometric level (trailing zeros of a seeded 64-bit
    hash, capped at ``L = ceil(log2 universe)``) and keeps one 1-sparse
    recovery cell per level: signed count, sum of indices and sum of squared
    indices mod 2^61-1.  Cells store exact-level contributions; the nested
    level-``l`` view is the suffix sum over levels ``>= l``, which is linear
    so order of updates does not matter.

    Extraction returns the unique index of the deepest non-empty level of the
    first repetition where that level passes the 1-sparse test.  The squared
    fingerprint makes the test exact on non-negative vectors, which is what
    a duplicate-free insert/delete stream produces.
    """

    def __init__(self, universe: int, copies: int = 1, delta: float = 1e-3, random_state=None):
        if universe < 1:
            raise ValueError("universe must be positive")
        if universe > MERSENNE_61:
            raise ValueError("universe must not exceed 2^61 - 1")
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.universe = int(universe)
        self.copies = int(copies)
        self.delta = float(delta)
        self.reps = max(1, math.ceil(math.log2(1.0 / delta)))
        self.levels = max(1, math.ceil(math.log2(universe))) + 1
        self.seed = seed_from(random_state)
        self.keys = _keys(self.seed, (self.copies, self.reps))
        shape = (self.copies, self.reps, self.levels)
        self.count = np.zeros(shape, dtype=np.int64)
        # index sums and squared-index fingerprints, split into 31-bit digits
        self.s1 = np.zeros((2,) + shape, dtype=np.int64)
        self.s2 = np.zeros((2,) + shape, dtype=np.int64)

    @property
    def words(self) -> int:
        """Logical words: three per cell plus one hash key per repetition."""
        return self.copies * self.reps * (3 * self.levels + 1)

    def update(self, idx: int, delta: int = 1):
        return self.update_many([idx], [delta])

    def update_many(self, idx, deltas):
        idx = np.asarray(idx, dtype=np.int64).ravel()
        deltas = np.broadcast_to(np.asarray(deltas, dtype=np.int64), idx.shape)
        if idx.size == 0:
            return self
        if idx.min() < 0 or idx.max() >= self.universe:
            raise IndexOutOfRange(f"index outside [0, {self.universe})")
        sq = np.array([(int(v) * int(v)) % MERSENNE_61 for v in idx], dtype=np.int64)
        lev = _trailing_zeros(seeded_hash(idx, self.keys), self.levels - 1)  # (copies, reps, b)
        cr = np.arange(self.copies * self.reps, dtype=np.int64).reshape(self.copies, self.reps, 1)
        flat = (cr * self.levels + lev).ravel()
        tile = self.copies * self.reps
        w = np.tile(deltas, tile)
        np.add.at(self.count.reshape(-1), flat, w)
        for arr, val in ((self.s1, idx), (self.s2, sq)):
            np.add.at(arr[0].reshape(-1), flat, np.tile(val >> 31, tile) * w)
            np.add.at(arr[1].reshape(-1), flat, np.tile(val & _LO31, tile) * w)
        return self

    def _recover(self, c: int, r: int) -> Optional[int]:
        # only the deepest non-empty level is tested: on non-negative input
        # shallower levels hold supersets, so they cannot be 1-sparse either
        nz = np.nonzero(self.count[c, r, ::-1].cumsum())[0]
        if nz.size == 0:
            return None
        lev = self.levels - 1 - int(nz[0])
        k = int(self.count[c, r, lev:].sum())
        s1 = (int(self.s1[0, c, r, lev:].sum()) << 31) + int(self.s1[1, c, r, lev:].sum())
        if s1 % k:
            return None
        idx = s1 // k
        if not 0 <= idx < self.universe:
            return None
        s2 = ((int(self.s2[0, c, r, lev:].sum()) << 31) + int(self.s2[1, c, r, lev:].sum())) % MERSENNE_61
        return idx if s2 == (k * idx * idx) % MERSENNE_61 else None

    def extract(self, copy: int = 0) -> Optional[int]:
        """An index from the support of ``copy``, or ``None`` on empty support or failure."""
        for r in range(self.reps):
            got = self._recover(copy, r)
            if got is not None:
                return got
        return None

    def extract_all(self) -> list:
        return [self.extract(c) for c in range(self.copies)]

    def total(self, copy: int = 0) -> int:
        """Signed total weight of the vector (the levels partition the universe)."""
        return int(self.count[copy, 0].sum())

    def harvest(self) -> list:
        """Every index recoverable from any cell of any copy, sorted.

        Exact-level cells and nested suffix views are both tried.  A cell of
        weight one on a non-negative vector holds exactly one index; the
        squared fingerprint guards against signed cancellation.  When the
        support is small almost every element sits alone in some cell, so
        this recovers the whole support.
        """
        def suffix(a):
            return a[..., ::-1].cumsum(axis=-1)[..., ::-1]

        cand = set()
        for cnt, s1, s2 in ((self.count, self.s1, self.s2),
                            (suffix(self.count), suffix(self.s1), suffix(self.s2))):
            mask = cnt == 1
            if not mask.any():
                continue
            idx = (s1[0][mask] << 31) + s1[1][mask]
            fp = np.stack([s2[0][mask], s2[1][mask]], axis=1)
            pairs = np.unique(np.column_stack([idx, fp]), axis=0)
            for i, h, lo in pairs.tolist():
                if 0 <= i < self.universe and ((h << 31) + lo) % MERSENNE_61 == (i * i) % MERSENNE_61:
                    cand.add(i)
        return sorted(cand)

    # serialization
    _MAGIC = b"L0SK"

    def to_bytes(self) -> bytes:
        head = struct.pack("<4sBQIIIqd", self._MAGIC, _VERSION, self.universe, self.copies,
                           self.reps, self.levels, self.seed, self.delta)
        return head + self.count.tobytes() + self.s1.tobytes() + self.s2.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "L0Sampler":
        fmt = "<4sBQIIIqd"
        size = struct.calcsize(fmt)
        magic, ver, universe, copies, reps, levels, seed, delta = struct.unpack(fmt, blob[:size])
        if magic != cls._MAGIC or ver != _VERSION:
            raise SatStreamError("not an L0 sampler blob")
        st = cls(universe, copies, delta, seed)
        if (st.reps, st.levels) != (reps, levels):
            raise SatStreamError("inconsistent L0 blob header")
        n_cells = copies * reps * levels
        if len(blob) - size != 5 * n_cells * 8:
            raise SatStreamError("truncated L0 blob")
        body = np.frombuffer(blob[size:], dtype=np.int64)
        st.count = body[:n_cells].reshape(st.count.shape).copy()
        st.s1 = body[n_cells:3 * n_cells].reshape(st.s1.shape).copy()
        st.s2 = body[3 * n_cells:].reshape(st.s2.shape).copy()
        return st


def l0_update(st: L0Sampler, idx: int, delta: int) -> L0Sampler:
    return st.update(idx, delta)


def l0_extract(st: L0Sampler, copy: int = 0) -> Optional[int]:
    return st.extract(copy)


def l0_sample_set(updates: Iterable, universe: int, s: int, delta: float = 1e-3,
                  random_state=None, batch: int = 512):
    """Run ``s`` independent L0 samplers over a turnstile stream of
    ``(index, +-1)`` pairs and return distinct indices from the final support.

    If the final total weight is at most ``s`` and harvesting the cells
    recovers that many indices, the whole support is returned (no sampling
    is needed).  Otherwise each sampler contributes one uniform extraction
    and duplicates are dropped.

    Returns ``(indices, sampler)``; ``len(indices)`` is the achieved sample size.
    """
    st = L0Sampler(universe, copies=s, delta=delta, random_state=random_state)
    buf_i, buf_d = [], []
    for i, d in updates:
        buf_i.append(i)
        buf_d.append(d)
        if len(buf_i) >= batch:
            st.update_many(buf_i, buf_d)
            buf_i, buf_d = [], []
    st.update_many(buf_i, buf_d)
    return l0_final_sample(st), st


def l0_final_sample(st: L0Sampler) -> list:
    total = st.total()
    if total <= 0:
        return []
    if total <= st.copies:
        got = st.harvest()
        if len(got) == total:
            return got
    seen = []
    got = set()
    for idx in st.extract_all():
        if idx is not None and idx not in got:
            got.add(idx)
            seen.append(idx)
    return seen


# --------------------------------------------------------------------------
# F0 sketch

_H_RANGE = float(2**64)


def f0_size(eps: float, delta: float) -> int:
    """Retention size giving relative error ``eps`` w.p. ``1 - delta`` (Chernoff bound)."""
    return max(1, math.ceil(3.0 * math.log(2.0 / delta) / eps**2))


class F0Sketch:
    """Bottom-k sketch: keeps the ``k`` smallest distinct 64-bit hash values.

    Below ``k`` distinct items the count is exact (barring 64-bit collisions);
    otherwise the estimate is ``k * 2^64 / h_k`` with ``h_k`` the k-th
    smallest retained hash.
    """

    _MAGIC = b"F0SK"

    def __init__(self, k: int, seed: int = 0, delta: float = 1e-3):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = int(k)
        self.seed = int(seed)
        self.delta = float(delta)
        self._key = _keys(self.seed, 1)
        self.min_hashes = np.empty(0, dtype=_U64)

    @classmethod
    def for_accuracy(cls, eps: float, delta: float = 1e-3, seed: int = 0) -> "F0Sketch":
        return cls(f0_size(eps, delta), seed, delta)

    def hash(self, elements) -> np.ndarray:
        return seeded_hash(np.asarray(elements, dtype=np.int64).astype(_U64), self._key)[0]

    def update(self, element: int) -> "F0Sketch":
        return self.update_many([element])

    def update_many(self, elements) -> "F0Sketch":
        h = self.hash(np.atleast_1d(elements))
        self.min_hashes = np.union1d(self.min_hashes, h)[: self.k]
        return self

    def compatible(self, other: "F0Sketch") -> bool:
        return self.k == other.k and self.seed == other.seed

    def merge(self, other: "F0Sketch") -> "F0Sketch":
        if not self.compatible(other):
            raise SeedMismatch("cannot merge sketches with different seed or k")
        out = F0Sketch(self.k, self.seed, self.delta)
        out.min_hashes = np.union1d(self.min_hashes, other.min_hashes)[: self.k]
        return out

    def estimate(self) -> float:
        return bottom_k_estimate(self.min_hashes, self.k)

    def __len__(self):
        return len(self.min_hashes)

    def to_bytes(self) -> bytes:
        head = struct.pack("<4sBIqdI", self._MAGIC, _VERSION, self.k, self.seed, self.delta,
                           len(self.min_hashes))
        return head + self.min_hashes.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "F0Sketch":
        fmt = "<4sBIqdI"
        size = struct.calcsize(fmt)
        magic, ver, k, seed, delta, count = struct.unpack(fmt, blob[:size])
        if magic != cls._MAGIC or ver != _VERSION:
            raise SatStreamError("not an F0 sketch blob")
        if len(blob) - size != 8 * count:
            raise SatStreamError("truncated F0 blob")
        payload = np.frombuffer(blob[size:], dtype="<u8")
        sk = cls(k, seed, delta)
        sk.min_hashes = payload.astype(_U64)
        return sk


def bottom_k_estimate(min_hashes: np.ndarray, k: int) -> float:
    if len(min_hashes) < k:
        return float(len(min_hashes))
    return k * _H_RANGE / (float(min_hashes[k - 1]) + 1.0)


def f0_merge_many(sketches) -> F0Sketch:
    sketches = list(sketches)
    first = sketches[0]
    for sk in sketches[1:]:
        if not first.compatible(sk):
            raise SeedMismatch("cannot merge sketches with different seed or k")
    out = F0Sketch(first.k, first.seed, first.delta)
    out.min_hashes = np.unique(np.concatenate([sk.min_hashes for sk in sketches]))[: first.k]
    return out


def f0_update(sk: F0Sketch, element) -> F0Sketch:
    return sk.update(element)


def f0_merge(a: F0Sketch, b: F0Sketch) -> F0Sketch:
    return a.merge(b)


def f0_estimate(sk: F0Sketch) -> float:
    return sk.estimate()
