"""Clause and stream data model.

Literals are kept in DIMACS form internally (``k > 0`` is ``x_k``, ``k < 0``
is ``not x_k``).  A :class:`Clause` is always normalized: distinct variables,
sorted by ``(var, negated)``.

Stream files look like::

    c optional comments
    p stream <n> <m> <static|dynamic>
    + 1 -2 0
    - 1 -2 0

Conjunctive (Max-AND) streams use the header ``p andstream <n> <m>``.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from .exceptions import (
    ClauseTooLarge,
    ConfigError,
    ContradictoryConjunction,
    DuplicateInsert,
    EmptyClause,
    IndexOutOfRange,
    ParseError,
    SatStreamError,
    VarOutOfRange,
)

DISJUNCTIVE = "or"
CONJUNCTIVE = "and"
INSERT = "+"
DELETE = "-"


class Literal(NamedTuple):
    var: int
    negated: bool = False

    @classmethod
    def from_int(cls, k: int) -> "Literal":
        if k == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(k), k < 0)

    def to_int(self) -> int:
        return -self.var if self.negated else self.var


def _lit_key(k: int):
    return (abs(k), k < 0)


@dataclass(frozen=True)
class Clause:
    """A normalized clause. Build through :func:`normalize_clause` or
    :meth:`Clause.of`; the constructor trusts its input."""

    lits: tuple
    kind: str = DISJUNCTIVE

    @classmethod
    def of(cls, *lits, kind=DISJUNCTIVE) -> "Clause":
        c = normalize_clause(lits, kind)
        if c is None:
            raise SatStreamError(f"clause {lits} is trivially true")
        return c

    @property
    def literals(self) -> tuple:
        return tuple(Literal.from_int(k) for k in self.lits)

    @property
    def vars(self) -> tuple:
        return tuple(abs(k) for k in self.lits)

    def __len__(self):
        return len(self.lits)

    def __iter__(self):
        return iter(self.lits)

    def __str__(self):
        joiner = " & " if self.kind == CONJUNCTIVE else " | "
        return "(" + joiner.join(("~x%d" % -k) if k < 0 else ("x%d" % k) for k in self.lits) + ")"

    def is_satisfied_by(self, assignment) -> bool:
        vals = [bool(assignment[abs(k) - 1]) == (k > 0) for k in self.lits]
        return all(vals) if self.kind == CONJUNCTIVE else any(vals)


def normalize_clause(raw: Iterable, kind: str = DISJUNCTIVE, n: Optional[int] = None) -> Optional[Clause]:
    """Normalize a raw literal sequence.

    Returns ``None`` for a trivially-true disjunction (contains ``x`` and
    ``~x``).  Duplicate literals are removed.

    Raises:
        EmptyClause: no literals.
        ContradictoryConjunction: a conjunction containing ``x`` and ``~x``.
        VarOutOfRange: a variable outside ``[1, n]`` when ``n`` is given.
    """
    lits = set()
    for item in raw:
        k = item.to_int() if isinstance(item, Literal) else int(item)
        if k == 0:
            raise VarOutOfRange("literal 0 is not allowed")
        if n is not None and abs(k) > n:
            raise VarOutOfRange(f"variable {abs(k)} outside [1, {n}]")
        lits.add(k)
    if not lits:
        raise EmptyClause("empty clause")
    if kind not in (DISJUNCTIVE, CONJUNCTIVE):
        raise ValueError(f"unknown clause kind {kind!r}")
    if any(-k in lits for k in lits):
        if kind == CONJUNCTIVE:
            raise ContradictoryConjunction(f"conjunction {sorted(lits, key=_lit_key)} contains x and ~x")
        return None
    return Clause(tuple(sorted(lits, key=_lit_key)), kind)


@dataclass(frozen=True)
class StreamEvent:
    op: str
    clause: Clause

    @property
    def delta(self) -> int:
        return 1 if self.op == INSERT else -1


@dataclass(frozen=True)
class Parameters:
    """Instance-level parameters shared by the streaming algorithms.

    ``eps`` must lie strictly inside ``(0, 1/4)``.
    """

    n: int
    m: int
    eps: float = 0.15
    K: float = 4.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if not 0 < self.eps < 0.25:
            raise ConfigError(f"eps must lie in (0, 1/4), got {self.eps}")
        if not self.K > 0:
            raise ConfigError(f"K must be positive, got {self.K}")


# --------------------------------------------------------------------------
# stream files


@dataclass
class StreamHeader:
    n: int
    m: int
    dynamic: bool = False
    kind: str = DISJUNCTIVE

    def render(self) -> str:
        if self.kind == CONJUNCTIVE:
            return f"p andstream {self.n} {self.m}"
        return f"p stream {self.n} {self.m} {'dynamic' if self.dynamic else 'static'}"


@dataclass
class ClauseStream:
    """An in-memory stream: header plus events.

    ``tautologies`` counts trivially-true clauses dropped while parsing.
    """

    header: StreamHeader
    events: list = field(default_factory=list)
    tautologies: int = 0

    @property
    def n(self) -> int:
        return self.header.n

    @property
    def m(self) -> int:
        return self.header.m

    @property
    def dynamic(self) -> bool:
        return self.header.dynamic

    @property
    def kind(self) -> str:
        return self.header.kind

    def __iter__(self) -> Iterator[StreamEvent]:
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def final_clauses(self) -> list:
        """Multiset of live clauses after replaying inserts and deletes."""
        live = {}
        order = []
        for ev in self.events:
            if ev.op == INSERT:
                if ev.clause not in live:
                    order.append(ev.clause)
                live[ev.clause] = live.get(ev.clause, 0) + 1
            else:
                live[ev.clause] = live.get(ev.clause, 0) - 1
        out = []
        for c in order:
            out.extend([c] * max(live.get(c, 0), 0))
            live[c] = 0
        return out

    def render(self) -> str:
        lines = [self.header.render()]
        lines.extend(render_event(ev) for ev in self.events)
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.render())

    @classmethod
    def from_clauses(cls, clauses: Sequence, n: Optional[int] = None, m: Optional[int] = None,
                     kind: Optional[str] = None) -> "ClauseStream":
        """Wrap plain clauses (Clause objects or int sequences) as an insert-only stream."""
        cls_list = []
        taut = 0
        for c in clauses:
            if not isinstance(c, Clause):
                c = normalize_clause(c, kind or DISJUNCTIVE)
                if c is None:
                    taut += 1
                    continue
            cls_list.append(c)
        if kind is None:
            kind = cls_list[0].kind if cls_list else DISJUNCTIVE
        if n is None:
            n = max((max(c.vars) for c in cls_list), default=1)
        header = StreamHeader(n=n, m=max(m or len(cls_list), 1), dynamic=False, kind=kind)
        return cls(header, [StreamEvent(INSERT, c) for c in cls_list], taut)


def parse_header(line: str, lineno: Optional[int] = None) -> StreamHeader:
    toks = line.split()
    try:
        if len(toks) == 5 and toks[:2] == ["p", "stream"] and toks[4] in ("static", "dynamic"):
            return StreamHeader(int(toks[2]), int(toks[3]), toks[4] == "dynamic", DISJUNCTIVE)
        if len(toks) == 4 and toks[:2] == ["p", "andstream"]:
            return StreamHeader(int(toks[2]), int(toks[3]), False, CONJUNCTIVE)
    except ValueError:
        pass
    raise ParseError(f"bad header {line.strip()!r}", lineno)


def parse_event(line: str, n: Optional[int] = None, dynamic: bool = True,
                kind: str = DISJUNCTIVE, lineno: Optional[int] = None) -> Optional[StreamEvent]:
    """Parse one event line such as ``"+ 1 -2 0"``.

    Returns ``None`` when the clause is trivially true.
    """
    toks = line.split()
    if not toks or toks[0] not in (INSERT, DELETE):
        raise ParseError(f"event must start with '+' or '-': {line.strip()!r}", lineno)
    op = toks[0]
    if op == DELETE and not dynamic:
        raise ParseError("delete event in a static stream", lineno)
    try:
        nums = [int(t) for t in toks[1:]]
    except ValueError:
        raise ParseError(f"non-integer literal in {line.strip()!r}", lineno) from None
    if not nums or nums[-1] != 0:
        raise ParseError("event must end with terminator 0", lineno)
    if 0 in nums[:-1]:
        raise ParseError("tokens after terminator 0", lineno)
    try:
        clause = normalize_clause(nums[:-1], kind, n)
    except VarOutOfRange as exc:
        raise VarOutOfRange(f"line {lineno}: {exc}" if lineno else str(exc)) from None
    except EmptyClause:
        raise ParseError("empty clause", lineno) from None
    if clause is None:
        return None
    return StreamEvent(op, clause)


def render_event(ev: StreamEvent) -> str:
    return " ".join([ev.op, *map(str, ev.clause.lits), "0"])


def iter_stream(source) -> Iterator:
    """Yield the header first, then events, reading lazily from a path or file.

    Tautologies are skipped; the caller sees ``None`` for each so it can count
    them without holding the stream.
    """
    if isinstance(source, (str, os.PathLike)):
        fh = open(source)
        close = True
    else:
        fh = source
        close = False
    try:
        header = None
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            if header is None:
                if not line.startswith("p"):
                    raise ParseError("missing header", lineno)
                header = parse_header(line, lineno)
                yield header
                continue
            if line.startswith("p"):
                raise ParseError("duplicate header", lineno)
            yield parse_event(line, header.n, header.dynamic, header.kind, lineno)
        if header is None:
            raise ParseError("missing header")
    finally:
        if close:
            fh.close()


def read_stream(source, strict: bool = False) -> ClauseStream:
    """Read a whole stream file into memory.

    With ``strict=True`` and a dynamic stream, inserting a clause that is
    already live (or deleting one that is not) raises :class:`DuplicateInsert`.
    """
    if isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    it = iter_stream(source)
    header = next(it)
    stream = ClauseStream(header)
    live = set()
    for ev in it:
        if ev is None:
            stream.tautologies += 1
            continue
        if strict and header.dynamic:
            check_no_duplicate(live, ev)
        stream.events.append(ev)
    return stream


def check_no_duplicate(live: set, ev: StreamEvent) -> None:
    """Maintain ``live`` and enforce the no-duplicate policy for one event."""
    if ev.op == INSERT:
        if ev.clause in live:
            raise DuplicateInsert(f"clause {ev.clause} inserted while live")
        live.add(ev.clause)
    else:
        if ev.clause not in live:
            raise DuplicateInsert(f"clause {ev.clause} deleted while not live")
        live.discard(ev.clause)


# --------------------------------------------------------------------------
# clause <-> integer encoding
#
# Signed literals get codes 0..2n-1: x_v -> 2(v-1), ~x_v -> 2(v-1)+1, which
# matches the (var, negated) literal order.  Clauses are ranked by size first,
# then lexicographically by sorted code tuple among all k-subsets of the 2n
# codes (so the universe also contains the tautological subsets).


def universe_size(n: int, beta: int) -> int:
    """Number of literal subsets of size 1..beta over 2n signed literals."""
    return sum(math.comb(2 * n, i) for i in range(1, min(beta, 2 * n) + 1))


def _code(k: int) -> int:
    return 2 * (abs(k) - 1) + (1 if k < 0 else 0)


def _lit(code: int) -> int:
    v = code // 2 + 1
    return -v if code % 2 else v


def subset_rank(codes: Sequence[int], universe: int) -> int:
    """Lexicographic rank of a sorted k-subset of ``range(universe)``."""
    k = len(codes)
    rank = 0
    prev = -1
    for t, c in enumerate(codes):
        for v in range(prev + 1, c):
            rank += math.comb(universe - 1 - v, k - 1 - t)
        prev = c
    return rank


def subset_unrank(rank: int, k: int, universe: int) -> list:
    codes = []
    v = 0
    for t in range(k):
        while True:
            block = math.comb(universe - 1 - v, k - 1 - t)
            if rank < block:
                break
            rank -= block
            v += 1
        codes.append(v)
        v += 1
    return codes


def literal_set_index(lits: Sequence[int], n: int, beta: int) -> int:
    """Rank of an arbitrary set of distinct signed literals (tautologies allowed)."""
    codes = sorted({_code(k) for k in lits})
    k = len(codes)
    if k == 0:
        raise EmptyClause("empty literal set")
    if k > beta:
        raise ClauseTooLarge(f"clause of size {k} exceeds beta={beta}")
    if codes[-1] >= 2 * n:
        raise VarOutOfRange(f"literal outside n={n}")
    offset = sum(math.comb(2 * n, i) for i in range(1, k))
    return offset + subset_rank(codes, 2 * n)


def clause_index(c: Clause, n: int, beta: int) -> int:
    """Injective rank of a normalized clause of size <= beta."""
    return literal_set_index(c.lits, n, beta)


def literal_set_decode(idx: int, n: int, beta: int) -> tuple:
    """Inverse of :func:`literal_set_index`; returns sorted signed literals."""
    total = universe_size(n, beta)
    if not 0 <= idx < total:
        raise IndexOutOfRange(f"index {idx} outside [0, {total})")
    k = 1
    while True:
        block = math.comb(2 * n, k)
        if idx < block:
            break
        idx -= block
        k += 1
    return tuple(_lit(c) for c in subset_unrank(idx, k, 2 * n))


def clause_decode(idx: int, n: int, beta: int, kind: str = DISJUNCTIVE) -> Clause:
    lits = literal_set_decode(idx, n, beta)
    c = normalize_clause(lits, kind)
    if c is None:
        raise IndexOutOfRange(f"index {idx} encodes a tautological literal set")
    return c


AnyStream = Union[ClauseStream, str, os.PathLike, Sequence]
