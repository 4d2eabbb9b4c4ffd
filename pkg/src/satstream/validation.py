"""Input checking shared by the estimators and the CLI."""
from __future__ import annotations

import math
import numbers
import os

from .cnf import (
    INSERT,
    Clause,
    ClauseStream,
    StreamEvent,
    StreamHeader,
    check_no_duplicate,
    normalize_clause,
    read_stream,
)
from .exceptions import ConfigError, VarOutOfRange


def check_stream(X, n=None, kind=None, strict: bool = False) -> ClauseStream:
    """Coerce ``X`` to a :class:`ClauseStream`.

    ``X`` may be a stream, a path, stream text, or a sequence of clauses,
    events or integer literal lists.  ``n`` overrides (and is checked
    against) the variable count.
    """
    if isinstance(X, ClauseStream):
        stream = X
    elif isinstance(X, (str, os.PathLike)):
        stream = read_stream(X, strict=strict)
    else:
        items = list(X)
        if items and all(isinstance(e, StreamEvent) for e in items):
            top = max(max(e.clause.vars) for e in items)
            dynamic = any(e.op != INSERT for e in items)
            header = StreamHeader(max(n or top, 1), len(items), dynamic,
                                  kind or items[0].clause.kind)
            stream = ClauseStream(header, items)
            if strict and dynamic:
                live = set()
                for ev in items:
                    check_no_duplicate(live, ev)
        else:
            stream = ClauseStream.from_clauses(items, n=n, kind=kind)
    if n is not None and n != stream.n:
        top = max((max(ev.clause.vars) for ev in stream.events), default=0)
        if top > n:
            raise VarOutOfRange(f"variable {top} outside [1, {n}]")
        stream.header.n = n
    return stream


def check_clauses(clauses, kind=None) -> list:
    """Normalize a clause collection, dropping tautologies.

    Streams and stream files contribute their live clauses.
    """
    if isinstance(clauses, (ClauseStream, str, os.PathLike)):
        return check_stream(clauses).final_clauses()
    out = []
    for c in clauses:
        if not isinstance(c, Clause):
            c = normalize_clause(c, kind or "or")
            if c is None:
                continue
        out.append(c)
    return out


def check_eps(eps) -> float:
    if not isinstance(eps, numbers.Real) or not 0 < eps < 0.25:
        raise ConfigError(f"eps must lie in (0, 1/4), got {eps!r}")
    return float(eps)


def check_positive(name, value, integer=False):
    ok = isinstance(value, numbers.Real) and math.isfinite(value) and value > 0
    if integer:
        ok = ok and float(value).is_integer()
    if not ok:
        raise ConfigError(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}")
    return int(value) if integer else float(value)


def check_delta(delta) -> float:
    if not isinstance(delta, numbers.Real) or not 0 < delta < 1:
        raise ConfigError(f"delta must lie in (0, 1), got {delta!r}")
    return float(delta)
