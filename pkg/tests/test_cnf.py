import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satstream.cnf import (
    CONJUNCTIVE,
    DELETE,
    INSERT,
    Clause,
    ClauseStream,
    Literal,
    Parameters,
    StreamEvent,
    clause_decode,
    clause_index,
    normalize_clause,
    parse_event,
    read_stream,
    render_event,
    universe_size,
)
from satstream.exceptions import (
    ClauseTooLarge,
    ConfigError,
    ContradictoryConjunction,
    DuplicateInsert,
    EmptyClause,
    IndexOutOfRange,
    ParseError,
    VarOutOfRange,
)

nonzero_lits = st.integers(-6, 6).filter(bool)


# normalization

def test_tautology_dropped():
    assert normalize_clause([1, -1, 2]) is None


def test_duplicates_removed_and_sorted():
    assert normalize_clause([2, 1, 1]).lits == (1, 2)


def test_contradictory_conjunction():
    with pytest.raises(ContradictoryConjunction):
        normalize_clause([1, -1], CONJUNCTIVE)


def test_empty_clause():
    with pytest.raises(EmptyClause):
        normalize_clause([])


def test_var_out_of_range():
    with pytest.raises(VarOutOfRange):
        normalize_clause([1, 4], n=3)


def test_literal_order_var_then_sign():
    assert normalize_clause([-2, 3, 1]).lits == (1, -2, 3)
    lits = normalize_clause([-1, -3, 2]).literals
    assert lits == (Literal(1, True), Literal(2, False), Literal(3, True))


def test_literal_objects_accepted():
    c = normalize_clause([Literal(2, True), Literal(1, False)])
    assert c.lits == (1, -2)
    assert Literal.from_int(-4).to_int() == -4


def test_clause_satisfaction():
    c = Clause.of(1, -2)
    assert c.is_satisfied_by([False, False])
    assert not c.is_satisfied_by([False, True])
    d = Clause.of(1, -2, kind=CONJUNCTIVE)
    assert d.is_satisfied_by([True, False])
    assert not d.is_satisfied_by([True, True])


@given(st.lists(nonzero_lits, min_size=1, max_size=8))
def test_normalization_idempotent(raw):
    c = normalize_clause(raw)
    if c is None:
        assert any(-k in raw for k in raw)
        return
    assert normalize_clause(c.lits) == c
    assert len({abs(k) for k in c.lits}) == len(c)


# parsing

def test_parse_insert():
    ev = parse_event("+ 1 -2 0")
    assert ev == StreamEvent(INSERT, Clause((1, -2)))


def test_parse_delete():
    ev = parse_event("- 3 0", dynamic=True)
    assert ev.op == DELETE and ev.clause.lits == (3,)


def test_parse_tokens_after_terminator():
    with pytest.raises(ParseError):
        parse_event("+ 1 0 2")


@pytest.mark.parametrize("line", ["1 2 0", "+ 1 2", "+ a 0", "+ 0", "* 1 0"])
def test_parse_errors(line):
    with pytest.raises(ParseError):
        parse_event(line)


def test_delete_in_static_stream_rejected():
    with pytest.raises(ParseError):
        parse_event("- 1 0", dynamic=False)


def test_parse_var_out_of_range():
    with pytest.raises(VarOutOfRange):
        parse_event("+ 1 5 0", n=4)


def test_parse_error_carries_line_number():
    with pytest.raises(ParseError) as info:
        read_stream("p stream 3 2 static\n+ 1 0\n+ 1 x 0\n")
    assert info.value.lineno == 3


@given(st.sampled_from([INSERT, DELETE]), st.lists(nonzero_lits, min_size=1, max_size=6))
def test_parser_round_trip(op, lits):
    line = " ".join([op, *map(str, lits), "0"])
    ev = parse_event(line)
    if ev is None:
        return
    canon = render_event(ev)
    assert render_event(parse_event(canon)) == canon
    assert canon == " ".join([op, *map(str, ev.clause.lits), "0"])


# stream files

STREAM_TEXT = """c example
p stream 3 4 dynamic
+ 1 -2 0
+ 2 3 0
+ 1 -1 0
- 1 -2 0
"""


def test_read_stream_counts_tautologies():
    s = read_stream(STREAM_TEXT)
    assert (s.n, s.m, s.dynamic) == (3, 4, True)
    assert s.tautologies == 1
    assert len(s) == 3
    assert [c.lits for c in s.final_clauses()] == [(2, 3)]


def test_write_and_read_back(tmp_path):
    s = read_stream(STREAM_TEXT)
    path = tmp_path / "s.cnfs"
    s.write(path)
    back = read_stream(str(path))
    assert back.events == s.events and back.header == s.header


def test_header_errors():
    with pytest.raises(ParseError):
        read_stream("+ 1 0\n")
    with pytest.raises(ParseError):
        read_stream("p stream 3 static\n")
    with pytest.raises(ParseError):
        read_stream("p stream 3 1 static\np stream 3 1 static\n")


def test_andstream_header():
    s = read_stream("p andstream 2 1\n+ 1 -2 0\n")
    assert s.kind == CONJUNCTIVE
    assert s.header.render() == "p andstream 2 1"


def test_strict_duplicates_in_dynamic_mode():
    with pytest.raises(DuplicateInsert):
        read_stream("p stream 2 2 dynamic\n+ 1 0\n+ 1 0\n", strict=True)
    with pytest.raises(DuplicateInsert):
        read_stream("p stream 2 2 dynamic\n- 1 0\n", strict=True)
    # permissive mode keeps both
    assert len(read_stream("p stream 2 2 dynamic\n+ 1 0\n+ 1 0\n")) == 2


def test_static_duplicates_are_distinct_items():
    s = read_stream("p stream 2 2 static\n+ 1 0\n+ 1 0\n", strict=True)
    assert len(s.final_clauses()) == 2


def test_from_clauses():
    s = ClauseStream.from_clauses([[1, 2], [1, -1], [-3]])
    assert s.n == 3 and s.tautologies == 1 and not s.dynamic
    assert s.render().splitlines()[0] == "p stream 3 2 static"


@pytest.mark.parametrize("kw", [dict(n=0, m=1), dict(n=1, m=0), dict(n=1, m=1, eps=0.25),
                                dict(n=1, m=1, eps=0), dict(n=1, m=1, K=0)])
def test_parameters_validation(kw):
    with pytest.raises(ConfigError):
        Parameters(**kw)


# encoding

def _all_clauses(n, beta):
    lits = [k for v in range(1, n + 1) for k in (v, -v)]
    for size in range(1, beta + 1):
        for combo in itertools.combinations(lits, size):
            c = normalize_clause(combo)
            if c is not None and len(c) == size:
                yield c


def test_index_n1_beta1():
    assert clause_index(Clause((1,)), 1, 1) == 0
    assert clause_index(Clause((-1,)), 1, 1) == 1
    assert clause_decode(0, 1, 1).lits == (1,)


def test_universe_n2_beta2_bijection():
    assert universe_size(2, 2) == math.comb(4, 1) + math.comb(4, 2) == 10
    idx = {clause_index(c, 2, 2) for c in _all_clauses(2, 2)}
    assert idx <= set(range(10))
    assert len(idx) == len(list(_all_clauses(2, 2)))


def test_clause_too_large():
    with pytest.raises(ClauseTooLarge):
        clause_index(Clause((1, 2, 3)), 3, 2)


def test_decode_out_of_range():
    N = universe_size(3, 2)
    with pytest.raises(IndexOutOfRange):
        clause_decode(N, 3, 2)
    with pytest.raises(IndexOutOfRange):
        clause_decode(-1, 3, 2)


@pytest.mark.parametrize("n,beta", [(n, b) for n in range(1, 4) for b in range(1, 4)])
def test_encoding_bijective_exhaustive(n, beta):
    seen = set()
    for c in _all_clauses(n, beta):
        i = clause_index(c, n, beta)
        assert 0 <= i < universe_size(n, beta)
        assert clause_decode(i, n, beta) == c
        seen.add(i)
    assert len(seen) == len(list(_all_clauses(n, beta)))


def test_size_first_rank_order():
    # all single literals come before any pair
    singles = [clause_index(Clause((k,)), 3, 2) for k in (1, -1, 2, -2, 3, -3)]
    assert singles == list(range(6))
    assert clause_index(Clause((1, -1 * 2)), 3, 2) >= 6


def test_random_round_trip_n10_beta4():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        k = int(rng.integers(1, 5))
        vs = rng.choice(10, size=k, replace=False) + 1
        c = normalize_clause([int(v) if rng.random() < 0.5 else -int(v) for v in vs])
        assert clause_decode(clause_index(c, 10, 4), 10, 4) == c


@given(st.lists(st.tuples(st.integers(1, 12), st.booleans()), min_size=1, max_size=5,
                unique_by=lambda t: t[0]))
def test_encoding_round_trip_property(pairs):
    c = normalize_clause([-v if neg else v for v, neg in pairs])
    assert clause_decode(clause_index(c, 12, 5), 12, 5) == c
