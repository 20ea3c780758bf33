from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from conftest import X, Y, Z
from twbn.graphs import Dag
from twbn.scores import (LocalScoreFunction, ParentSetEntry, ScoreFileError, build_super_structure,
                         delta_f, format_scores, is_strictly_admissible, normalize, parse_scores,
                         potential_parent_sets, score_dag, strip_to_admissible)

E = frozenset()


def test_parse_i0(i0):
    assert i0.names == ("x", "y", "z")
    assert delta_f(i0) == 2
    assert i0.score(X, {Y}) == 4.0
    assert i0.score(Z, {X}) == 0.0


def test_parse_single_empty_variable():
    f = parse_scores("1\nx 1\n0.0 0\n")
    assert f.n == 1
    assert potential_parent_sets(f, 0) == (E,)


def test_parse_empty_instance():
    f = parse_scores("0\n")
    assert f.n == 0 and delta_f(f) == 1


@pytest.mark.parametrize("text, line", [
    ("1\nx 1\n-1.0 0\n", 3),
    ("2\nx 1\n1.0 1 q\ny 0\n", 3),
    ("x\n", 1),
    ("1\nx one\n", 2),
    ("1\nx 1\n1.0 2 y\n", 3),
    ("2\nx 2\n1.0 1 y\n2.0 1 y\ny 0\n", 4),
    ("1\nx 1\n1.0 1 x\n", 3),
    ("1\nx 0\ny 0\n", 3),
    ("2\nx 0\n", 2),
    ("1\nx 1\nnan 0\n", 3),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ScoreFileError) as info:
        parse_scores(text)
    assert info.value.lineno == line


def test_comments_and_blank_lines():
    f = parse_scores("# header\n1\n\nx 1   # var\n2.5 0\n")
    assert f.score(0, ()) == 2.5


def test_potential_parent_sets(i0):
    assert potential_parent_sets(i0, X) == (E, frozenset({Y}))
    f = LocalScoreFunction(["v", "q"], [[], []])
    assert potential_parent_sets(f, 0) == (E,)
    f = LocalScoreFunction(["v", "q", "r"], [[ParentSetEntry(frozenset({2}), 0.0),
                                              ParentSetEntry(frozenset({1}), 1.0)], [], []])
    assert potential_parent_sets(f, 0) == (E, frozenset({1}))
    with pytest.raises(KeyError):
        potential_parent_sets(f, 7)


def test_delta_f():
    assert delta_f(LocalScoreFunction(["a", "b"], [[], []])) == 1
    five = [ParentSetEntry(frozenset({u}), 1.0) for u in range(1, 6)]
    f = LocalScoreFunction([f"v{i}" for i in range(6)], [five, [], [], [], [], []])
    assert delta_f(f) == 6


def test_super_structure(i0):
    assert build_super_structure(i0).edges == {(X, Y), (Y, Z)}
    assert build_super_structure(LocalScoreFunction(["a", "b"], [[], []])).edges == frozenset()
    f = LocalScoreFunction(["v", "a", "b"], [[ParentSetEntry(frozenset({1, 2}), 1.0)], [], []])
    assert build_super_structure(f).edges == {(0, 1), (0, 2)}


def test_score_dag(i0):
    assert score_dag(i0, Dag([X, Y, Z], [(Y, X), (Y, Z)])) == 6
    assert score_dag(i0, Dag([X, Y, Z])) == 0
    assert score_dag(i0, Dag([X, Y, Z], [(X, Y), (Y, Z)])) == 5


def test_admissibility(i0):
    assert is_strictly_admissible(i0, Dag([X, Y, Z], [(Y, X)]))
    assert not is_strictly_admissible(i0, Dag([X, Y, Z], [(X, Z)]))
    assert is_strictly_admissible(i0, Dag([X, Y, Z]))


def test_strip_to_admissible(i0):
    d = strip_to_admissible(i0, Dag([X, Y, Z], [(X, Z)]))
    assert d.arcs == frozenset() and score_dag(i0, d) == 0
    d = strip_to_admissible(i0, Dag([X, Y, Z], [(Y, X), (X, Z)]))
    assert d.arcs == {(Y, X)} and score_dag(i0, d) == 4
    ok = Dag([X, Y, Z], [(Y, X), (Y, Z)])
    assert strip_to_admissible(i0, ok) == ok


def test_normalize_shifts_per_variable():
    f = parse_scores("2\na 2\n-3.5 0\n-1 1 b\nb 1\n-2 0\n", allow_negative=True)
    g = normalize(f)
    assert g.score(0, ()) == 1.0 and g.score(0, {1}) == 3.5 and g.score(1, ()) == 1.0
    with pytest.raises(ValueError):
        normalize(f, 0)


@st.composite
def score_functions(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    entries = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        sets = draw(st.lists(st.frozensets(st.sampled_from(others)) if others else st.just(E),
                             unique=True, max_size=4))
        scores = draw(st.lists(st.floats(0, 1e6, allow_nan=False, allow_infinity=False),
                               min_size=len(sets), max_size=len(sets)))
        entries.append([ParentSetEntry(s, x) for s, x in zip(sets, scores)])
    return LocalScoreFunction([f"v{i}" for i in range(n)], entries)


@given(score_functions())
def test_format_parse_round_trip(f):
    assert parse_scores(format_scores(f)) == f


@given(score_functions())
def test_super_structure_covers_every_strictly_admissible_choice(f):
    g = build_super_structure(f)
    for v in f.variables:
        for ps in potential_parent_sets(f, v):
            assert all(g.has_edge(u, v) for u in ps)
