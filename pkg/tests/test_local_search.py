from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import X, Y, Z
from twbn.dp_solver import solve_scores
from twbn.graphs import Dag
from twbn.instances import random_instance
from twbn.local_search import (ADD, DEL, REV, NeighborhoodSpec, brute_force_improve, edit_cost,
                               improve_add_only, improve_del_only, is_k_neighbor)
from twbn.scores import LocalScoreFunction, ParentSetEntry, potential_parent_sets, score_dag

U, V = 0, 1


def random_admissible_dag(f, rng):
    order = list(f.variables)
    rng.shuffle(order)
    rank = {v: i for i, v in enumerate(order)}
    pm = {}
    for v in f.variables:
        fits = [ps for ps in potential_parent_sets(f, v) if all(rank[u] < rank[v] for u in ps)]
        pm[v] = rng.choice(fits)
    return Dag.from_parents(f.variables, pm)


def test_spec_parsing():
    assert NeighborhoodSpec.parse("add, del", 2).ops == {ADD, DEL}
    with pytest.raises(ValueError):
        NeighborhoodSpec.parse("flip", 1)
    with pytest.raises(ValueError):
        NeighborhoodSpec({REV}, -1)
    assert not NeighborhoodSpec({ADD}, 1).nontrivial
    assert NeighborhoodSpec({ADD, DEL}, 1).nontrivial


def test_is_k_neighbor_examples():
    d = Dag([U, V], [(U, V)])
    assert is_k_neighbor(d, d, NeighborhoodSpec({ADD}, 0))
    assert is_k_neighbor(d, Dag([U, V], [(V, U)]), NeighborhoodSpec({REV}, 1))
    assert not is_k_neighbor(d, Dag([U, V], [(V, U)]), NeighborhoodSpec({ADD, DEL}, 1))
    assert is_k_neighbor(d, Dag([U, V], [(V, U)]), NeighborhoodSpec({ADD, DEL}, 2))


def test_edit_cost():
    assert edit_cost({(0, 1)}, {(1, 0), (1, 2)}, {ADD, REV}) == 2
    assert edit_cost({(0, 1)}, set(), {ADD, REV}) is None


def test_add_only_i0(i0):
    sol = improve_add_only(i0, Dag([X, Y, Z]), 1)
    assert sol.score == 4 and sol.dag.arcs == {(Y, X)}


def test_add_only_none_at_optimum(i0):
    assert improve_add_only(i0, Dag([X, Y, Z], [(Y, X), (Y, Z)]), 2) is None


def test_add_only_skips_cycle():
    # v would like parent u, but u already depends on v
    f = LocalScoreFunction(["u", "v"], [[ParentSetEntry(frozenset({1}), 1.0)],
                                        [ParentSetEntry(frozenset({0}), 5.0)]])
    assert improve_add_only(f, Dag([U, V], [(V, U)]), 1) is None


def test_del_only_examples():
    f = LocalScoreFunction(["u", "v"], [[], [ParentSetEntry(frozenset(), 5.0),
                                             ParentSetEntry(frozenset({0}), 1.0)]])
    sol = improve_del_only(f, Dag([U, V], [(U, V)]), 1)
    assert sol.score == 5 and sol.dag.arcs == frozenset()
    assert improve_del_only(f, Dag([U, V]), 1) is None
    g = LocalScoreFunction(["a", "b", "v"], [[], [], [ParentSetEntry(frozenset(), 5.0),
                                                      ParentSetEntry(frozenset({0, 1}), 1.0)]])
    assert improve_del_only(g, Dag([0, 1, 2], [(0, 2), (1, 2)]), 1) is None
    assert improve_del_only(g, Dag([0, 1, 2], [(0, 2), (1, 2)]), 2).score == 5


def test_brute_force_examples(i0):
    assert brute_force_improve(i0, Dag([X, Y, Z]), NeighborhoodSpec({ADD}, 0)) is None
    d = Dag([X, Y, Z], [(X, Y), (Y, Z)])
    assert score_dag(i0, d) == 5
    sol = brute_force_improve(i0, d, NeighborhoodSpec({REV}, 1))
    assert sol.score == 6 and sol.dag.arcs == {(Y, X), (Y, Z)}


def test_fast_methods_reject_inadmissible_dag(i0):
    with pytest.raises(ValueError):
        improve_add_only(i0, Dag([X, Y, Z], [(X, Z)]), 1)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6), st.integers(0, 2), st.sampled_from([ADD, DEL]))
def test_single_vertex_scan_matches_brute_force(n, seed, k, op):
    f = random_instance(n, seed)
    dag = random_admissible_dag(f, random.Random(seed))
    fast = (improve_add_only if op == ADD else improve_del_only)(f, dag, k)
    slow = brute_force_improve(f, dag, NeighborhoodSpec({op}, k))
    assert (fast is None) == (slow is None)
    if fast is not None:
        assert is_k_neighbor(dag, fast.dag, NeighborhoodSpec({op}, k))
        assert fast.score > score_dag(f, dag)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_global_optimum_is_local_optimum(n, seed):
    f = random_instance(n, seed)
    sol = solve_scores(f)
    for ops in ({REV}, {ADD, DEL}, {ADD, REV}, {DEL, REV}, {ADD, DEL, REV}):
        assert brute_force_improve(f, sol.dag, NeighborhoodSpec(ops, 2)) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6), st.integers(1, 2))
def test_brute_force_result_is_a_neighbour(n, seed, k):
    f = random_instance(n, seed)
    dag = random_admissible_dag(f, random.Random(seed + 1))
    spec = NeighborhoodSpec({ADD, DEL, REV}, k)
    sol = brute_force_improve(f, dag, spec)
    if sol is not None:
        assert is_k_neighbor(dag, sol.dag, spec)
        assert sol.score > score_dag(f, dag)
