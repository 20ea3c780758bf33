from __future__ import annotations

import itertools
import random

import pytest

from twbn.dp_solver import solve_scores
from twbn.graphs import is_acyclic, max_degree, skeleton
from twbn.local_search import ADD, DEL, REV, NeighborhoodSpec, brute_force_improve, is_k_neighbor
from twbn.reductions import (CliqueInstance, FasInstance, RbnbInstance, a_node, brute_force_fas,
                             brute_force_partitioned_clique, brute_force_rbnb, calibrated_constants,
                             clique_witness_dag, gen_fas, gen_partitioned_clique, gen_rbnb, k_prime,
                             planted_reversal, random_clique_instance, random_digraph,
                             random_rbnb_instance)
from twbn.scores import (build_super_structure, format_scores, is_strictly_admissible, parse_scores,
                         score_dag)
from twbn.treedec import decompose, width


def test_fas_two_cycle():
    f, target = gen_fas(FasInstance(["u", "v"], [("u", "v"), ("v", "u")], 1))
    assert f.n == 4 and target == 3
    assert solve_scores(f).score == 3


def test_fas_acyclic_and_triangle():
    f, _ = gen_fas(FasInstance(["a", "b", "c"], [("a", "b"), ("b", "c")]))
    assert solve_scores(f).score == 4
    f, _ = gen_fas(FasInstance(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")]))
    assert solve_scores(f).score == 5


def test_brute_force_fas():
    assert brute_force_fas(["a", "b"], [("a", "b")]) == 0
    assert brute_force_fas(["a", "b"], [("a", "b"), ("b", "a")]) == 1
    assert brute_force_fas(list("abcd"), [("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")]) == 2


def test_fas_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_fas(FasInstance(["a"], [("a", "a")]))
    with pytest.raises(ValueError):
        gen_fas(FasInstance(["a"], [("a", "z")]))


def test_fas_round_trip_small():
    rng = random.Random(9)
    for _ in range(25):
        inst = random_digraph(rng.randint(2, 4), rng.randint(1, 6), rng)
        f, _ = gen_fas(inst)
        assert solve_scores(f).score == 2 * len(inst.arcs) - brute_force_fas(inst.vertices, inst.arcs)


def one_edge_instance(alpha=None, epsilon=None):
    return CliqueInstance([["p"], ["q"]], {frozenset({"p", "q"})}, alpha, epsilon)


def test_clique_default_constants_example():
    inst = one_edge_instance()
    f, target = gen_partitioned_clique(inst)
    assert (inst.alpha, inst.epsilon, target) == (3.0, 4.0, 4.0)
    assert score_dag(f, clique_witness_dag(inst, f, ["p", "q"])) == 4


def test_clique_default_constants_converse_fails():
    # both V-vertices take their selector as parent: 2 * alpha = 6 beats the target 4
    inst = one_edge_instance()
    f, target = gen_partitioned_clique(inst)
    assert solve_scores(f).score == 6 > target


def test_brute_force_partitioned_clique():
    assert brute_force_partitioned_clique(one_edge_instance()) == ["p", "q"]
    assert brute_force_partitioned_clique(CliqueInstance([["p"], ["q"]], set())) is None
    parts = [["a1", "a2"], ["b1", "b2"], ["c1", "c2"]]
    tri = {frozenset(e) for e in itertools.combinations(["a2", "b1", "c2"], 2)}
    assert brute_force_partitioned_clique(CliqueInstance(parts, tri)) == ["a2", "b1", "c2"]


def test_clique_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_partitioned_clique(CliqueInstance([["a", "b"], ["c"]], set()))
    with pytest.raises(ValueError):
        gen_partitioned_clique(CliqueInstance([["a", "b"], ["c", "d"]], {frozenset({"a", "b"})}))


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_clique_forward_and_structure(k, n):
    rng = random.Random(k * 10 + n)
    for consts in [(None, None), calibrated_constants(k), (2.5, 7.0)]:
        inst = random_clique_instance(k, n, rng, plant=True, alpha=consts[0], epsilon=consts[1])
        f, target = gen_partitioned_clique(inst)
        clique = brute_force_partitioned_clique(inst)
        dag = clique_witness_dag(inst, f, clique)
        assert score_dag(f, dag) == target
        g = build_super_structure(f)
        a_ids = {f.index(a_node(i, j)) for i, j in itertools.combinations(range(1, k + 1), 2)}
        rest = g.induced(v for v in f.variables if v not in a_ids)
        assert rest.edges == frozenset()
        assert width(decompose(g)) <= k * (k - 1) // 2


def test_calibrated_converse_k3_n2():
    rng = random.Random(4)
    seen = set()
    for _ in range(12):
        alpha, eps = calibrated_constants(3)
        inst = random_clique_instance(3, 2, rng, p=0.4, alpha=alpha, epsilon=eps)
        f, target = gen_partitioned_clique(inst)
        has = brute_force_partitioned_clique(inst) is not None
        assert (solve_scores(f).score >= target) == has
        seen.add(has)
    assert seen == {True, False}


def test_generated_scores_round_trip_and_are_integral():
    rng = random.Random(2)
    fs = [gen_fas(random_digraph(4, 5, rng))[0],
          gen_partitioned_clique(random_clique_instance(3, 2, rng, plant=True))[0],
          gen_rbnb(random_rbnb_instance(3, 3, rng, k=1, plant=True)[0]).scores]
    for f in fs:
        assert parse_scores(format_scores(f)) == f
        assert all(float(e.score).is_integer() for ents in f.entries for e in ents)


def test_k_prime():
    assert k_prime(3, 1, frozenset({REV})) == 5
    assert k_prime(3, 2, frozenset({ADD, REV})) == 9
    assert k_prime(3, 2, frozenset({ADD, DEL})) == 18
    with pytest.raises(ValueError):
        k_prime(3, 1, frozenset({ADD}))


def test_brute_force_rbnb_examples():
    inst = RbnbInstance(["r1", "r2"], ["b"], {frozenset({"r1", "b"}), frozenset({"r2", "b"})})
    assert brute_force_rbnb(inst) == ["r1"]
    lone = RbnbInstance(["r1"], ["b"], {frozenset({"r1", "b"})})
    assert brute_force_rbnb(lone) is None
    assert brute_force_rbnb(lone, k=0) == []


def test_rbnb_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_rbnb(RbnbInstance(["r"], ["b"], {frozenset({"r", "b"})}, d=2))
    with pytest.raises(ValueError):
        gen_rbnb(RbnbInstance(["r"], ["b", "c"], {frozenset({"r", "b"})}))
    with pytest.raises(ValueError):
        gen_rbnb(RbnbInstance(["r", "s"], ["b"], {frozenset({"r", "s"})}))


def test_rbnb_base_dag_scores():
    rng = random.Random(6)
    inst, _ = random_rbnb_instance(3, 3, rng, k=2, plant=True)
    con = gen_rbnb(inst)
    f = con.scores
    n = len(inst.red)
    tree_nodes = [v for v in f.names if v.startswith(("t1_", "t2_"))]
    expected = n * len(inst.blue) + (inst.k - 1) * len(tree_nodes)
    assert score_dag(f, con.base_dag) == expected
    # padding vertices score nothing, so the base DAG is admissible but not strictly
    assert build_super_structure(f) == skeleton(con.base_dag)
    pads = {f.index(p) for ps in con.padding.values() for p in ps}
    assert pads and not is_strictly_admissible(f, con.base_dag)
    assert max_degree(build_super_structure(f)) <= inst.d + 2
    assert all(len(inst.neighbors(r)) + len(con.padding[r]) == inst.d for r in inst.red)


def test_rbnb_k1_tree_arcs_lie_outside_super_structure():
    # with k = 1 the tree scores are k - 1 = 0, so tree arcs are not potential
    rng = random.Random(6)
    inst, _ = random_rbnb_instance(2, 2, rng, k=1, plant=True)
    con = gen_rbnb(inst)
    g = build_super_structure(con.scores)
    assert g.edges < skeleton(con.base_dag).edges


@pytest.mark.parametrize("k", [1, 2])
def test_rbnb_planted_reversal_gains_one(k):
    rng = random.Random(k)
    for _ in range(5):
        inst, planted = random_rbnb_instance(k + rng.randint(1, 2), rng.randint(1, 3), rng, k=k, plant=True)
        con = gen_rbnb(inst)
        new = planted_reversal(inst, con, planted)
        assert is_acyclic(new.arcs, new.vertices)
        assert score_dag(con.scores, new) == score_dag(con.scores, con.base_dag) + 1
        assert len(new.arcs ^ con.base_dag.arcs) == 2 * con.k_prime
        assert is_k_neighbor(con.base_dag, new, NeighborhoodSpec({REV}, con.k_prime))


def test_rbnb_single_red_neighbour_blocks_improvement():
    edges = {frozenset({"r1", "b1"}), frozenset({"r2", "b2"})}
    inst = RbnbInstance(["r1", "r2"], ["b1", "b2"], edges, k=1)
    con = gen_rbnb(inst)
    assert brute_force_rbnb(inst) is None
    assert brute_force_improve(con.scores, con.base_dag, NeighborhoodSpec({REV}, con.k_prime)) is None


def test_rbnb_small_iff():
    rng = random.Random(12)
    seen = set()
    for _ in range(12):
        inst, _ = random_rbnb_instance(2, rng.randint(1, 3), rng, k=1, p=0.3)
        con = gen_rbnb(inst)
        sol = brute_force_improve(con.scores, con.base_dag, NeighborhoodSpec({REV}, con.k_prime))
        has = brute_force_rbnb(inst) is not None
        assert (sol is not None) == has
        seen.add(has)
    assert seen == {True, False}
