"""Score-function generators built from three classic combinatorial problems.

Each generator comes with a small brute-force solver for the source problem,
so generated instances have an independently known answer:

* feedback arc set -> bounded-degree structure learning (target 2|E| - k);
* partitioned clique -> bounded-treewidth structure learning;
* red/blue non-blocker -> reversal-only local search with a planted +1 step.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .graphs import Dag, is_acyclic
from .local_search import ADD, DEL, REV, NeighborhoodSpec
from .scores import LocalScoreFunction, ParentSetEntry

FAS_MAX_ARCS = 24
ORACLE_CAP = 10**6


class OracleCapExceeded(RuntimeError):
    pass


def _score_function(names: list[str], table: dict[str, dict[frozenset[str], float]]) -> LocalScoreFunction:
    ids = {name: i for i, name in enumerate(names)}
    entries = []
    for name in names:
        ents = table.get(name, {})
        entries.append([ParentSetEntry(frozenset(ids[p] for p in ps), score) for ps, score in ents.items()])
    return LocalScoreFunction(names, entries)


# --- feedback arc set ---


@dataclass
class FasInstance:
    vertices: list[str]
    arcs: list[tuple[str, str]]
    k: int = 0


def arc_node(u: str, v: str) -> str:
    return f"e_{u}_{v}"


def gen_fas(inst: FasInstance) -> tuple[LocalScoreFunction, float]:
    """Subdivide every arc (u, v) by a node that scores 1 with parent u.

    Vertex v scores |P(v)| when all its subdivision nodes are its parents.
    """
    arcs = list(dict.fromkeys(inst.arcs))
    if not arcs:
        raise ValueError("digraph needs at least one arc")
    for u, v in arcs:
        if u == v:
            raise ValueError(f"self-loop at {u}")
        if u not in inst.vertices or v not in inst.vertices:
            raise ValueError(f"arc ({u}, {v}) uses an unknown vertex")
    names = list(inst.vertices) + [arc_node(u, v) for u, v in arcs]
    if len(set(names)) != len(names):
        raise ValueError("vertex and arc-node names collide")
    table: dict[str, dict[frozenset[str], float]] = {}
    incoming: dict[str, list[str]] = {}
    for u, v in arcs:
        table[arc_node(u, v)] = {frozenset([u]): 1.0}
        incoming.setdefault(v, []).append(arc_node(u, v))
    for v, nodes in incoming.items():
        table[v] = {frozenset(nodes): float(len(nodes))}
    return _score_function(names, table), float(2 * len(arcs) - inst.k)


def brute_force_fas(vertices: Sequence[str], arcs: Sequence[tuple[str, str]]) -> int:
    """Minimum number of arcs whose removal leaves the digraph acyclic."""
    arcs = list(dict.fromkeys(arcs))
    if len(arcs) > FAS_MAX_ARCS:
        raise OracleCapExceeded(f"{len(arcs)} arcs exceed the cap of {FAS_MAX_ARCS}")
    for size in range(len(arcs) + 1):
        for removed in itertools.combinations(range(len(arcs)), size):
            drop = set(removed)
            if is_acyclic([a for i, a in enumerate(arcs) if i not in drop], vertices):
                return size
    raise AssertionError("removing every arc always leaves a DAG")


def random_digraph(n: int, m: int, rng: random.Random) -> FasInstance:
    verts = [f"x{i}" for i in range(n)]
    pairs = [(u, v) for u in verts for v in verts if u != v]
    return FasInstance(verts, rng.sample(pairs, min(m, len(pairs))))


# --- partitioned clique ---


@dataclass
class CliqueInstance:
    parts: list[list[str]]
    edges: set[frozenset[str]]
    alpha: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        k = len(self.parts)
        if self.alpha is None:
            self.alpha = float(k * k - 1)
        if self.epsilon is None:
            self.epsilon = float(2 * k)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def n(self) -> int:
        return len(self.parts[0]) if self.parts else 0

    def target(self) -> float:
        k, n = self.k, self.n
        return k * (n - 1) * self.alpha + (k * (k - 1) // 2) * self.epsilon


def calibrated_constants(k: int) -> tuple[float, float]:
    """alpha = 1, epsilon = k * alpha + 1: the converse direction holds with these."""
    return 1.0, float(k + 1)


def a_node(i: int, j: int) -> str:
    return f"a_{i}_{j}"


def a_neighbors(k: int, i: int) -> list[str]:
    """Names of the selector nodes a_lm with l = i or m = i (1-based)."""
    return [a_node(l, m) for l, m in itertools.combinations(range(1, k + 1), 2) if i in (l, m)]


def gen_partitioned_clique(inst: CliqueInstance) -> tuple[LocalScoreFunction, float]:
    k, n = inst.k, inst.n
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 parts of size n >= 1")
    if any(len(p) != n for p in inst.parts):
        raise ValueError("all parts must have the same size")
    part_of = {v: i for i, part in enumerate(inst.parts, 1) for v in part}
    if len(part_of) != k * n:
        raise ValueError("parts must be disjoint")
    names = [v for part in inst.parts for v in part]
    names += [a_node(i, j) for i, j in itertools.combinations(range(1, k + 1), 2)]
    table: dict[str, dict[frozenset[str], float]] = {}
    for i, part in enumerate(inst.parts, 1):
        for v in part:
            table[v] = {frozenset(a_neighbors(k, i)): float(inst.alpha)}
    for e in sorted(inst.edges, key=sorted):
        u, w = sorted(e, key=lambda x: part_of[x])
        i, j = part_of[u], part_of[w]
        if i == j:
            raise ValueError(f"edge {sorted(e)} lies inside part {i}")
        table.setdefault(a_node(i, j), {})[frozenset(e)] = float(inst.epsilon)
    return _score_function(names, table), inst.target()


def clique_witness_dag(inst: CliqueInstance, f: LocalScoreFunction, clique: Sequence[str]) -> Dag:
    """DAG scoring exactly the target: clique vertices feed their selectors,
    selectors feed the rest of each part."""
    ids = {name: i for i, name in enumerate(f.names)}
    arcs = []
    for i, (part, vi) in enumerate(zip(inst.parts, clique), 1):
        for a in a_neighbors(inst.k, i):
            arcs.append((ids[vi], ids[a]))
            arcs.extend((ids[a], ids[v]) for v in part if v != vi)
    return Dag(f.variables, arcs)


def brute_force_partitioned_clique(inst: CliqueInstance, cap: int = ORACLE_CAP) -> list[str] | None:
    """First transversal (one vertex per part) that is pairwise adjacent, or None."""
    if inst.n ** inst.k > cap:
        raise OracleCapExceeded(f"{inst.n}^{inst.k} transversals exceed the cap of {cap}")
    for pick in itertools.product(*inst.parts):
        if all(frozenset((u, w)) in inst.edges for u, w in itertools.combinations(pick, 2)):
            return list(pick)
    return None


def random_clique_instance(k: int, n: int, rng: random.Random, p: float = 0.5,
                           plant: bool = False, alpha: float | None = None,
                           epsilon: float | None = None) -> CliqueInstance:
    parts = [[f"v_{i}_{x}" for x in range(1, n + 1)] for i in range(1, k + 1)]
    edges = set()
    for pi, pj in itertools.combinations(parts, 2):
        for u in pi:
            for w in pj:
                if rng.random() < p:
                    edges.add(frozenset((u, w)))
    if plant:
        pick = [rng.choice(part) for part in parts]
        edges.update(frozenset(e) for e in itertools.combinations(pick, 2))
    return CliqueInstance(parts, edges, alpha, epsilon)


# --- bounded-degree red/blue non-blocker ---


@dataclass
class RbnbInstance:
    red: list[str]
    blue: list[str]
    edges: set[frozenset[str]]
    d: int = 3
    k: int = 1
    ops: frozenset[str] = frozenset({REV})
    # filled in by gen_rbnb: padding vertex names per red vertex
    padding: dict[str, list[str]] = field(default_factory=dict)

    def neighbors(self, v: str) -> list[str]:
        return sorted(w for e in self.edges if v in e for w in e if w != v)


@dataclass
class RbnbConstruction:
    scores: LocalScoreFunction
    base_dag: Dag
    k_prime: int
    padding: dict[str, list[str]]
    tree1_leaves: list[str]
    tree2_leaves: list[str]
    roots: tuple[str, str]


def k_prime(d: int, k: int, ops: frozenset[str]) -> int:
    spec = NeighborhoodSpec(ops, 0)
    if not spec.nontrivial:
        raise ValueError("operation set must be non-trivial")
    base = (d + 1) * k + 1
    return base if REV in spec.ops else 2 * base


def _binary_tree(prefix: str, leaves: int) -> tuple[list[str], list[tuple[str, str]], list[str]]:
    """Perfect binary tree of lowest height with >= ``leaves`` leaves.

    Returns nodes (root first, heap order), parent->child edges and the
    leaves in left-to-right order.
    """
    height = (leaves - 1).bit_length()
    size = 2 ** (height + 1) - 1
    nodes = [f"{prefix}_{i}" for i in range(size)]
    edges = [(nodes[(i - 1) // 2], nodes[i]) for i in range(1, size)]
    return nodes, edges, nodes[2 ** height - 1:]


def gen_rbnb(inst: RbnbInstance) -> RbnbConstruction:
    red, blue = list(inst.red), list(inst.blue)
    d, k = inst.d, inst.k
    if d < 3:
        raise ValueError("degree bound d must be at least 3")
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(red) < 1:
        raise ValueError("need at least one red vertex")
    rset, bset = set(red), set(blue)
    if rset & bset:
        raise ValueError("red and blue overlap")
    for e in inst.edges:
        u, w = tuple(e)
        if not ((u in rset and w in bset) or (u in bset and w in rset)):
            raise ValueError(f"edge {sorted(e)} does not join red and blue")
    for b in blue:
        if not inst.neighbors(b):
            # trivially a no-instance, yet such a vertex never affects any score
            raise ValueError(f"blue vertex {b} has no neighbours")
    for v in red + blue:
        if len(inst.neighbors(v)) > d:
            raise ValueError(f"vertex {v} has degree {len(inst.neighbors(v))} > d = {d}")
    kp = k_prime(d, k, inst.ops)
    n = len(red)

    nbr: dict[str, list[str]] = {v: inst.neighbors(v) for v in red + blue}
    padding: dict[str, list[str]] = {}
    for i, v in enumerate(red, 1):
        pads = [f"pad_{i}_{j}" for j in range(1, d - len(nbr[v]) + 1)]
        padding[v] = pads
        nbr[v] = nbr[v] + pads
        for p in pads:
            nbr[p] = [v]

    t1_nodes, t1_edges, t1_leaves = _binary_tree("t1", n)
    t2_nodes, t2_edges, t2_leaves = _binary_tree("t2", n)
    r1, r2 = t1_nodes[0], t2_nodes[0]
    l1, l2 = t1_leaves[:n], t2_leaves[:n]

    arcs: list[tuple[str, str]] = []
    for v in red:
        arcs.extend((v, w) for w in nbr[v])
    arcs.extend(t1_edges)
    arcs.extend((c, p) for p, c in t2_edges)
    for i, v in enumerate(red):
        arcs.append((v, l1[i]))
        arcs.append((v, l2[i]))
    arcs.append((r2, r1))

    pads_all = [p for v in red for p in padding[v]]
    names = red + blue + pads_all + t1_nodes + t2_nodes
    parents: dict[str, set[str]] = {v: set() for v in names}
    for u, v in arcs:
        parents[v].add(u)

    alpha, beta, eps = float(k - 1), float(n), 1.0
    table: dict[str, dict[frozenset[str], float]] = {}

    def put(v, ps, score):
        table.setdefault(v, {})[frozenset(ps)] = score

    for i, v in enumerate(red):
        put(v, set(nbr[v]) | {l1[i]}, eps)
    for b in blue:
        for r in range(1, len(nbr[b]) + 1):
            for ps in itertools.combinations(nbr[b], r):
                put(b, ps, beta)
    skip = set(l1) | {r2}
    for v in t1_nodes + t2_nodes:
        if v not in skip:
            put(v, parents[v], alpha)
    put(r2, parents[r2], alpha)
    put(r2, parents[r2] | {r1}, alpha)
    for i, leaf in enumerate(l1):
        put(leaf, parents[leaf], alpha)
        put(leaf, parents[leaf] - {red[i]}, alpha)

    f = _score_function(names, table)
    ids = {name: i for i, name in enumerate(names)}
    dag = Dag(f.variables, [(ids[u], ids[v]) for u, v in arcs])
    inst.padding = padding
    return RbnbConstruction(f, dag, kp, padding, l1, l2, (r1, r2))


def planted_reversal(inst: RbnbInstance, con: RbnbConstruction, nonblocker: Sequence[str]) -> Dag:
    """Reverse every arc out of the chosen red vertices into G' and T1, plus (r2, r1)."""
    f = con.scores
    ids = {name: i for i, name in enumerate(f.names)}
    flip = set()
    red_index = {v: i for i, v in enumerate(inst.red)}
    for v in nonblocker:
        targets = inst.neighbors(v) + con.padding[v] + [con.tree1_leaves[red_index[v]]]
        flip.update((ids[v], ids[w]) for w in targets)
    r1, r2 = con.roots
    flip.add((ids[r2], ids[r1]))
    missing = flip - con.base_dag.arcs
    if missing:
        raise ValueError("planted reversal names arcs that are not in the base DAG")
    arcs = (set(con.base_dag.arcs) - flip) | {(v, u) for u, v in flip}
    return Dag(f.variables, arcs)


def brute_force_rbnb(inst: RbnbInstance, k: int | None = None, cap: int = ORACLE_CAP) -> list[str] | None:
    """First size-k red set leaving every blue vertex a neighbour outside it, or None."""
    k = inst.k if k is None else k
    if k > len(inst.red):
        return None
    if math.comb(len(inst.red), k) > cap:
        raise OracleCapExceeded(f"C({len(inst.red)}, {k}) subsets exceed the cap of {cap}")
    nbr = {b: set(inst.neighbors(b)) for b in inst.blue}
    for pick in itertools.combinations(inst.red, k):
        s = set(pick)
        if all(nbr[b] - s for b in inst.blue):
            return list(pick)
    return None


def random_rbnb_instance(n_red: int, n_blue: int, rng: random.Random, d: int = 3, k: int = 1,
                         plant: bool = False, ops: frozenset[str] = frozenset({REV}),
                         p: float = 0.5) -> tuple[RbnbInstance, list[str] | None]:
    """Random bipartite instance with max degree d.

    Every blue vertex gets at least one neighbour.  With ``plant`` a random
    size-k red set is made a non-blocker by giving each blue vertex a
    neighbour outside it; the set is returned.
    """
    red = [f"v_r_{i}" for i in range(1, n_red + 1)]
    blue = [f"v_b_{j}" for j in range(1, n_blue + 1)]
    deg = {v: 0 for v in red + blue}
    edges: set[frozenset[str]] = set()

    def link(r, b):
        e = frozenset((r, b))
        if e in edges or deg[r] >= d or deg[b] >= d:
            return False
        edges.add(e)
        deg[r] += 1
        deg[b] += 1
        return True

    planted = None
    if plant:
        if n_red <= k:
            raise ValueError("planting needs more red vertices than k")
        planted = sorted(rng.sample(red, k), key=red.index)
        outside = [r for r in red if r not in planted]
        for b in blue:
            options = [r for r in outside if deg[r] < d]
            if not options:
                raise ValueError("degree bound too tight to plant a non-blocker")
            link(rng.choice(options), b)
    for b in blue:
        if deg[b] == 0:
            options = [r for r in red if deg[r] < d]
            if not options:
                raise ValueError("degree bound too tight to give every blue vertex a neighbour")
            link(rng.choice(options), b)
    for r in red:
        for b in blue:
            if rng.random() < p:
                link(r, b)
    return RbnbInstance(red, blue, edges, d, k, frozenset(ops)), planted
