"""k-neighbourhood local search over DAGs with arc addition, deletion and reversal."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

from .dp_solver import Solution
from .graphs import Dag, GraphError, is_acyclic
from .scores import LocalScoreFunction, build_super_structure, score_dag

ADD, DEL, REV = "add", "del", "rev"
ALL_OPS = frozenset({ADD, DEL, REV})
DEFAULT_CANDIDATE_CAP = 10**7


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class NeighborhoodSpec:
    ops: frozenset[str]
    k: int

    def __init__(self, ops: Iterable[str], k: int):
        ops = frozenset(o.lower() for o in ops)
        if not ops or not ops <= ALL_OPS:
            raise ValueError(f"ops must be a nonempty subset of {sorted(ALL_OPS)}, got {sorted(ops)}")
        if k < 0:
            raise ValueError("k must be non-negative")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "k", int(k))

    @property
    def nontrivial(self) -> bool:
        return self.ops not in (frozenset({ADD}), frozenset({DEL}))

    @classmethod
    def parse(cls, text: str, k: int) -> NeighborhoodSpec:
        return cls([t.strip() for t in text.split(",") if t.strip()], k)


def edit_cost(old: Iterable[tuple[int, int]], new: Iterable[tuple[int, int]], ops: frozenset[str]) -> int | None:
    """Fewest operations from ``ops`` turning arc set ``old`` into ``new``; None if impossible."""
    old, new = set(old), set(new)
    added = new - old
    deleted = old - new
    flips = {(u, v) for u, v in deleted if (v, u) in added}
    pure_add = len(added) - len(flips)
    pure_del = len(deleted) - len(flips)
    cost = 0
    if flips:
        if REV in ops:
            cost += len(flips)
        elif ADD in ops and DEL in ops:
            cost += 2 * len(flips)
        else:
            return None
    if pure_add:
        if ADD not in ops:
            return None
        cost += pure_add
    if pure_del:
        if DEL not in ops:
            return None
        cost += pure_del
    return cost


def is_k_neighbor(dag: Dag, other: Dag | Iterable[tuple[int, int]], spec: NeighborhoodSpec) -> bool:
    arcs = set(other.arcs if isinstance(other, Dag) else other)
    if isinstance(other, Dag) and set(other.vertices) != set(dag.vertices):
        raise GraphError("vertex sets differ")
    vset = set(dag.vertices)
    if any(u not in vset or v not in vset for u, v in arcs):
        raise GraphError("vertex sets differ")
    if any(u == v for u, v in arcs) or not is_acyclic(arcs, dag.vertices):
        return False
    cost = edit_cost(dag.arcs, arcs, spec.ops)
    return cost is not None and cost <= spec.k


def _check_admissible(f: LocalScoreFunction, dag: Dag) -> None:
    g = build_super_structure(f)
    for u, v in dag.arcs:
        if not g.has_edge(u, v):
            raise ValueError(f"DAG is not admissible: arc ({f.names[u]}, {f.names[v]}) is not a super-structure edge")


def _descendants(dag: Dag, v: int) -> set[int]:
    out: dict[int, list[int]] = {}
    for a, b in dag.arcs:
        out.setdefault(a, []).append(b)
    seen = set()
    stack = [v]
    while stack:
        for w in out.get(stack.pop(), ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def improve_add_only(f: LocalScoreFunction, dag: Dag, k: int) -> Solution | None:
    """Best single-vertex improvement by adding at most ``k`` incoming arcs.

    A score gain from additions alone always shows up at some single vertex,
    and a subset of an acyclic arc addition stays acyclic, so scanning each
    vertex's listed parent sets is enough.
    """
    _check_admissible(f, dag)
    pm = dag.parent_map()
    best = None
    best_gain = 0.0
    for v in f.variables:
        cur = pm[v]
        base = f.score(v, cur)
        desc = None
        for e in f.entries[v]:
            if e.score <= base or not cur <= e.parents or len(e.parents - cur) > k:
                continue
            gain = e.score - base
            if gain <= best_gain:
                continue
            if desc is None:
                desc = _descendants(dag, v)
            if desc & (e.parents - cur):
                continue
            best, best_gain = (v, e.parents), gain
    if best is None:
        return None
    v, ps = best
    pm[v] = ps
    new = Dag.from_parents(dag.vertices, pm)
    return Solution(score_dag(f, new), new)


def improve_del_only(f: LocalScoreFunction, dag: Dag, k: int) -> Solution | None:
    """Best single-vertex improvement by deleting at most ``k`` incoming arcs."""
    _check_admissible(f, dag)
    pm = dag.parent_map()
    best = None
    best_gain = 0.0
    for v in f.variables:
        cur = pm[v]
        base = f.score(v, cur)
        for e in f.entries[v]:
            if e.score <= base or not e.parents <= cur or len(cur - e.parents) > k:
                continue
            gain = e.score - base
            if gain > best_gain:
                best, best_gain = (v, e.parents), gain
    if best is None:
        return None
    v, ps = best
    pm[v] = ps
    new = Dag.from_parents(dag.vertices, pm)
    return Solution(score_dag(f, new), new)


def _alternatives(edge: tuple[int, int], arcs: frozenset[tuple[int, int]], ops: frozenset[str]):
    """(label, removed arc, added arc, cost) choices for changing one edge."""
    u, v = edge
    if (u, v) in arcs or (v, u) in arcs:
        a, b = (u, v) if (u, v) in arcs else (v, u)
        out = []
        if DEL in ops:
            out.append((("del", a, b), (a, b), None, 1))
        if REV in ops:
            out.append((("rev", a, b), (a, b), (b, a), 1))
        elif ADD in ops and DEL in ops:
            out.append((("del+add", a, b), (a, b), (b, a), 2))
        return out
    if ADD in ops:
        return [(("add", u, v), None, (u, v), 1), (("add", v, u), None, (v, u), 1)]
    return []


def brute_force_improve(f: LocalScoreFunction, dag: Dag, spec: NeighborhoodSpec,
                        cap: int = DEFAULT_CANDIDATE_CAP) -> Solution | None:
    """Best strictly improving neighbour by exhaustive enumeration.

    Edits range over super-structure edges plus the arcs already in the DAG;
    each edge is changed at most once.  Among equal best scores the first
    candidate in enumeration order wins: fewer edited edges, then edge order.
    """
    if sorted(dag.vertices) != list(f.variables):
        raise ValueError("DAG vertex set does not match the score function's variables")
    if spec.k == 0:
        return None
    g = build_super_structure(f)
    edges = sorted(set(g.edges) | {(min(u, v), max(u, v)) for u, v in dag.arcs})
    choices = [(e, _alternatives(e, dag.arcs, spec.ops)) for e in edges]
    choices = [(e, alts) for e, alts in choices if alts]

    pm = dag.parent_map()
    local = {v: f.score(v, pm[v]) for v in f.variables}
    base = score_dag(f, dag)
    best = None
    best_gain = 0.0
    seen = 0
    for size in range(1, spec.k + 1):
        for combo in itertools.combinations(choices, size):
            for picks in itertools.product(*(alts for _, alts in combo)):
                if sum(p[3] for p in picks) > spec.k:
                    continue
                seen += 1
                if seen > cap:
                    raise SearchBudgetExceeded(f"more than {cap} candidate neighbours")
                changed: dict[int, set[int]] = {}
                for _, rem, add, _ in picks:
                    if rem is not None:
                        changed.setdefault(rem[1], set(pm[rem[1]])).discard(rem[0])
                    if add is not None:
                        changed.setdefault(add[1], set(pm[add[1]])).add(add[0])
                gain = math.fsum(x for v, ps in changed.items() for x in (f.score(v, ps), -local[v]))
                if gain <= best_gain:
                    continue
                arcs = set(dag.arcs)
                for _, rem, add, _ in picks:
                    if rem is not None:
                        arcs.discard(rem)
                    if add is not None:
                        arcs.add(add)
                if not is_acyclic(arcs, dag.vertices):
                    continue
                best, best_gain = arcs, gain
    if best is None:
        return None
    new = Dag(dag.vertices, best)
    score = score_dag(f, new)
    if not score > base:
        return None
    return Solution(score, new)
