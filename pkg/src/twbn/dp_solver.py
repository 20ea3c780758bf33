"""Exact structure learning by dynamic programming over a nice tree decomposition.

A record of a node t is a triple (a, p, s):

* ``a`` picks a potential parent set for every vertex of the bag, stored as
  a tuple of indices into ``potential_parent_sets`` aligned with the sorted
  bag;
* ``p`` is the path relation between bag vertices (a strict partial order),
  stored as one successor bitmask per bag position;
* ``s`` is the best total score of the vertices already forgotten below t.

Tables map ``(a, p)`` to ``(s, back)`` where ``back`` points at the child
record(s) the entry came from.  Equal scores keep the first derivation;
tables are filled in a fixed order, so results are deterministic.
"""
from __future__ import annotations

import gc
import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable

from .graphs import Dag
from .scores import (LocalScoreFunction, build_super_structure, delta_f, potential_parent_sets,
                     score_dag)
from .treedec import (FORGET, INTRODUCE, JOIN, LEAF, NiceTreeDecomposition, decompose,
                      nicify, validate_nice, width)

DEFAULT_BUDGET = 10**8

Key = tuple[tuple[int, ...], tuple[int, ...]]
Table = dict[Key, tuple[float, object]]


class WidthBudgetExceeded(RuntimeError):
    def __init__(self, w: int, delta: int, budget: int):
        self.width = w
        self.delta = delta
        self.budget = budget
        super().__init__(
            f"decomposition width {w} with delta_f {delta} allows up to "
            f"{delta}^{w + 1} * 2^{(w + 1) ** 2} records per node, over the budget of {budget}"
        )


class InvalidDecomposition(ValueError):
    pass


@dataclass(frozen=True)
class TraceRow:
    node: int
    kind: str
    bag: tuple[int, ...]
    size: int
    vertex: int | None = None


@dataclass
class Solution:
    score: float
    dag: Dag
    trace: list[TraceRow] = field(default_factory=list, repr=False)


class _Scores:
    """Potential parent sets and their scores, indexed for the DP."""

    def __init__(self, f: LocalScoreFunction):
        self.sets = [potential_parent_sets(f, v) for v in f.variables]
        self.values = [tuple(f.score(v, ps) for ps in self.sets[v]) for v in f.variables]


def _close(rows: list[int]) -> tuple[int, ...] | None:
    """Transitive closure of bitmask rows; None if the result has a cycle."""
    n = len(rows)
    for k in range(n):
        bk = 1 << k
        rk = rows[k]
        for i in range(n):
            if rows[i] & bk:
                rows[i] |= rk
    for i in range(n):
        if rows[i] >> i & 1:
            return None
    return tuple(rows)


def leaf_records(bag: tuple[int, ...], f: LocalScoreFunction | _Scores) -> Table:
    """All acyclic parent-set assignments of the bag, each with score 0."""
    sc = f if isinstance(f, _Scores) else _Scores(f)
    pos = {v: i for i, v in enumerate(bag)}
    table: Table = {}
    for a in itertools.product(*(range(len(sc.sets[v])) for v in bag)):
        rows = [0] * len(bag)
        for j, v in enumerate(bag):
            for u in sc.sets[v][a[j]]:
                i = pos.get(u)
                if i is not None:
                    rows[i] |= 1 << j
        p = _close(rows)
        if p is not None:
            key = (a, p)
            if key not in table:
                table[key] = (0.0, None)
    return table


def introduce(child: Table, child_bag: tuple[int, ...], v0: int,
              f: LocalScoreFunction | _Scores) -> Table:
    """Extend every child record by a parent-set choice for ``v0``.

    Parents of ``v0`` outside the child bag add no arc yet; they are handled
    when they get introduced themselves.
    """
    sc = f if isinstance(f, _Scores) else _Scores(f)
    bag = tuple(sorted((*child_bag, v0)))
    k = bag.index(v0)
    low = (1 << k) - 1
    vbit = 1 << k
    # positions in the new bag of child vertices
    new_pos = [i if i < k else i + 1 for i in range(len(child_bag))]
    in_bits = []
    for ps in sc.sets[v0]:
        bits = 0
        for i, u in enumerate(child_bag):
            if u in ps:
                bits |= 1 << new_pos[i]
        in_bits.append(bits)
    # has_v0[i][idx]: child vertex i's idx-th parent set contains v0
    has_v0 = [[v0 in ps for ps in sc.sets[u]] for u in child_bag]
    n_choices = len(sc.sets[v0])

    table: Table = {}
    for key, (s, _) in child.items():
        a, p = key
        rows = [(r & low) | ((r >> k) << (k + 1)) for r in p]
        out_set = 0
        for i, idx in enumerate(a):
            if has_v0[i][idx]:
                out_set |= 1 << new_pos[i]
        out_star = out_set
        bits = out_set
        while bits:
            b = bits & -bits
            bits ^= b
            np_ = b.bit_length() - 1
            out_star |= rows[np_ if np_ < k else np_ - 1]
        for j in range(n_choices):
            in_set = in_bits[j]
            in_star = in_set
            for i, r in enumerate(rows):
                if r & in_set:
                    in_star |= 1 << new_pos[i]
            if in_star & out_star:
                continue
            new_rows = list(rows)
            for i in range(len(rows)):
                if in_star >> new_pos[i] & 1:
                    new_rows[i] |= out_star | vbit
            new_rows.insert(k, out_star)
            nkey = (a[:k] + (j,) + a[k:], tuple(new_rows))
            old = table.get(nkey)
            if old is None or s > old[0]:
                table[nkey] = (s, key)
    return table


def forget(child: Table, child_bag: tuple[int, ...], v0: int,
           f: LocalScoreFunction | _Scores) -> Table:
    """Drop ``v0`` from every record and add its chosen local score."""
    sc = f if isinstance(f, _Scores) else _Scores(f)
    k = child_bag.index(v0)
    low = (1 << k) - 1
    values = sc.values[v0]
    table: Table = {}
    for key, (s, _) in child.items():
        a, p = key
        rows = tuple((r & low) | ((r >> (k + 1)) << k) for i, r in enumerate(p) if i != k)
        nkey = (a[:k] + a[k + 1:], rows)
        total = s + values[a[k]]
        old = table.get(nkey)
        if old is None or total > old[0]:
            table[nkey] = (total, key)
    return table


def join(left: Table, right: Table) -> Table:
    """Combine records with equal parent-set choices; path relations merge."""
    by_a: dict[tuple[int, ...], list[tuple[tuple[int, ...], float, Key]]] = {}
    for key, (s, _) in right.items():
        by_a.setdefault(key[0], []).append((key[1], s, key))
    closures: dict[tuple[tuple[int, ...], tuple[int, ...]], tuple[int, ...] | None] = {}
    table: Table = {}
    for lkey, (s1, _) in left.items():
        a, p1 = lkey
        for p2, s2, rkey in by_a.get(a, ()):
            if p1 == p2:
                p = p1
            else:
                ck = (p1, p2)
                if ck in closures:
                    p = closures[ck]
                else:
                    p = closures[ck] = _close([x | y for x, y in zip(p1, p2)])
                if p is None:
                    continue
            nkey = (a, p)
            total = s1 + s2
            old = table.get(nkey)
            if old is None or total > old[0]:
                table[nkey] = (total, (lkey, rkey))
    return table


def record_bound(delta: int, bag_size: int) -> int:
    return delta ** bag_size * 2 ** (bag_size * bag_size)


def check_budget(f: LocalScoreFunction, w: int, budget: int = DEFAULT_BUDGET) -> None:
    d = delta_f(f)
    if record_bound(d, w + 1) > budget:
        raise WidthBudgetExceeded(w, d, budget)


@contextmanager
def _gc_paused():
    # decompositions and tables hold no reference cycles, so the collector has
    # nothing to find; left on, it rescans every live object and the pipeline
    # grows superlinearly in the number of variables
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def solve(f: LocalScoreFunction, ntd: NiceTreeDecomposition, budget: int = DEFAULT_BUDGET,
          on_node: Callable[[TraceRow], None] | None = None) -> Solution:
    """Highest-scoring DAG for ``f`` using a nice decomposition of its super-structure."""
    with _gc_paused():
        problems = validate_nice(ntd, build_super_structure(f))
        if problems:
            raise InvalidDecomposition(
                "decomposition does not fit the super-structure: " + "; ".join(problems[:5])
            )
        check_budget(f, width(ntd), budget)
        return _run(f, ntd, on_node)


def _run(f: LocalScoreFunction, ntd: NiceTreeDecomposition,
         on_node: Callable[[TraceRow], None] | None) -> Solution:
    sc = _Scores(f)

    tables: list[Table] = []
    trace: list[TraceRow] = []
    for t in range(len(ntd)):
        kind = ntd.kinds[t]
        kids = ntd.children[t]
        if kind == LEAF:
            tab = leaf_records(ntd.bags[t], sc)
        elif kind == INTRODUCE:
            tab = introduce(tables[kids[0]], ntd.bags[kids[0]], ntd.vertex[t], sc)
        elif kind == FORGET:
            tab = forget(tables[kids[0]], ntd.bags[kids[0]], ntd.vertex[t], sc)
        else:
            tab = join(tables[kids[0]], tables[kids[1]])
        tables.append(tab)
        row = TraceRow(t, kind, ntd.bags[t], len(tab), ntd.vertex[t])
        trace.append(row)
        if on_node is not None:
            on_node(row)

    root_table = tables[ntd.root]
    if len(root_table) != 1:
        raise RuntimeError(f"root table holds {len(root_table)} records, expected 1")
    (root_key, _), = root_table.items()

    chosen: dict[int, frozenset[int]] = {}
    stack = [(ntd.root, root_key)]
    while stack:
        t, key = stack.pop()
        kind = ntd.kinds[t]
        back = tables[t][key][1]
        if kind == LEAF:
            continue
        if kind == JOIN:
            lk, rk = back
            stack.append((ntd.children[t][0], lk))
            stack.append((ntd.children[t][1], rk))
            continue
        child = ntd.children[t][0]
        if kind == FORGET:
            v0 = ntd.vertex[t]
            idx = back[0][ntd.bags[child].index(v0)]
            chosen[v0] = sc.sets[v0][idx]
        stack.append((child, back))

    dag = Dag.from_parents(f.variables, chosen)
    # report the correctly rounded sum so equal-valued optima compare equal
    return Solution(score_dag(f, dag), dag, trace)


def solve_scores(f: LocalScoreFunction, heuristic: str = "min-fill", seed: int | None = None,
                 budget: int = DEFAULT_BUDGET,
                 on_node: Callable[[TraceRow], None] | None = None) -> Solution:
    """Decompose the super-structure, put it in nice form, and solve."""
    with _gc_paused():
        g = build_super_structure(f)
        td = decompose(g, heuristic, seed)
        check_budget(f, width(td), budget)
        return solve(f, nicify(td, g), budget=budget, on_node=on_node)
