"""Directed and undirected graph values over dense integer vertex ids."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class GraphError(ValueError):
    pass


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class UndirectedGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    _adj: dict[int, frozenset[int]] = field(init=False, repr=False, compare=False)

    def __init__(self, vertices: Iterable[int], edges: Iterable[tuple[int, int]] = ()):
        verts = tuple(vertices)
        vset = set(verts)
        if len(vset) != len(verts):
            raise GraphError("duplicate vertex id")
        norm = set()
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u not in vset or v not in vset:
                raise GraphError(f"edge ({u}, {v}) has an unlisted endpoint")
            norm.add(_norm_edge(u, v))
        adj: dict[int, set[int]] = {v: set() for v in verts}
        for u, v in norm:
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(norm))
        object.__setattr__(self, "_adj", {v: frozenset(n) for v, n in adj.items()})

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def induced(self, keep: Iterable[int]) -> UndirectedGraph:
        keep = set(keep)
        return UndirectedGraph(
            [v for v in self.vertices if v in keep],
            [(u, v) for u, v in self.edges if u in keep and v in keep],
        )


def is_acyclic(arcs: Iterable[tuple[int, int]], vertices: Iterable[int]) -> bool:
    """Kahn's algorithm: True iff repeated source removal consumes every vertex."""
    verts = list(vertices)
    indeg = {v: 0 for v in verts}
    out: dict[int, list[int]] = {v: [] for v in verts}
    for u, v in set(arcs):
        out[u].append(v)
        indeg[v] += 1
    stack = [v for v in verts if indeg[v] == 0]
    seen = 0
    while stack:
        u = stack.pop()
        seen += 1
        for w in out[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == len(verts)


@dataclass(frozen=True)
class Dag:
    """A directed acyclic graph; acyclicity is checked on construction."""

    vertices: tuple[int, ...]
    arcs: frozenset[tuple[int, int]]

    def __init__(self, vertices: Iterable[int], arcs: Iterable[tuple[int, int]] = ()):
        verts = tuple(vertices)
        vset = set(verts)
        if len(vset) != len(verts):
            raise GraphError("duplicate vertex id")
        arcset = frozenset((u, v) for u, v in arcs)
        for u, v in arcset:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u not in vset or v not in vset:
                raise GraphError(f"arc ({u}, {v}) has an unlisted endpoint")
        if not is_acyclic(arcset, verts):
            raise GraphError("arc set contains a directed cycle")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "arcs", arcset)

    @classmethod
    def from_parents(cls, vertices: Iterable[int], parent_map: dict[int, Iterable[int]]) -> Dag:
        return cls(vertices, [(u, v) for v, ps in parent_map.items() for u in ps])

    def parent_map(self) -> dict[int, frozenset[int]]:
        pm: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.arcs:
            pm[v].add(u)
        return {v: frozenset(ps) for v, ps in pm.items()}


def parents(dag: Dag, v: int) -> frozenset[int]:
    if v not in dag.vertices:
        raise GraphError(f"unknown vertex {v}")
    return frozenset(u for u, w in dag.arcs if w == v)


def skeleton(dag: Dag) -> UndirectedGraph:
    return UndirectedGraph(dag.vertices, dag.arcs)


def reachability(dag: Dag, restrict_to: Iterable[int]) -> set[tuple[int, int]]:
    """Pairs (u, w) of ``restrict_to`` joined by a directed path of length >= 1.

    Paths may leave ``restrict_to``; closure is computed on the whole DAG.
    """
    index = {v: i for i, v in enumerate(dag.vertices)}
    succ = [0] * len(index)
    for u, v in dag.arcs:
        succ[index[u]] |= 1 << index[v]
    # reverse topological order makes one pass sufficient
    order = _topological_order(dag)
    reach = [0] * len(index)
    for v in reversed(order):
        i = index[v]
        r = succ[i]
        bits = succ[i]
        while bits:
            low = bits & -bits
            r |= reach[low.bit_length() - 1]
            bits ^= low
        reach[i] = r
    wanted = set(restrict_to)
    keep = [v for v in dag.vertices if v in wanted]
    return {
        (u, w)
        for u in keep
        for w in keep
        if u != w and reach[index[u]] >> index[w] & 1
    }


def _topological_order(dag: Dag) -> list[int]:
    indeg = {v: 0 for v in dag.vertices}
    out: dict[int, list[int]] = {v: [] for v in dag.vertices}
    for u, v in sorted(dag.arcs):
        out[u].append(v)
        indeg[v] += 1
    stack = [v for v in reversed(dag.vertices) if indeg[v] == 0]
    order = []
    while stack:
        u = stack.pop()
        order.append(u)
        for w in out[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return order


def max_degree(g: UndirectedGraph) -> int:
    return max((g.degree(v) for v in g.vertices), default=0)


# --- DAG text format: one line per vertex, "child <- p1 p2 ..." ---


def format_dag(dag: Dag, names: Sequence[str]) -> str:
    pm = dag.parent_map()
    lines = []
    for v in dag.vertices:
        ps = " ".join(names[u] for u in sorted(pm[v]))
        lines.append(f"{names[v]} <- {ps}".rstrip() if ps else f"{names[v]} <-")
    return "".join(line + "\n" for line in lines)


def parse_dag(text: str, names: Sequence[str] | None = None) -> tuple[Dag, list[str]]:
    """Parse the DAG text format.

    With ``names`` given, vertex ids follow that symbol table and every name
    must occur in it; otherwise ids are assigned in order of first mention
    as a child line.
    """
    rows: list[tuple[int, str, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition("<-")
        if not sep:
            raise GraphError(f"line {lineno}: expected 'child <- parents'")
        child = head.strip()
        plist = tail.split()
        for tok in [child, *plist]:
            if not NAME_RE.match(tok):
                raise GraphError(f"line {lineno}: bad vertex name {tok!r}")
        rows.append((lineno, child, plist))

    if names is None:
        table = [child for _, child, _ in rows]
        if len(set(table)) != len(table):
            raise GraphError("a vertex has more than one line")
    else:
        table = list(names)
    ids = {name: i for i, name in enumerate(table)}
    pm: dict[int, list[int]] = {i: [] for i in range(len(table))}
    seen = set()
    for lineno, child, plist in rows:
        if child not in ids:
            raise GraphError(f"line {lineno}: unknown vertex {child!r}")
        if child in seen:
            raise GraphError(f"line {lineno}: duplicate line for {child!r}")
        seen.add(child)
        for p in plist:
            if p not in ids:
                raise GraphError(f"line {lineno}: unknown parent {p!r}")
            pm[ids[child]].append(ids[p])
    try:
        dag = Dag.from_parents(range(len(table)), pm)
    except GraphError as exc:
        raise GraphError(f"invalid DAG: {exc}") from None
    return dag, table
