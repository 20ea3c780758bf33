"""Tree decompositions: elimination heuristics, validation, and nice form.

Nice decompositions are stored as flat arrays indexed by node id, with ids
assigned in post-order (every child id is smaller than its parent's), so a
bottom-up pass is a plain loop over ``range(len(ntd))``.
"""
from __future__ import annotations

import heapq
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .graphs import UndirectedGraph

LEAF, JOIN, INTRODUCE, FORGET = "leaf", "join", "introduce", "forget"
HEURISTICS = ("min-fill", "min-degree")

# nicify emits at most NICE_SIZE_FACTOR * (|V| + 1) * (width + 2) nodes
NICE_SIZE_FACTOR = 3


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]

    def __init__(self, bags: Iterable[Iterable[int]], edges: Iterable[tuple[int, int]] = ()):
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in bags))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in edges))

    def __len__(self) -> int:
        return len(self.bags)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in self.bags]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


@dataclass
class NiceTreeDecomposition:
    bags: list[tuple[int, ...]]
    kinds: list[str]
    vertex: list[int | None]
    children: list[tuple[int, ...]]
    root: int

    def __len__(self) -> int:
        return len(self.bags)

    def as_tree_decomposition(self) -> TreeDecomposition:
        edges = [(c, t) for t, cs in enumerate(self.children) for c in cs]
        return TreeDecomposition(self.bags, edges)

    def describe(self, t: int) -> str:
        kind = self.kinds[t]
        if kind in (INTRODUCE, FORGET):
            return f"{kind}({self.vertex[t]})"
        return kind


def width(td: TreeDecomposition | NiceTreeDecomposition) -> int:
    if len(td.bags) == 0:
        raise DecompositionError("empty decomposition has no width")
    return max(len(b) for b in td.bags) - 1


# --- heuristics ---


def _fill_in(adj: dict[int, set[int]], v: int) -> int:
    nbrs = list(adj[v])
    missing = 0
    for i, x in enumerate(nbrs):
        ax = adj[x]
        for y in nbrs[i + 1:]:
            if y not in ax:
                missing += 1
    return missing


def elimination_order(g: UndirectedGraph, heuristic: str = "min-fill", seed: int | None = None) -> list[int]:
    """Greedy elimination order.

    Ties go to lower fill-in (min-fill only), then lower degree, then lower
    rank.  Rank is the vertex id, or a seeded permutation of ids when ``seed``
    is a nonzero integer.
    """
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; choose from {HEURISTICS}")
    order, _ = _eliminate(g, heuristic, seed)
    return order


def _eliminate(g: UndirectedGraph, heuristic: str, seed: int | None):
    verts = list(g.vertices)
    rank = {v: i for i, v in enumerate(sorted(verts))}
    if seed:
        perm = sorted(verts)
        random.Random(seed).shuffle(perm)
        rank = {v: i for i, v in enumerate(perm)}
    adj = {v: set(g.neighbors(v)) for v in verts}
    use_fill = heuristic == "min-fill"

    def key(v):
        if use_fill:
            return (_fill_in(adj, v), len(adj[v]), rank[v], v)
        return (len(adj[v]), rank[v], v)

    current = {v: key(v) for v in verts}
    heap = list(current.values())
    heapq.heapify(heap)
    order: list[int] = []
    bags: list[frozenset[int]] = []
    alive = set(verts)
    while heap:
        k = heapq.heappop(heap)
        v = k[-1]
        if v not in alive or current[v] != k:
            continue
        nbrs = adj[v]
        order.append(v)
        bags.append(frozenset(nbrs | {v}))
        nl = list(nbrs)
        for i, x in enumerate(nl):
            for y in nl[i + 1:]:
                if y not in adj[x]:
                    adj[x].add(y)
                    adj[y].add(x)
        for x in nl:
            adj[x].discard(v)
        alive.discard(v)
        del adj[v]
        touched = set(nl)
        if use_fill:
            for x in nl:
                touched |= adj[x]
        for x in touched:
            k2 = key(x)
            if k2 != current[x]:
                current[x] = k2
                heapq.heappush(heap, k2)
    return order, bags


def decompose(g: UndirectedGraph, heuristic: str = "min-fill", seed: int | None = None) -> TreeDecomposition:
    """Tree decomposition from a greedy elimination order (one bag per vertex)."""
    if heuristic not in HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; choose from {HEURISTICS}")
    if not g.vertices:
        return TreeDecomposition([frozenset()])
    order, bags = _eliminate(g, heuristic, seed)
    pos = {v: i for i, v in enumerate(order)}
    edges = []
    last_root = None
    for i, v in enumerate(order):
        rest = bags[i] - {v}
        if rest:
            edges.append((i, min(pos[u] for u in rest)))
        else:
            # component root; chain components together
            if last_root is not None:
                edges.append((last_root, i))
            last_root = i
    return TreeDecomposition(bags, edges)


def exact_treewidth(g: UndirectedGraph) -> int:
    """Treewidth by dynamic programming over vertex subsets (|V| <= 12)."""
    n = len(g.vertices)
    if n > 12:
        raise ValueError("exact_treewidth is limited to 12 vertices")
    if n == 0:
        return -1
    idx = {v: i for i, v in enumerate(g.vertices)}
    nbr = [0] * n
    for u, v in g.edges:
        nbr[idx[u]] |= 1 << idx[v]
        nbr[idx[v]] |= 1 << idx[u]
    full = (1 << n) - 1

    def q_size(s: int, v: int) -> int:
        # vertices outside s | {v} reachable from v through s
        seen = 1 << v
        frontier = 1 << v
        found = 0
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            x = b.bit_length() - 1
            new = nbr[x] & ~seen
            seen |= new
            found |= new & ~s
            frontier |= new & s
        return bin(found & ~(1 << v)).count("1")

    tw = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, full + 1):
        best = n
        bits = s
        while bits:
            b = bits & -bits
            bits ^= b
            v = b.bit_length() - 1
            rest = s ^ b
            cand = max(tw[rest], q_size(rest, v))
            if cand < best:
                best = cand
        tw[s] = best
    return tw[full]


# --- validation ---


def _tree_violations(n_nodes: int, edges: Iterable[tuple[int, int]]) -> list[str]:
    edges = list(edges)
    out = []
    if n_nodes == 0:
        return ["decomposition has no nodes"]
    adj: list[set[int]] = [set() for _ in range(n_nodes)]
    for a, b in edges:
        if not (0 <= a < n_nodes and 0 <= b < n_nodes):
            out.append(f"tree edge ({a}, {b}) names an unknown node")
            continue
        if a == b:
            out.append(f"tree edge ({a}, {b}) is a loop")
            continue
        adj[a].add(b)
        adj[b].add(a)
    if out:
        return out
    if len(edges) != n_nodes - 1:
        out.append(f"tree has {len(edges)} edges, expected {n_nodes - 1}")
    seen = {0}
    dq = deque([0])
    while dq:
        x = dq.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                dq.append(y)
    if len(seen) != n_nodes:
        out.append(f"tree is disconnected: {n_nodes - len(seen)} node(s) unreachable from node 0")
    return out


def _connectivity_violations(bags, adj) -> list[str]:
    out = []
    where: dict[int, list[int]] = {}
    for t, bag in enumerate(bags):
        for v in bag:
            where.setdefault(v, []).append(t)
    bad = []
    for v, nodes in where.items():
        nodeset = set(nodes)
        seen = {nodes[0]}
        dq = deque([nodes[0]])
        while dq:
            x = dq.popleft()
            for y in adj[x]:
                if y in nodeset and y not in seen:
                    seen.add(y)
                    dq.append(y)
        if len(seen) != len(nodeset):
            bad.append((v, sorted(nodeset)))
    for v, nodes in sorted(bad):
        out.append(f"condition 3: nodes containing vertex {v} are not connected (nodes {nodes})")
    return out


def validate(g: UndirectedGraph, td: TreeDecomposition) -> list[str]:
    """All violations of the tree-decomposition conditions; empty means valid."""
    out = _tree_violations(len(td.bags), td.edges)
    if out:
        return out
    vset = set(g.vertices)
    where: dict[int, set[int]] = {v: set() for v in g.vertices}
    for t, bag in enumerate(td.bags):
        for v in bag:
            if v not in vset:
                out.append(f"node {t}: bag contains unknown vertex {v}")
            else:
                where[v].add(t)
    for v in g.vertices:
        if not where[v]:
            out.append(f"condition 1: vertex {v} is in no bag")
    uncovered = [(u, v) for u, v in g.edges if where[u].isdisjoint(where[v])]
    for u, v in sorted(uncovered):
        out.append(f"condition 2: edge {{{u}, {v}}} is in no bag")
    out.extend(_connectivity_violations(td.bags, td.adjacency()))
    return out


def validate_nice(ntd: NiceTreeDecomposition, g: UndirectedGraph | None = None) -> list[str]:
    """Node-type, root and decomposition checks for a nice decomposition.

    Without a graph only the structural conditions and vertex connectivity
    are checked; with one, vertex and edge coverage are checked as well.
    """
    out = []
    n = len(ntd.bags)
    if n == 0:
        return ["decomposition has no nodes"]
    if not 0 <= ntd.root < n:
        return [f"root {ntd.root} is not a node"]
    if ntd.bags[ntd.root]:
        out.append(f"root {ntd.root} has nonempty bag {sorted(ntd.bags[ntd.root])}")
    parent_count = [0] * n
    for t in range(n):
        for c in ntd.children[t]:
            if not 0 <= c < n:
                out.append(f"node {t}: unknown child {c}")
                continue
            parent_count[c] += 1
    for t in range(n):
        want = 0 if t == ntd.root else 1
        if parent_count[t] != want:
            out.append(f"node {t}: has {parent_count[t]} parents, expected {want}")
    if out:
        return out

    for t in range(n):
        bag = set(ntd.bags[t])
        kids = ntd.children[t]
        kind = ntd.kinds[t]
        v = ntd.vertex[t]
        if len(bag) != len(ntd.bags[t]):
            out.append(f"node {t}: bag has repeated vertices")
        if kind == LEAF:
            if kids:
                out.append(f"node {t}: leaf with {len(kids)} children")
        elif kind == JOIN:
            if len(kids) != 2:
                out.append(f"node {t}: join with {len(kids)} children")
            elif any(set(ntd.bags[c]) != bag for c in kids):
                out.append(f"node {t}: join children bags differ from {sorted(bag)}")
        elif kind in (INTRODUCE, FORGET):
            if len(kids) != 1:
                out.append(f"node {t}: {kind} with {len(kids)} children")
                continue
            child = set(ntd.bags[kids[0]])
            if kind == INTRODUCE:
                if v in child:
                    out.append(f"node {t}: introduce({v}) but {v} already in child bag")
                elif bag != child | {v}:
                    out.append(f"node {t}: introduce({v}) bag is not child bag plus {v}")
            else:
                if v not in child:
                    out.append(f"node {t}: forget({v}) but {v} not in child bag")
                elif bag != child - {v}:
                    out.append(f"node {t}: forget({v}) bag is not child bag minus {v}")
        else:
            out.append(f"node {t}: unknown kind {kind!r}")

    # reachability from the root (parent counts alone allow detached cycles)
    seen = {ntd.root}
    stack = [ntd.root]
    while stack:
        for c in ntd.children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    if len(seen) != n:
        out.append(f"{n - len(seen)} node(s) not reachable from root")
        return out

    td = ntd.as_tree_decomposition()
    if g is not None:
        out.extend(validate(g, td))
    else:
        out.extend(_connectivity_violations(td.bags, td.adjacency()))
    return out


# --- nice form ---


def _contract_subset_bags(td: TreeDecomposition) -> TreeDecomposition:
    """Merge every node whose bag is contained in a neighbour's bag into it."""
    adj = td.adjacency()
    bags = list(td.bags)
    alive = [True] * len(bags)
    work = list(range(len(bags)))
    while work:
        s = work.pop()
        if not alive[s]:
            continue
        for t in sorted(adj[s]):
            if bags[s] <= bags[t]:
                alive[s] = False
                for x in adj[s]:
                    adj[x].discard(s)
                    if x != t:
                        adj[x].add(t)
                        adj[t].add(x)
                adj[s] = set()
                work.append(t)
                break
    keep = [i for i in range(len(bags)) if alive[i]]
    renum = {old: new for new, old in enumerate(keep)}
    edges = {(min(renum[a], renum[b]), max(renum[a], renum[b]))
             for a in keep for b in adj[a]}
    return TreeDecomposition([bags[i] for i in keep], sorted(edges))


def nicify(td: TreeDecomposition, g: UndirectedGraph | None = None) -> NiceTreeDecomposition:
    """Convert a valid decomposition into nice form with an empty root bag.

    The width is preserved.  Bags contained in a neighbouring bag are merged
    first, which leaves at most |V| + 1 nodes; each tree edge then costs at
    most 2 (width + 1) introduce/forget nodes and each branching one join
    node, giving the NICE_SIZE_FACTOR bound.
    """
    problems = _tree_violations(len(td.bags), td.edges)
    if not problems:
        problems = validate(g, td) if g is not None else _connectivity_violations(td.bags, td.adjacency())
    if problems:
        raise DecompositionError("invalid tree decomposition: " + "; ".join(problems[:5]))

    td = _contract_subset_bags(td)
    adj = td.adjacency()
    root = 0
    parent = {root: None}
    order = [root]
    for x in order:
        for y in sorted(adj[x]):
            if y not in parent:
                parent[y] = x
                order.append(y)

    bags: list[tuple[int, ...]] = []
    kinds: list[str] = []
    vertex: list[int | None] = []
    children: list[tuple[int, ...]] = []

    def add(bag, kind, v, kids):
        bags.append(tuple(sorted(bag)))
        kinds.append(kind)
        vertex.append(v)
        children.append(tuple(kids))
        return len(bags) - 1

    top: dict[int, int] = {}
    for t in reversed(order):
        bag = td.bags[t]
        tops = []
        for c in sorted(y for y in adj[t] if parent.get(y) == t):
            node = top.pop(c)
            cur = set(td.bags[c])
            for v in sorted(cur - bag):
                cur.discard(v)
                node = add(cur, FORGET, v, [node])
            for v in sorted(bag - cur):
                cur.add(v)
                node = add(cur, INTRODUCE, v, [node])
            tops.append(node)
        if not tops:
            node = add(bag, LEAF, None, [])
        else:
            node = tops[0]
            for other in tops[1:]:
                node = add(bag, JOIN, None, [node, other])
        top[t] = node

    node = top[root]
    cur = set(td.bags[root])
    for v in sorted(cur):
        cur.discard(v)
        node = add(cur, FORGET, v, [node])
    return NiceTreeDecomposition(bags, kinds, vertex, children, node)


# --- text format: "s td N W+1 V", "b id v1 .. vk", "id1 id2" (1-based) ---


def format_td(td: TreeDecomposition, num_vertices: int) -> str:
    w1 = max((len(b) for b in td.bags), default=0)
    lines = [f"s td {len(td.bags)} {w1} {num_vertices}"]
    for t, bag in enumerate(td.bags):
        lines.append(" ".join(["b", str(t + 1), *(str(v + 1) for v in sorted(bag))]))
    for a, b in td.edges:
        lines.append(f"{a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def parse_td(text: str) -> tuple[TreeDecomposition, int]:
    """Parse the TD exchange format; returns 0-based node and vertex ids."""
    header = None
    bags: dict[int, list[int]] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        try:
            if toks[0] == "s":
                if header is not None or len(toks) != 5 or toks[1] != "td":
                    raise DecompositionError(f"line {lineno}: bad solution line")
                header = tuple(int(x) for x in toks[2:])
            elif toks[0] == "b":
                if header is None:
                    raise DecompositionError(f"line {lineno}: bag before solution line")
                t = int(toks[1])
                if t in bags:
                    raise DecompositionError(f"line {lineno}: bag {t} given twice")
                bags[t] = [int(x) for x in toks[2:]]
            else:
                if header is None or len(toks) != 2:
                    raise DecompositionError(f"line {lineno}: expected a tree edge")
                edges.append((int(toks[0]), int(toks[1])))
        except ValueError as exc:
            if isinstance(exc, DecompositionError):
                raise
            raise DecompositionError(f"line {lineno}: non-integer token") from None
    if header is None:
        raise DecompositionError("missing 's td' line")
    n_nodes, _, n_vertices = header
    if sorted(bags) != list(range(1, n_nodes + 1)):
        raise DecompositionError(f"expected bags 1..{n_nodes}, got {len(bags)} bag line(s)")
    for t, vs in bags.items():
        for v in vs:
            if not 1 <= v <= n_vertices:
                raise DecompositionError(f"bag {t}: vertex {v} out of range 1..{n_vertices}")
    td = TreeDecomposition(
        [[v - 1 for v in bags[t]] for t in range(1, n_nodes + 1)],
        [(a - 1, b - 1) for a, b in edges],
    )
    return td, n_vertices
