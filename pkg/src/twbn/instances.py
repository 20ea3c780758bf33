"""Seeded random score functions with controlled super-structures."""
from __future__ import annotations

import itertools
import random

from .scores import LocalScoreFunction, ParentSetEntry


def random_partial_ktree(n: int, k: int, rng: random.Random, keep: float = 0.7) -> set[tuple[int, int]]:
    """Random subgraph of a random k-tree on ``n`` vertices (treewidth <= k)."""
    edges: set[tuple[int, int]] = set()
    base = min(n, k + 1)
    edges.update(itertools.combinations(range(base), 2))
    cliques = [c for c in itertools.combinations(range(base), k)] if base == k + 1 else []
    for v in range(base, n):
        clique = rng.choice(cliques)
        for u in clique:
            edges.add((u, v))
        for drop in range(len(clique)):
            cliques.append(clique[:drop] + clique[drop + 1:] + (v,))
    return {e for e in edges if rng.random() < keep}


def score_function_on(n: int, edges, rng: random.Random, max_sets: int = 6,
                      max_size: int | None = None, integer: bool = False,
                      zero_prob: float = 0.1) -> LocalScoreFunction:
    """Random score function whose potential parents stay within ``edges``."""
    nbrs: dict[int, list[int]] = {v: [] for v in range(n)}
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    entries = []
    for v in range(n):
        cand = sorted(nbrs[v])
        subsets = [frozenset(c) for r in range(1, (max_size or len(cand)) + 1)
                   for c in itertools.combinations(cand, r)]
        rng.shuffle(subsets)
        ents = []
        if rng.random() < 0.3:
            ents.append(ParentSetEntry(frozenset(), _draw(rng, integer)))
        for ps in subsets[: rng.randint(0, max_sets - len(ents))]:
            score = 0.0 if rng.random() < zero_prob else _draw(rng, integer)
            ents.append(ParentSetEntry(ps, score))
        entries.append(ents)
    return LocalScoreFunction([f"v{i}" for i in range(n)], entries)


def _draw(rng: random.Random, integer: bool) -> float:
    if integer:
        return float(rng.randint(1, 9))
    return round(rng.uniform(0.1, 10.0), 3)


def random_instance(n: int, seed: int, k: int = 2, max_sets: int = 6) -> LocalScoreFunction:
    rng = random.Random(seed)
    return score_function_on(n, random_partial_ktree(n, k, rng), rng, max_sets=max_sets)


def caterpillar_instance(n: int, seed: int, max_sets: int = 3) -> LocalScoreFunction:
    """Spine path with one leg per spine vertex, each leg also touching the next spine vertex.

    Treewidth is 2 (1 for n < 4) and every variable has at most
    ``max_sets`` positive parent sets, so delta_f <= max_sets + 1.
    """
    rng = random.Random(seed)
    edges = set()
    spine = list(range(0, n, 2))
    for i, s in enumerate(spine):
        if i + 1 < len(spine):
            edges.add((s, spine[i + 1]))
        leg = s + 1
        if leg < n:
            edges.add((s, leg))
            if i + 1 < len(spine):
                edges.add((leg, spine[i + 1]))
    return score_function_on(n, edges, rng, max_sets=max_sets, zero_prob=0.0)
