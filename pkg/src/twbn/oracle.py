"""Brute-force reference solvers for checking the tree-decomposition DP."""
from __future__ import annotations

import itertools
import math

from .dp_solver import Solution
from .graphs import Dag, is_acyclic
from .scores import LocalScoreFunction, potential_parent_sets, score_dag

EXHAUSTIVE_CAP = 10**6
ORDER_DP_MAX_VARS = 20


class OracleCapExceeded(RuntimeError):
    pass


def exhaustive_best_dag(f: LocalScoreFunction, cap: int = EXHAUSTIVE_CAP) -> Solution:
    """Try every assignment of potential parent sets and keep the best acyclic one."""
    sets = [potential_parent_sets(f, v) for v in f.variables]
    count = math.prod(len(s) for s in sets)
    if f.n > 5 and count > cap:
        raise OracleCapExceeded(f"{count} assignments exceed the cap of {cap}")
    values = [[f.score(v, ps) for ps in sets[v]] for v in f.variables]
    best = None
    best_score = -math.inf
    for a in itertools.product(*(range(len(s)) for s in sets)):
        arcs = [(u, v) for v in f.variables for u in sets[v][a[v]]]
        if not is_acyclic(arcs, f.variables):
            continue
        total = sum(values[v][a[v]] for v in f.variables)
        if total > best_score:
            best_score, best = total, arcs
    dag = Dag(f.variables, best)
    return Solution(score_dag(f, dag), dag)


def order_dp_best_score(f: LocalScoreFunction) -> float:
    """Best DAG score by dynamic programming over variable subsets.

    best(S) is the best score of a DAG on S in which every vertex draws its
    parents from S; some vertex of S comes last in a topological order.
    """
    n = f.n
    if n > ORDER_DP_MAX_VARS:
        raise OracleCapExceeded(f"{n} variables exceed the limit of {ORDER_DP_MAX_VARS}")
    options = []
    for v in f.variables:
        opts = []
        for ps in potential_parent_sets(f, v):
            mask = 0
            for u in ps:
                mask |= 1 << u
            opts.append((mask, f.score(v, ps)))
        options.append(opts)
    best = [0.0] * (1 << n)
    for s in range(1, 1 << n):
        top = -math.inf
        for v in range(n):
            if not s >> v & 1:
                continue
            rest = s ^ (1 << v)
            local = max(sc for mask, sc in options[v] if mask & ~rest == 0)
            cand = best[rest] + local
            if cand > top:
                top = cand
        best[s] = top
    return best[(1 << n) - 1]
