"""Command-line entry point.

Exit codes:
  0  success (for ``improve``: an improving neighbour was written)
  1  input error (unreadable or malformed file, invalid decomposition, bad flag)
  2  resource budget exceeded (width guardrail, oracle or search caps)
  3  ``improve`` found no improvement (prints ``local-optimum``)
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import local_search, reductions
from .dp_solver import DEFAULT_BUDGET, InvalidDecomposition, WidthBudgetExceeded, solve_scores
from .graphs import Dag, GraphError, format_dag, max_degree, parse_dag, skeleton
from .oracle import OracleCapExceeded, exhaustive_best_dag, order_dp_best_score
from .scores import (ScoreFileError, build_super_structure, delta_f, format_scores, normalize,
                     parse_scores)
from .treedec import HEURISTICS, DecompositionError, decompose, parse_td, validate, width

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_NO_IMPROVEMENT = 0, 1, 2, 3


class InputError(Exception):
    pass


def format_score(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_scores(path: str, allow_negative: bool = False):
    try:
        return parse_scores(_read(path), allow_negative=allow_negative)
    except ScoreFileError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_graph(path: str):
    """Super-structure of a score file, or skeleton of a DAG file."""
    text = _read(path)
    if "<-" in text:
        try:
            dag, names = parse_dag(text)
        except GraphError as exc:
            raise InputError(f"{path}: {exc}") from None
        return skeleton(dag), names, None
    f = _load_scores(path)
    return build_super_structure(f), list(f.names), f


def _solution_text(score: float, dag: Dag, names) -> str:
    return f"score {format_score(score)}\n" + format_dag(dag, names)


# --- subcommands ---


def cmd_solve(args) -> int:
    f = _load_scores(args.scorefile)
    g = build_super_structure(f)
    td = decompose(g, args.heuristic, args.seed)
    w = width(td)
    print(f"n={f.n} m={len(g.edges)} w={w} d={max_degree(g)} delta={delta_f(f)}", file=sys.stderr)
    on_node = None
    if args.trace:
        def on_node(row):
            bag = ",".join(f.names[v] for v in row.bag)
            kind = row.kind if row.vertex is None else f"{row.kind}({f.names[row.vertex]})"
            print(f"{row.node}\t{kind}\t{bag}\t{row.size}", file=sys.stderr)
    sol = solve_scores(f, args.heuristic, args.seed, budget=args.budget, on_node=on_node)
    _write(args.output, _solution_text(sol.score, sol.dag, f.names))
    return EXIT_OK


def cmd_oracle(args) -> int:
    f = _load_scores(args.scorefile)
    if args.method == "exhaustive":
        sol = exhaustive_best_dag(f)
        _write(args.output, _solution_text(sol.score, sol.dag, f.names))
    else:
        _write(args.output, f"score {format_score(order_dp_best_score(f))}\n")
    return EXIT_OK


def cmd_improve(args) -> int:
    f = _load_scores(args.scorefile)
    text = _read(args.dagfile)
    lines = [ln for ln in text.splitlines() if not ln.startswith("score ")]
    try:
        dag, _ = parse_dag("\n".join(lines), f.names)
    except GraphError as exc:
        raise InputError(f"{args.dagfile}: {exc}") from None
    try:
        spec = local_search.NeighborhoodSpec.parse(args.ops, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        if spec.ops == {local_search.ADD}:
            sol = local_search.improve_add_only(f, dag, spec.k)
        elif spec.ops == {local_search.DEL}:
            sol = local_search.improve_del_only(f, dag, spec.k)
        else:
            sol = local_search.brute_force_improve(f, dag, spec, cap=args.cap)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if sol is None:
        print("local-optimum")
        return EXIT_NO_IMPROVEMENT
    _write(args.output, _solution_text(sol.score, sol.dag, f.names))
    return EXIT_OK


def _parse_arcs(text: str) -> list[tuple[str, str]]:
    arcs = []
    for part in text.split(","):
        toks = part.split()
        if not toks:
            continue
        if len(toks) != 2:
            raise InputError(f"arc {part.strip()!r} must be 'tail head'")
        arcs.append((toks[0], toks[1]))
    return arcs


def _emit(prefix: str, f, meta: dict, dag: Dag | None = None) -> None:
    Path(prefix + ".scores").write_text(format_scores(f))
    if dag is not None:
        Path(prefix + ".dag").write_text(format_dag(dag, f.names))
        meta["base_dag"] = Path(prefix + ".dag").name
    Path(prefix + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    try:
        if args.problem == "fas":
            if args.arcs:
                arcs = _parse_arcs(args.arcs)
                verts = list(dict.fromkeys(v for a in arcs for v in a))
                inst = reductions.FasInstance(verts, arcs, args.k)
            else:
                inst = reductions.random_digraph(args.vertices, args.num_arcs, rng)
                inst.k = args.k
            f, target = reductions.gen_fas(inst)
            meta = {"problem": "fas", "k": inst.k, "target": target, "seed": args.seed,
                    "arcs": [list(a) for a in inst.arcs]}
            if len(inst.arcs) <= reductions.FAS_MAX_ARCS:
                meta["min_feedback_arc_set"] = reductions.brute_force_fas(inst.vertices, inst.arcs)
            _emit(args.output, f, meta)
        elif args.problem == "clique":
            alpha, eps = args.alpha, args.epsilon
            if args.calibrated:
                alpha, eps = reductions.calibrated_constants(args.k)
            inst = reductions.random_clique_instance(args.k, args.n, rng, p=args.p, plant=args.plant,
                                                     alpha=alpha, epsilon=eps)
            f, target = reductions.gen_partitioned_clique(inst)
            meta = {"problem": "clique", "k": inst.k, "n": inst.n, "alpha": inst.alpha,
                    "epsilon": inst.epsilon, "target": target, "seed": args.seed,
                    "parts": inst.parts, "edges": sorted(sorted(e) for e in inst.edges)}
            if inst.n ** inst.k <= reductions.ORACLE_CAP:
                meta["clique"] = reductions.brute_force_partitioned_clique(inst)
            _emit(args.output, f, meta)
        else:
            ops = frozenset(local_search.NeighborhoodSpec.parse(args.ops, 0).ops)
            inst, planted = reductions.random_rbnb_instance(
                args.red, args.blue, rng, d=args.d, k=args.k, plant=args.plant, ops=ops, p=args.p)
            con = reductions.gen_rbnb(inst)
            meta = {"problem": "rbnb", "k": inst.k, "d": inst.d, "ops": sorted(ops),
                    "k_prime": con.k_prime, "seed": args.seed, "red": inst.red, "blue": inst.blue,
                    "edges": sorted(sorted(e) for e in inst.edges), "padding": con.padding,
                    "planted_nonblocker": planted}
            _emit(args.output, con.scores, meta, con.base_dag)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(f"wrote {args.output}.scores and {args.output}.meta.json", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args) -> int:
    g, _, _ = _load_graph(args.file)
    w = width(decompose(g, args.heuristic, args.seed))
    name = args.name or Path(args.file).stem
    print(f"{name} n={len(g.vertices)} m={len(g.edges)} w={w} d={max_degree(g)}")
    return EXIT_OK


def cmd_validate_td(args) -> int:
    g, _, _ = _load_graph(args.graphfile)
    try:
        td, nv = parse_td(_read(args.tdfile))
    except DecompositionError as exc:
        raise InputError(f"{args.tdfile}: {exc}") from None
    problems = []
    if nv != len(g.vertices):
        problems.append(f"header names {nv} graph vertices, graph has {len(g.vertices)}")
    problems += validate(g, td)
    if problems:
        print("invalid decomposition (ids below are 0-based, one less than in the file):")
        for p in problems:
            print(p)
        return EXIT_INPUT
    print(f"ok width={width(td)}")
    return EXIT_OK


def cmd_normalize(args) -> int:
    f = _load_scores(args.scorefile, allow_negative=True)
    try:
        out = normalize(f, args.floor)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(args.output, format_scores(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twbn", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def decomposition_flags(sp):
        sp.add_argument("--heuristic", choices=HEURISTICS, default="min-fill")
        sp.add_argument("--seed", type=int, default=0,
                        help="tie-breaking seed for the elimination order (0: by vertex id)")

    sp = sub.add_parser("solve", help="exact optimum via the tree-decomposition DP")
    sp.add_argument("scorefile")
    sp.add_argument("-o", "--output")
    decomposition_flags(sp)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                    help="max records per node allowed by the width guardrail")
    sp.add_argument("--trace", action="store_true",
                    help="print node, kind, bag, table size per node to stderr (tab-separated)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("oracle", help="brute-force optimum for small instances")
    sp.add_argument("scorefile")
    sp.add_argument("--method", choices=("exhaustive", "order-dp"), default="order-dp")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("improve", help="one k-neighbourhood local search step")
    sp.add_argument("scorefile")
    sp.add_argument("dagfile")
    sp.add_argument("--ops", default="add,del,rev")
    sp.add_argument("-k", type=int, default=1)
    sp.add_argument("--cap", type=int, default=local_search.DEFAULT_CANDIDATE_CAP)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_improve)

    sp = sub.add_parser("gen", help="generate reduction instances")
    gsub = sp.add_subparsers(dest="problem", required=True)
    g = gsub.add_parser("fas", help="from a feedback arc set instance")
    g.add_argument("--arcs", help='comma-separated arcs, e.g. "u v,v u"')
    g.add_argument("--vertices", type=int, default=4, help="random digraph size (without --arcs)")
    g.add_argument("--num-arcs", type=int, default=6)
    g.add_argument("-k", type=int, default=0)
    g = gsub.add_parser("clique", help="from a partitioned clique instance")
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--p", type=float, default=0.5, help="edge probability")
    g.add_argument("--plant", action="store_true")
    g.add_argument("--alpha", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--calibrated", action="store_true", help="alpha = 1, epsilon = k + 1")
    g = gsub.add_parser("rbnb", help="from a red/blue non-blocker instance")
    g.add_argument("--red", type=int, default=3)
    g.add_argument("--blue", type=int, default=3)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--ops", default="rev")
    g.add_argument("--plant", action="store_true")
    for g in gsub.choices.values():
        g.add_argument("--seed", type=int, default=0)
        g.add_argument("-o", "--output", required=True, help="output path prefix")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("stats", help="n, m, heuristic width and max degree of a score or DAG file")
    sp.add_argument("file")
    sp.add_argument("--name")
    decomposition_flags(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("validate-td", help="check a tree decomposition file against a graph")
    sp.add_argument("graphfile", help="score file (super-structure) or DAG file (skeleton)")
    sp.add_argument("tdfile")
    sp.set_defaults(func=cmd_validate_td)

    sp = sub.add_parser("normalize", help="shift raw (possibly negative) scores to a positive floor")
    sp.add_argument("scorefile")
    sp.add_argument("--floor", type=float, default=1.0)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_normalize)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidDecomposition, DecompositionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (WidthBudgetExceeded, OracleCapExceeded, reductions.OracleCapExceeded,
            local_search.SearchBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
