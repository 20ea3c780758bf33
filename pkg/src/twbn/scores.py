"""Local score functions: parsing, potential parent sets, and DAG scoring.

A score file lists, per variable, the parent sets it may take together with
a non-negative score.  Any parent set that is not listed scores 0, and the
empty parent set is always available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .graphs import NAME_RE, Dag, UndirectedGraph

EMPTY: frozenset[int] = frozenset()


class ScoreFileError(ValueError):
    def __init__(self, lineno: int | None, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


@dataclass(frozen=True)
class ParentSetEntry:
    parents: frozenset[int]
    score: float


class LocalScoreFunction:
    """Per-variable lists of (parent set, score) entries in canonical order."""

    def __init__(self, names: Sequence[str], entries: Sequence[Sequence[ParentSetEntry]],
                 allow_negative: bool = False):
        if len(names) != len(entries):
            raise ValueError("one entry list per variable required")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable name")
        self.names: tuple[str, ...] = tuple(names)
        self.entries: tuple[tuple[ParentSetEntry, ...], ...] = tuple(tuple(e) for e in entries)
        n = len(self.names)
        self._lookup: list[dict[frozenset[int], float]] = []
        for v, ents in enumerate(self.entries):
            table: dict[frozenset[int], float] = {}
            for e in ents:
                if v in e.parents:
                    raise ValueError(f"variable {self.names[v]} listed as its own parent")
                if any(not 0 <= u < n for u in e.parents):
                    raise ValueError(f"parent id out of range for {self.names[v]}")
                if e.score < 0 and not allow_negative:
                    raise ValueError(f"negative score for {self.names[v]}")
                if e.parents in table:
                    raise ValueError(f"duplicate parent set for {self.names[v]}")
                table[e.parents] = e.score
            self._lookup.append(table)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def variables(self) -> range:
        return range(len(self.names))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def score(self, v: int, parent_set: Iterable[int]) -> float:
        """f(v, P); unlisted parent sets score 0."""
        return self._lookup[v].get(frozenset(parent_set), 0.0)

    @cached_property
    def _potential(self) -> tuple[tuple[frozenset[int], ...], ...]:
        out = []
        for v in self.variables:
            sets = [e.parents for e in self.entries[v] if e.score > 0]
            if EMPTY not in sets:
                sets.insert(0, EMPTY)
            out.append(tuple(sets))
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalScoreFunction):
            return NotImplemented
        return self.names == other.names and self.entries == other.entries

    def __repr__(self) -> str:
        return f"LocalScoreFunction(n={self.n}, entries={sum(map(len, self.entries))})"


def potential_parent_sets(f: LocalScoreFunction, v: int) -> tuple[frozenset[int], ...]:
    if not 0 <= v < f.n:
        raise KeyError(f"unknown variable {v}")
    return f._potential[v]


def delta_f(f: LocalScoreFunction) -> int:
    return max((len(ps) for ps in f._potential), default=1)


def build_super_structure(f: LocalScoreFunction) -> UndirectedGraph:
    edges = set()
    for v in f.variables:
        for ps in f._potential[v]:
            for u in ps:
                edges.add((min(u, v), max(u, v)))
    return UndirectedGraph(f.variables, edges)


def _check_vertices(f: LocalScoreFunction, dag: Dag) -> None:
    if sorted(dag.vertices) != list(f.variables):
        raise ValueError("DAG vertex set does not match the score function's variables")


def score_dag(f: LocalScoreFunction, dag: Dag) -> float:
    _check_vertices(f, dag)
    pm = dag.parent_map()
    return math.fsum(f.score(v, pm[v]) for v in f.variables)


def is_strictly_admissible(f: LocalScoreFunction, dag: Dag) -> bool:
    _check_vertices(f, dag)
    pm = dag.parent_map()
    return all(pm[v] in f._potential[v] for v in f.variables)


def strip_to_admissible(f: LocalScoreFunction, dag: Dag) -> Dag:
    """Drop every incoming arc of a vertex whose nonempty parent set scores 0."""
    _check_vertices(f, dag)
    pm = dag.parent_map()
    for v in f.variables:
        if pm[v] and f.score(v, pm[v]) <= 0:
            pm[v] = EMPTY
    return Dag.from_parents(dag.vertices, pm)


# --- score file format ---


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if line:
            yield lineno, line


def parse_scores(text: str, allow_negative: bool = False) -> LocalScoreFunction:
    lines = list(_tokens(text))
    if not lines:
        raise ScoreFileError(None, "empty score file")
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise ScoreFileError(lines[-1][0], "unexpected end of file (count mismatch)")
        item = lines[pos]
        pos += 1
        return item

    lineno, toks = take()
    if len(toks) != 1 or not toks[0].isdigit():
        raise ScoreFileError(lineno, "header must be the number of variables")
    nvars = int(toks[0])

    raw: list[tuple[str, list[tuple[int, float, list[str]]]]] = []
    for _ in range(nvars):
        lineno, toks = take()
        if len(toks) != 2 or not toks[1].isdigit() or not NAME_RE.match(toks[0]):
            raise ScoreFileError(lineno, "malformed variable header, expected '<name> <K>'")
        name, k = toks[0], int(toks[1])
        rows = []
        for _ in range(k):
            lineno, toks = take()
            try:
                score = float(toks[0])
                count = int(toks[1])
            except (ValueError, IndexError):
                raise ScoreFileError(lineno, "malformed entry, expected '<score> <p> <names...>'") from None
            if count != len(toks) - 2:
                raise ScoreFileError(lineno, f"parent count {count} does not match {len(toks) - 2} names")
            if score != score or score in (float("inf"), float("-inf")):
                raise ScoreFileError(lineno, "score must be finite")
            if score < 0 and not allow_negative:
                raise ScoreFileError(lineno, f"negative score {toks[0]}")
            rows.append((lineno, score, toks[2:]))
        raw.append((name, rows))
    if pos != len(lines):
        raise ScoreFileError(lines[pos][0], f"trailing content after {nvars} variables (count mismatch)")

    ids: dict[str, int] = {}
    for i, (name, _) in enumerate(raw):
        if name in ids:
            raise ScoreFileError(None, f"duplicate variable {name!r}")
        ids[name] = i

    entries = []
    for v, (name, rows) in enumerate(raw):
        seen: set[frozenset[int]] = set()
        ents = []
        for lineno, score, pnames in rows:
            pset = set()
            for p in pnames:
                if p not in ids:
                    raise ScoreFileError(lineno, f"unknown parent {p!r}")
                if ids[p] == v:
                    raise ScoreFileError(lineno, f"{name} listed as its own parent")
                if ids[p] in pset:
                    raise ScoreFileError(lineno, f"parent {p!r} repeated")
                pset.add(ids[p])
            fs = frozenset(pset)
            if fs in seen:
                raise ScoreFileError(lineno, f"duplicate parent set for {name}")
            seen.add(fs)
            ents.append(ParentSetEntry(fs, score))
        entries.append(ents)
    return LocalScoreFunction([name for name, _ in raw], entries, allow_negative=allow_negative)


def _fmt_score(x: float) -> str:
    return repr(float(x))


def format_scores(f: LocalScoreFunction) -> str:
    out = [f"{f.n}\n"]
    for v in f.variables:
        out.append(f"{f.names[v]} {len(f.entries[v])}\n")
        for e in f.entries[v]:
            pnames = [f.names[u] for u in sorted(e.parents)]
            out.append(" ".join([_fmt_score(e.score), str(len(pnames)), *pnames]) + "\n")
    return "".join(out)


def normalize(f: LocalScoreFunction, floor: float = 1.0) -> LocalScoreFunction:
    """Shift each variable's listed scores so their minimum becomes ``floor``.

    Every listed set stays potential.  Each variable contributes exactly one
    term to a DAG's score, so the optimal DAGs among listed choices do not
    change.  An unlisted empty set keeps score 0 and falls below every listed
    set.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    entries = []
    for v in f.variables:
        ents = f.entries[v]
        if not ents:
            entries.append(())
            continue
        shift = floor - min(e.score for e in ents)
        entries.append([ParentSetEntry(e.parents, e.score + shift) for e in ents])
    return LocalScoreFunction(f.names, entries)
