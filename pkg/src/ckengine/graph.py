"""Finite directed multigraphs, paths and adjacency combinatorics."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ParseError, UnsupportedGraphError, UsageError

IDENT = r"[A-Za-z0-9_][A-Za-z0-9_^'.]*"
_IDENT_RE = re.compile(IDENT + r"\Z")


def is_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name))


class Path(NamedTuple):
    """A path in a graph.  Vertices are the paths with ``edges == ()``.

    Two paths can be concatenated when ``p.range == q.source``; ``p`` is a
    prefix of ``q`` when they share a source and ``q.edges`` starts with
    ``p.edges``.  Both rules treat vertices uniformly.
    """

    source: str
    range: str
    edges: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.edges)

    def is_vertex(self) -> bool:
        return not self.edges

    def concat(self, other: "Path") -> "Path":
        if self.range != other.source:
            raise UsageError(f"cannot concatenate {self.label()} and {other.label()}")
        return Path(self.source, other.range, self.edges + other.edges)

    def is_prefix_of(self, other: "Path") -> bool:
        n = len(self.edges)
        return self.source == other.source and other.edges[:n] == self.edges

    def strip_prefix(self, prefix: "Path") -> "Path":
        """Return ``t`` with ``prefix.concat(t) == self``."""
        n = len(prefix.edges)
        return Path(prefix.range, self.range, self.edges[n:])

    def label(self) -> str:
        return " ".join(self.edges) if self.edges else self.source

    def sort_key(self):
        return (len(self.edges), self.edges, self.source)


@dataclass(frozen=True)
class Graph:
    """A finite directed multigraph.

    ``edges`` maps an edge id to its ``(source, range)`` pair.  Ids are opaque
    strings; every listing produced by this class is in lexicographic order.
    """

    vertices: tuple[str, ...]
    edges: dict[str, tuple[str, str]] = field(hash=False)
    name: str = "E"

    def __post_init__(self):
        if not self.vertices:
            raise UsageError("a graph needs at least one vertex")
        vs = tuple(sorted(self.vertices))
        if len(set(vs)) != len(vs):
            raise UsageError("duplicate vertex id")
        object.__setattr__(self, "vertices", vs)
        vset = set(vs)
        for e, (s, r) in self.edges.items():
            if s not in vset or r not in vset:
                raise UsageError(f"edge {e} has an undeclared endpoint")
            if e in vset:
                raise UsageError(f"id {e} used for both a vertex and an edge")
        object.__setattr__(self, "edges", dict(sorted(self.edges.items())))

    @classmethod
    def from_edges(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, str]], name: str = "E") -> "Graph":
        edict: dict[str, tuple[str, str]] = {}
        for e, s, r in edges:
            if e in edict:
                raise UsageError(f"duplicate edge id {e}")
            edict[e] = (s, r)
        return cls(tuple(vertices), edict, name)

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.vertices, tuple(self.edges.items())))

    @cached_property
    def _tail_cache(self) -> dict:
        return {}

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def source(self, e: str) -> str:
        return self.edges[e][0]

    def range(self, e: str) -> str:
        return self.edges[e][1]

    @cached_property
    def out_edges(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e, (s, _) in self.edges.items():
            out[s].append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[str, ...]]:
        inn: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e, (_, r) in self.edges.items():
            inn[r].append(e)
        return {v: tuple(es) for v, es in inn.items()}

    def edges_between(self, v: str, w: str) -> tuple[str, ...]:
        return tuple(e for e in self.out_edges[v] if self.edges[e][1] == w)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    # paths

    def vertex(self, v: str) -> Path:
        if v not in self.index:
            raise UsageError(f"unknown vertex {v}")
        return Path(v, v, ())

    def path(self, edges: Iterable[str]) -> Path:
        """Build a path from an edge sequence, checking composability."""
        es = tuple(edges)
        if not es:
            raise UsageError("empty edge sequence; use vertex() for length-0 paths")
        for e in es:
            if e not in self.edges:
                raise UsageError(f"unknown edge {e}")
        for a, b in zip(es, es[1:]):
            if self.edges[a][1] != self.edges[b][0]:
                raise UsageError(f"edges {a} and {b} are not composable: r({a}) != s({b})")
        return Path(self.edges[es[0]][0], self.edges[es[-1]][1], es)

    def edge_path(self, e: str) -> Path:
        s, r = self.edges[e]
        return Path(s, r, (e,))

    def split_path(self, p: Path, k: int) -> tuple[Path, Path]:
        """Split ``p`` into head of length ``k`` and tail."""
        if k == 0:
            return Path(p.source, p.source, ()), p
        if k == len(p.edges):
            return p, Path(p.range, p.range, ())
        mid = self.edges[p.edges[k - 1]][1]
        return Path(p.source, mid, p.edges[:k]), Path(mid, p.range, p.edges[k:])

    def extensions(self, v: str, k: int) -> list[Path]:
        """All paths of length ``k`` with source ``v``, lexicographic."""
        paths = [Path(v, v, ())]
        for _ in range(k):
            paths = [Path(p.source, self.edges[e][1], p.edges + (e,))
                     for p in paths for e in self.out_edges[p.range]]
        return paths

    def tails(self, v: str, k: int) -> tuple[Path, ...]:
        """Like :meth:`extensions`, cached, and refusing to run into a sink.

        Every expansion used by the normal form goes through here: a sink on
        the way means the vertex projection there cannot be expanded.
        """
        key = (v, k)
        hit = self._tail_cache.get(key)
        if hit is not None:
            return hit
        paths = [Path(v, v, ())]
        for _ in range(k):
            nxt = []
            for p in paths:
                out = self.out_edges[p.range]
                if not out:
                    raise UnsupportedGraphError(
                        f"vertex {p.range} is a sink; cannot expand past it")
                nxt.extend(Path(p.source, self.edges[e][1], p.edges + (e,)) for e in out)
            paths = nxt
        res = tuple(paths)
        self._tail_cache[key] = res
        return res

    def paths_of_length(self, k: int, source: str | None = None, range: str | None = None) -> list[Path]:
        if k < 0:
            raise UsageError("path length must be non-negative")
        starts = [source] if source is not None else list(self.vertices)
        out = [p for v in starts for p in self.extensions(v, k)]
        if range is not None:
            out = [p for p in out if p.range == range]
        return sorted(out, key=lambda p: (p.edges, p.source))

    def adjacency_matrix(self) -> np.ndarray:
        n = len(self.vertices)
        a = np.zeros((n, n), dtype=np.int64)
        for s, r in self.edges.values():
            a[self.index[s], self.index[r]] += 1
        return a

    def count_paths_from(self, v: str, j: int) -> int:
        if j < 0:
            raise UsageError("path length must be non-negative")
        row = np.zeros(len(self.vertices), dtype=object)
        row[self.index[v]] = 1
        a = self.adjacency_matrix().astype(object)
        for _ in range(j):
            row = row.dot(a)
        return int(sum(row))

    def sinks(self) -> list[str]:
        return [v for v in self.vertices if not self.out_edges[v]]

    def sources(self) -> list[str]:
        return [v for v in self.vertices if not self.in_edges[v]]

    def to_text(self) -> str:
        lines = [f"vertex {v}" for v in self.vertices]
        lines += [f"edge {e} : {s} -> {r}" for e, (s, r) in self.edges.items()]
        return "\n".join(lines) + "\n"


def adjacency_matrix(g: Graph) -> np.ndarray:
    return g.adjacency_matrix()


def paths_of_length(g: Graph, k: int, source: str | None = None, range: str | None = None) -> list[Path]:
    return g.paths_of_length(k, source, range)


def count_paths_from(g: Graph, v: str, j: int) -> int:
    return g.count_paths_from(v, j)


@dataclass(frozen=True)
class StandingReport:
    transitive: bool
    all_cycles_have_exits: bool
    sinks: list[str]
    sources: list[str]

    @property
    def ok(self) -> bool:
        return self.transitive and self.all_cycles_have_exits

    def as_dict(self) -> dict:
        return {
            "transitive": self.transitive,
            "all_cycles_have_exits": self.all_cycles_have_exits,
            "sinks": self.sinks,
            "sources": self.sources,
        }


def reachability(g: Graph) -> np.ndarray:
    """Boolean matrix R with R[v, w] iff a path of non-zero length runs v -> w."""
    r = g.adjacency_matrix() > 0
    n = len(g.vertices)
    for k in range(n):
        r = r | np.outer(r[:, k], r[k, :])
    return r


def simple_vertex_cycles(g: Graph) -> list[list[str]]:
    """Simple cycles as vertex lists (loops included); parallel edges share one entry."""
    import networkx as nx

    dg = nx.DiGraph()
    dg.add_nodes_from(g.vertices)
    dg.add_edges_from(g.edges.values())
    return [list(c) for c in nx.simple_cycles(dg)]


def validate_standing_assumption(g: Graph) -> StandingReport:
    transitive = bool(reachability(g).all())
    exits = all(any(len(g.out_edges[v]) >= 2 for v in cyc) for cyc in simple_vertex_cycles(g))
    return StandingReport(transitive, exits, g.sinks(), g.sources())


_VERTEX_RE = re.compile(rf"vertex\s+({IDENT})\Z")
_EDGE_RE = re.compile(rf"edge\s+({IDENT})\s*:\s*({IDENT})\s*->\s*({IDENT})\Z")


def parse_graph_text(text: str, name: str = "E", source: str | None = None) -> Graph:
    """Parse the line-oriented graph format.

    ``vertex <id>`` and ``edge <id> : <src> -> <rng>``, one per line, with
    ``#`` comments.  Errors carry the offending line number.
    """
    vertices: list[str] = []
    seen: set[str] = set()
    edges: dict[str, tuple[str, str]] = {}
    pending: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _VERTEX_RE.match(line):
            v = m.group(1)
            if v in seen:
                raise ParseError(f"duplicate id {v!r}", lineno, source=source)
            seen.add(v)
            vertices.append(v)
        elif m := _EDGE_RE.match(line):
            e, s, r = m.groups()
            if e in seen:
                raise ParseError(f"duplicate id {e!r}", lineno, source=source)
            seen.add(e)
            pending.append((lineno, e, s, r))
        else:
            raise ParseError(f"syntax error: {line!r}", lineno, source=source)
    vset = set(vertices)
    for lineno, e, s, r in pending:
        for end in (s, r):
            if end not in vset:
                raise ParseError(f"edge {e}: undeclared vertex {end!r}", lineno, source=source)
        edges[e] = (s, r)
    if not vertices:
        raise ParseError("no vertices declared", source=source)
    return Graph(tuple(vertices), edges, name)
