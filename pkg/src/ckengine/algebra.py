"""Normal-form arithmetic on finite spans of ``S_mu S_nu^*``.

An :class:`Element` is stored as a dict ``{(mu, nu): coefficient}`` in
normal form:

* terms are grouped by degree ``|mu| - |nu|``;
* inside one degree every ``nu`` has the same length (the *level* of that
  degree), reached by expanding with ``P_v = sum_{s(e)=v} S_e S_e^*``;
* the level is the smallest one at which the value can be written, so the
  representation of a value is unique and equality is a dict comparison.

Terms with ``r(mu) != r(nu)`` are zero and never stored.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Iterator

from .errors import UsageError
from .graph import Graph, Path
from .scalars import EXACT

Key = tuple[Path, Path]


def _key_order(key: Key):
    mu, nu = key
    return (len(mu.edges) - len(nu.edges), len(nu.edges), mu.edges, mu.source, nu.edges, nu.source)


class Element:
    __slots__ = ("graph", "field", "terms")

    def __init__(self, graph: Graph, terms: dict[Key, object] | Iterable[tuple[Path, Path, object]] = (),
                 field=EXACT, *, normal: bool = False):
        self.graph = graph
        self.field = field
        if normal:
            self.terms = terms  # type: ignore[assignment]
            return
        if not isinstance(terms, dict):
            raw: dict[Key, object] = defaultdict(lambda: field.zero)
            for mu, nu, c in terms:
                raw[(mu, nu)] += field.coerce(c)
            terms = raw
        else:
            terms = {k: field.coerce(c) for k, c in terms.items()}
        self.terms = normalize(graph, terms, field)

    # construction helpers

    @classmethod
    def zero(cls, graph: Graph, field=EXACT) -> "Element":
        return cls(graph, {}, field, normal=True)

    @classmethod
    def identity(cls, graph: Graph, field=EXACT) -> "Element":
        return cls(graph, {(graph.vertex(v), graph.vertex(v)): field.one for v in graph.vertices}, field)

    @classmethod
    def term(cls, graph: Graph, mu: Path, nu: Path, coef=1, field=EXACT) -> "Element":
        return cls(graph, [(mu, nu, coef)], field)

    def _new(self, terms) -> "Element":
        return Element(self.graph, terms, self.field)

    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            raise UsageError(f"expected an Element, got {type(other).__name__}")
        if other.graph != self.graph:
            raise UsageError("elements live over different graphs")
        if other.field is not self.field:
            raise UsageError("elements use different scalar modes")

    def _coerce(self, other) -> "Element":
        if isinstance(other, Element):
            self._check(other)
            return other
        return Element.identity(self.graph, self.field).scale(other)

    # arithmetic

    def __add__(self, other) -> "Element":
        other = self._coerce(other)
        raw = dict(self.terms)
        for k, c in other.terms.items():
            raw[k] = raw[k] + c if k in raw else c
        return self._new(raw)

    __radd__ = __add__

    def __neg__(self) -> "Element":
        return Element(self.graph, {k: -c for k, c in self.terms.items()}, self.field, normal=True)

    def __sub__(self, other) -> "Element":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Element":
        return self._coerce(other) - self

    def scale(self, c) -> "Element":
        c = self.field.coerce(c)
        if self.field.is_zero(c):
            return Element.zero(self.graph, self.field)
        return Element(self.graph, {k: c * v for k, v in self.terms.items()}, self.field,
                       normal=self.field.exact)

    def __mul__(self, other) -> "Element":
        if not isinstance(other, Element):
            return self.scale(other)
        self._check(other)
        return self._new(multiply_terms(self.terms, other.terms))

    def __rmul__(self, other) -> "Element":
        return self.scale(other)

    def __pow__(self, n: int) -> "Element":
        if n < 0:
            raise UsageError("negative powers are not supported")
        out = Element.identity(self.graph, self.field)
        for _ in range(n):
            out = out * self
        return out

    def adjoint(self) -> "Element":
        conj = self.field.conj
        return Element(self.graph, {(nu, mu): conj(c) for (mu, nu), c in self.terms.items()}, self.field)

    @property
    def star(self) -> "Element":
        return self.adjoint()

    # comparisons

    def is_zero(self) -> bool:
        return not self.terms

    def equals(self, other) -> bool:
        other = self._coerce(other)
        if self.field.exact:
            return self.terms == other.terms
        return (self - other).is_zero()

    def __eq__(self, other) -> bool:  # type: ignore[override]
        if not isinstance(other, Element):
            try:
                other = self._coerce(other)
            except Exception:
                return NotImplemented
        if other.graph != self.graph or other.field is not self.field:
            return False
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def __bool__(self) -> bool:
        return bool(self.terms)

    # inspection

    def __iter__(self) -> Iterator[tuple[Path, Path, object]]:
        for (mu, nu), c in self.terms.items():
            yield mu, nu, c

    def __len__(self) -> int:
        return len(self.terms)

    def degrees(self) -> list[int]:
        return sorted({len(mu.edges) - len(nu.edges) for mu, nu in self.terms})

    def levels(self) -> dict[int, int]:
        """Normal-form level (common ``|nu|``) per degree."""
        out: dict[int, int] = {}
        for mu, nu in self.terms:
            out[len(mu.edges) - len(nu.edges)] = len(nu.edges)
        return out

    def core_level(self) -> int:
        """Smallest ``k`` with ``self`` in ``F^k``; requires degree 0."""
        lv = self.levels()
        if set(lv) - {0}:
            raise UsageError("element is not in the core (has non-zero degree terms)")
        return lv.get(0, 0)

    def expanded(self, level: int) -> dict[Key, object]:
        """Terms rewritten so that every ``nu`` has length ``level``."""
        out: dict[Key, object] = {}
        for (mu, nu), c in self.terms.items():
            if len(nu.edges) > level:
                raise UsageError(f"element already needs level {len(nu.edges)} > {level}")
            for t in self.graph.tails(mu.range, level - len(nu.edges)):
                out[(mu.concat(t), nu.concat(t))] = c
        return out

    def map_coefficients(self, fn) -> "Element":
        return self._new({k: fn(c) for k, c in self.terms.items()})

    def to_field(self, field) -> "Element":
        return Element(self.graph, {k: field.coerce(c) for k, c in self.terms.items()}, field)

    # printing

    def to_grammar(self) -> str:
        """Render in the element grammar; parsing the output gives back an equal element."""
        if not self.terms:
            return "0"
        out = ""
        for (mu, nu), c in self.terms.items():
            coef = self.field.format(c)
            mono = _monomial(mu, nu)
            if coef == "1":
                part = mono
            elif coef == "-1":
                part = "-" + mono
            else:
                part = f"({coef})*{mono}"
            if not out:
                out = part
            elif part.startswith("-"):
                out += " - " + part[1:]
            else:
                out += " + " + part
        return out

    def serialize(self) -> list:
        """Term array ``[coef, mu, nu]``; a path is an edge list, a vertex is a string."""
        def p(path: Path):
            return list(path.edges) if path.edges else path.source

        return [[self.field.serialize(c), p(mu), p(nu)] for (mu, nu), c in self.terms.items()]

    def __repr__(self) -> str:
        return f"Element({self.to_grammar()})"

    __str__ = to_grammar


def _monomial(mu: Path, nu: Path) -> str:
    if not mu.edges and not nu.edges:
        return f"P({mu.source})"
    left = f"S({' '.join(mu.edges)})" if mu.edges else ""
    right = f"adj(S({' '.join(nu.edges)}))" if nu.edges else ""
    return "*".join(x for x in (left, right) if x)


def multiply_terms(xs: dict[Key, object], ys: dict[Key, object]) -> dict[Key, object]:
    """Bilinear product via the prefix rule on ``nu`` and ``alpha``."""
    # Index the right factor by source of alpha; only those can meet nu.
    by_source: dict[str, list[tuple[Path, Path, object]]] = defaultdict(list)
    for (alpha, beta), d in ys.items():
        by_source[alpha.source].append((alpha, beta, d))
    out: dict[Key, object] = {}
    for (mu, nu), c in xs.items():
        n = len(nu.edges)
        for alpha, beta, d in by_source.get(nu.source, ()):
            a = len(alpha.edges)
            if a >= n:
                if alpha.edges[:n] != nu.edges:
                    continue
                key = (Path(mu.source, alpha.range, mu.edges + alpha.edges[n:]), beta)
            else:
                if nu.edges[:a] != alpha.edges:
                    continue
                key = (mu, Path(beta.source, nu.range, beta.edges + nu.edges[a:]))
            v = c * d
            out[key] = out[key] + v if key in out else v
    return out


def normalize(graph: Graph, raw: dict[Key, object], field) -> dict[Key, object]:
    """Bring a raw term dict to normal form (see module docstring)."""
    groups: dict[int, dict[Key, object]] = defaultdict(dict)
    for (mu, nu), c in raw.items():
        if mu.range != nu.range or field.is_zero(c):
            continue
        groups[len(mu.edges) - len(nu.edges)][(mu, nu)] = c
    out: dict[Key, object] = {}
    for m in sorted(groups):
        g = groups[m]
        level = max(len(nu.edges) for _, nu in g)
        expanded: dict[Key, object] = {}
        for (mu, nu), c in g.items():
            if len(nu.edges) == level:
                key = (mu, nu)
                expanded[key] = expanded[key] + c if key in expanded else c
                continue
            for t in graph.tails(mu.range, level - len(nu.edges)):
                key = (mu.concat(t), nu.concat(t))
                expanded[key] = expanded[key] + c if key in expanded else c
        terms = {k: c for k, c in expanded.items() if not field.is_zero(c)}
        while level > 0 and terms:
            contracted = _contract(graph, terms, field)
            if contracted is None:
                break
            terms = contracted
            level -= 1
        out.update(terms)
    return dict(sorted(out.items(), key=lambda kv: _key_order(kv[0])))


def _contract(graph: Graph, terms: dict[Key, object], field) -> dict[Key, object] | None:
    """Undo one expansion step, or return None when the terms are not a full expansion."""
    parents: dict[Key, dict[str, object]] = defaultdict(dict)
    for (mu, nu), c in terms.items():
        if not mu.edges:
            return None
        e = mu.edges[-1]
        if nu.edges[-1] != e:
            return None
        v = graph.edges[e][0]
        pm = Path(mu.source, v, mu.edges[:-1])
        pn = Path(nu.source, v, nu.edges[:-1])
        parents[(pm, pn)][e] = c
    out: dict[Key, object] = {}
    for (pm, pn), children in parents.items():
        out_edges = graph.out_edges[pm.range]
        if len(children) != len(out_edges):
            return None
        first = children[out_edges[0]]
        if not all(field.eq(children[e], first) for e in out_edges[1:]):
            return None
        out[(pm, pn)] = first
    return out


# generators


def P(graph: Graph, v: str, field=EXACT) -> Element:
    p = graph.vertex(v)
    return Element(graph, {(p, p): field.one}, field)


def S(graph: Graph, edges: str | Iterable[str], field=EXACT) -> Element:
    """``S_mu`` for an edge sequence (a single id, a space-separated string, or an iterable)."""
    if isinstance(edges, str):
        edges = edges.split()
    mu = graph.path(edges)
    return Element(graph, {(mu, graph.vertex(mu.range)): field.one}, field)


def SS(graph: Graph, mu, nu, coef=1, field=EXACT) -> Element:
    """``coef * S_mu S_nu^*``; paths may be given as Path, edge strings or vertex ids."""
    return Element(graph, {(as_path(graph, mu), as_path(graph, nu)): field.coerce(coef)}, field)


def as_path(graph: Graph, p) -> Path:
    if isinstance(p, Path):
        return p
    if isinstance(p, str):
        if p in graph.index:
            return graph.vertex(p)
        return graph.path(p.split())
    return graph.path(p)


def identity(graph: Graph, field=EXACT) -> Element:
    return Element.identity(graph, field)


def add(x: Element, y: Element) -> Element:
    return x + y


def mul(x: Element, y: Element) -> Element:
    return x * y


def scale(c, x: Element) -> Element:
    return x.scale(c)


def adjoint(x: Element) -> Element:
    return x.adjoint()


def canonicalize(x: Element) -> Element:
    return Element(x.graph, dict(x.terms), x.field)


def expand_to_level(x: Element, level: int) -> dict[Key, object]:
    return x.expanded(level)


def equals(x: Element, y: Element) -> bool:
    return x.equals(y)


def is_zero(x: Element) -> bool:
    return x.is_zero()


def commutator(x: Element, y: Element) -> Element:
    return x * y - y * x


# membership


def in_degree(x: Element, m: int) -> bool:
    return all(len(mu.edges) - len(nu.edges) == m for mu, nu in x.terms)


def in_core(x: Element, k: int | None = None) -> bool:
    """``F`` (finite spans of degree 0) or ``F^k``."""
    if not in_degree(x, 0):
        return False
    return k is None or x.levels().get(0, 0) <= k


def in_diagonal(x: Element, k: int | None = None) -> bool:
    """``D`` or ``D^k``: degree 0, diagonal terms only, level at most ``k``."""
    return in_core(x, k) and all(mu == nu for mu, nu in x.terms)


def commutes_with_vertices(x: Element) -> bool:
    """Membership in the relative commutant of ``D^0`` (``s(mu) = s(nu)`` termwise)."""
    return all(mu.source == nu.source for mu, nu in x.terms)


def in_B(x: Element) -> bool:
    return in_core(x, 1) and commutes_with_vertices(x)


def membership(x: Element, tag: str) -> bool:
    """Decide membership for tags ``D``, ``D^k``, ``F``, ``F^k``, ``B``, ``UE``, ``deg^m``.

    ``UE`` tests the commutant condition only (the candidate set for unitaries
    in ``U_E``); unitarity is decided by :func:`ckengine.endo.verify_unitary`.
    """
    t = tag.replace(" ", "")
    if t == "D":
        return in_diagonal(x)
    if t == "F":
        return in_core(x)
    if t == "B":
        return in_B(x)
    if t in ("UE", "U_E"):
        return commutes_with_vertices(x)
    for prefix, fn in (("D^", in_diagonal), ("F^", in_core), ("deg^", in_degree), ("deg", in_degree)):
        if t.startswith(prefix):
            try:
                n = int(t[len(prefix):])
            except ValueError:
                break
            return fn(x, n)
    if t[:1] in ("D", "F") and t[1:].isdigit():
        return (in_diagonal if t[0] == "D" else in_core)(x, int(t[1:]))
    raise UsageError(f"unknown membership tag {tag!r}")
