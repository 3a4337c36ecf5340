"""Out-splitting and relation-checked generator maps between graph algebras."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .algebra import Element, in_diagonal
from .errors import ParseError, UsageError
from .graph import IDENT, Graph, Path
from .scalars import EXACT


@dataclass(frozen=True)
class OutSplitPartition:
    """For each vertex, an ordered list of disjoint non-empty edge classes covering ``s^{-1}(v)``.

    Vertices not listed get a single class (no split).
    """

    graph: Graph
    classes: dict = field(hash=False)

    def __post_init__(self):
        g = self.graph
        full = {}
        for v in g.vertices:
            out = set(g.out_edges[v])
            cls = self.classes.get(v)
            if cls is None:
                full[v] = [tuple(g.out_edges[v])] if out else []
                continue
            cls = [tuple(c) for c in cls]
            seen: list[str] = [e for c in cls for e in c]
            if any(not c for c in cls):
                raise UsageError(f"empty class in the partition of {v}")
            if len(seen) != len(set(seen)):
                raise UsageError(f"classes at {v} are not disjoint")
            if set(seen) != out:
                raise UsageError(f"classes at {v} do not cover s^-1({v})")
            full[v] = cls
        for v in self.classes:
            if v not in g.index:
                raise UsageError(f"partition mentions unknown vertex {v}")
        object.__setattr__(self, "classes", full)

    def m(self, v: str) -> int:
        return max(1, len(self.classes[v]))

    def class_of(self, e: str) -> int:
        v = self.graph.source(e)
        for i, c in enumerate(self.classes[v], 1):
            if e in c:
                return i
        raise KeyError(e)

    def vertex_name(self, v: str, i: int) -> str:
        return f"{v}^{i}" if self.m(v) > 1 else v

    def edge_name(self, e: str, j: int) -> str:
        return f"{e}^{j}" if self.m(self.graph.range(e)) > 1 else e

    def to_text(self) -> str:
        lines = []
        for v, cls in self.classes.items():
            if len(cls) > 1:
                lines.append(f"split {v} : " + " | ".join("{" + ",".join(c) + "}" for c in cls))
        return "\n".join(lines) + ("\n" if lines else "")


def out_split(g: Graph, part: OutSplitPartition) -> Graph:
    """Vertices ``v^i``; edges ``e^j`` (``1 <= j <= m(r(e))``) with ``s(e^j) = s(e)^i`` for ``e`` in class ``i``."""
    if part.graph != g:
        raise UsageError("partition belongs to another graph")
    vertices = [part.vertex_name(v, i) for v in g.vertices for i in range(1, part.m(v) + 1)]
    edges = []
    for e, (s, r) in g.edges.items():
        i = part.class_of(e)
        for j in range(1, part.m(r) + 1):
            edges.append((part.edge_name(e, j), part.vertex_name(s, i), part.vertex_name(r, j)))
    try:
        return Graph.from_edges(vertices, edges, name=f"{g.name}'")
    except UsageError as exc:
        raise UsageError(f"out-split produced clashing ids: {exc}") from exc


def random_partition(g: Graph, rng: random.Random) -> OutSplitPartition:
    classes = {}
    for v in g.vertices:
        out = list(g.out_edges[v])
        if not out:
            continue
        rng.shuffle(out)
        m = rng.randint(1, len(out))
        labels = list(range(m)) + [rng.randrange(m) for _ in range(len(out) - m)]
        rng.shuffle(labels)
        cls = [sorted(e for e, lab in zip(out, labels) if lab == c) for c in range(m)]
        classes[v] = cls
    return OutSplitPartition(g, classes)


@dataclass
class GeneratorMap:
    """Images of the generators ``P_v``, ``S_e`` of ``source`` inside the algebra of ``target``."""

    source: Graph
    target: Graph
    vertex_images: dict[str, Element]
    edge_images: dict[str, Element]
    name: str = "phi"
    verified: bool = False

    def __post_init__(self):
        missing = [v for v in self.source.vertices if v not in self.vertex_images]
        missing += [e for e in self.source.edges if e not in self.edge_images]
        if missing:
            raise UsageError(f"map {self.name} has no image for {', '.join(missing)}")
        for x in list(self.vertex_images.values()) + list(self.edge_images.values()):
            if x.graph != self.target:
                raise UsageError(f"map {self.name}: image not over the target graph")

    @property
    def field(self):
        return next(iter(self.vertex_images.values())).field

    def image_of_path(self, p: Path) -> Element:
        if not p.edges:
            return self.vertex_images[p.source]
        out = self.edge_images[p.edges[0]]
        for e in p.edges[1:]:
            out = out * self.edge_images[e]
        return out

    def apply(self, x: Element) -> Element:
        if x.graph != self.source:
            raise UsageError(f"map {self.name} applied to an element over another graph")
        out = Element.zero(self.target, self.field)
        for mu, nu, c in x:
            out = out + (self.image_of_path(mu) * self.image_of_path(nu).adjoint()).scale(c)
        return out

    __call__ = apply

    def then(self, other: "GeneratorMap") -> "GeneratorMap":
        """``other`` after ``self``."""
        if other.source != self.target:
            raise UsageError("maps do not compose")
        return GeneratorMap(self.source, other.target,
                            {v: other.apply(x) for v, x in self.vertex_images.items()},
                            {e: other.apply(x) for e, x in self.edge_images.items()},
                            f"{other.name}.{self.name}")

    def fixes_generators(self) -> dict[str, bool]:
        if self.source != self.target:
            raise UsageError("only an endomap can fix generators")
        g = self.source
        res = {}
        for v, x in self.vertex_images.items():
            res[f"P({v})"] = x.equals(Element(g, [(g.vertex(v), g.vertex(v), 1)], x.field))
        for e, x in self.edge_images.items():
            res[f"S({e})"] = x.equals(Element(g, [(g.edge_path(e), g.vertex(g.range(e)), 1)], x.field))
        return res


def induced_images(g: Graph, f: Graph, part: OutSplitPartition, fld=EXACT) -> GeneratorMap:
    """``P_v -> sum_i P_{v^i}`` and ``S_e -> sum_j S_{e^j}``."""
    if out_split(g, part) != f:
        raise UsageError("target graph is not the out-split of the source by this partition")
    pv = {}
    for v in g.vertices:
        terms = [(f.vertex(part.vertex_name(v, i)), f.vertex(part.vertex_name(v, i)), 1)
                 for i in range(1, part.m(v) + 1)]
        pv[v] = Element(f, terms, fld)
    se = {}
    for e in g.edges:
        terms = []
        for j in range(1, part.m(g.range(e)) + 1):
            ej = f.edge_path(part.edge_name(e, j))
            terms.append((ej, f.vertex(ej.range), 1))
        se[e] = Element(f, terms, fld)
    return GeneratorMap(g, f, pv, se, name="split")


@dataclass
class Check:
    name: str
    passed: bool
    residue: Element | None = None

    def as_dict(self) -> dict:
        d = {"check": self.name, "passed": self.passed}
        if not self.passed and self.residue is not None:
            d["residue"] = self.residue.serialize()
        return d


@dataclass
class HomReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.as_dict() for c in self.checks]}


def verify_homomorphism(phi: GeneratorMap) -> HomReport:
    """Check the defining relations of the source on the images, inside the target."""
    src, tgt = phi.source, phi.target
    fld = phi.field
    checks: list[Check] = []
    P = phi.vertex_images
    Sx = phi.edge_images
    for v in src.vertices:
        p = P[v]
        checks.append(Check(f"P({v}) projection", (p * p - p).is_zero() and (p.adjoint() - p).is_zero(),
                            p * p - p))
    vs = src.vertices
    for i, v in enumerate(vs):
        for w in vs[i + 1:]:
            prod = P[v] * P[w]
            checks.append(Check(f"P({v}) P({w}) = 0", prod.is_zero(), prod))
    total = Element.zero(tgt, fld)
    for v in vs:
        total = total + P[v]
    resid = total - Element.identity(tgt, fld)
    checks.append(Check("sum of P(v) = 1", resid.is_zero(), resid))
    for e in src.edges:
        s = Sx[e]
        resid = s.adjoint() * s - P[src.range(e)]
        checks.append(Check(f"GA1 {e}", resid.is_zero(), resid))
    for v in vs:
        if not src.out_edges[v]:
            continue
        acc = Element.zero(tgt, fld)
        for e in src.out_edges[v]:
            acc = acc + Sx[e] * Sx[e].adjoint()
        resid = P[v] - acc
        checks.append(Check(f"GA2 {v}", resid.is_zero(), resid))
    report = HomReport(checks)
    phi.verified = report.passed
    return report


def verify_diagonal_carry(phi: GeneratorMap, k: int) -> bool:
    """Every ``P_mu`` with ``|mu| <= k`` maps into the target diagonal."""
    if not phi.verified and not verify_homomorphism(phi).passed:
        raise UsageError(f"map {phi.name} does not preserve the relations")
    return not diagonal_carry_failures(phi, k)


def diagonal_carry_failures(phi: GeneratorMap, k: int) -> list[str]:
    bad = []
    for n in range(k + 1):
        for mu in phi.source.paths_of_length(n):
            img = phi.image_of_path(mu)
            if not in_diagonal(img * img.adjoint()):
                bad.append(mu.label())
    return bad


def block_structure_report(g: Graph) -> list[tuple[str, str, int]]:
    """``(v, w, A(v, w))`` for all non-empty blocks of ``B``; ``U(B)`` is the product of ``U(A(v, w))``."""
    out = []
    for v in g.vertices:
        for w in g.vertices:
            n = len(g.edges_between(v, w))
            if n:
                out.append((v, w, n))
    return out


def unitary_group_label(g: Graph) -> str:
    return " x ".join(f"U({n})" for _, _, n in block_structure_report(g))


_SPLIT_RE = re.compile(rf"split\s+({IDENT})\s*:\s*(.+)\Z")
_CLASS_RE = re.compile(r"\{([^{}]*)\}\Z")


def parse_partition_text(text: str, g: Graph, source: str | None = None) -> OutSplitPartition:
    """Lines ``split <vertex> : {e1,e2} | {e3}``; ``#`` comments."""
    classes: dict[str, list[list[str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SPLIT_RE.match(line)
        if not m:
            raise ParseError(f"syntax error: {line!r}", lineno, source=source)
        v = m.group(1)
        if v in classes:
            raise ParseError(f"vertex {v} split twice", lineno, source=source)
        cls = []
        for chunk in m.group(2).split("|"):
            cm = _CLASS_RE.match(chunk.strip())
            if not cm:
                raise ParseError(f"malformed class {chunk.strip()!r}", lineno, source=source)
            cls.append([e.strip() for e in cm.group(1).split(",") if e.strip()])
        classes[v] = cls
    try:
        return OutSplitPartition(g, classes)
    except UsageError as exc:
        raise ParseError(str(exc), source=source) from exc
