"""Endomorphisms ``lambda_u`` and the quasi-free unitary group ``U(B)``."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .algebra import Element, commutes_with_vertices, in_B, in_core, in_diagonal
from .errors import UsageError
from .graph import Graph
from .scalars import EXACT, FLOAT, unit_circle_point
from .structure import shift

Matrix = list  # list of rows of field scalars


def _matmul(a: Matrix, b: Matrix, zero) -> Matrix:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            s = zero
            for t in range(m):
                s = s + a[i][t] * b[t][j]
            row.append(s)
        out.append(row)
    return out


def _conj_t(a: Matrix, fld) -> Matrix:
    return [[fld.conj(a[i][j]) for i in range(len(a))] for j in range(len(a[0]))]


def _eye(n: int, fld) -> Matrix:
    return [[fld.one if i == j else fld.zero for j in range(n)] for i in range(n)]


def is_unitary_matrix(a: Matrix, fld) -> bool:
    n = len(a)
    if any(len(row) != n for row in a):
        return False
    prod = _matmul(_conj_t(a, fld), a, fld.zero)
    eye = _eye(n, fld)
    if fld.exact:
        return prod == eye
    arr = np.array(prod, dtype=complex) - np.eye(n)
    return float(np.abs(arr).max(initial=0.0)) <= fld.tol


def is_monomial(a: Matrix, fld) -> bool:
    """Exactly one non-zero entry in every row and every column."""
    nz = [[not fld.is_zero(c) for c in row] for row in a]
    return all(sum(row) == 1 for row in nz) and all(sum(col) == 1 for col in zip(*nz))


@dataclass(frozen=True)
class BlockUnitary:
    """A unitary of ``B``, one square matrix per pair ``(v, w)`` with ``A(v, w) >= 1``.

    Rows and columns of block ``(v, w)`` follow ``graph.edges_between(v, w)``,
    i.e. lexicographic edge ids.  Missing blocks default to the identity.
    """

    graph: Graph
    blocks: dict = field(hash=False)
    field: object = EXACT
    name: str = "u"

    def __post_init__(self):
        g, fld = self.graph, self.field
        full = {}
        for v in g.vertices:
            for w in g.vertices:
                es = g.edges_between(v, w)
                if not es:
                    if (v, w) in self.blocks:
                        raise UsageError(f"block {v} -> {w} given but A({v},{w}) = 0")
                    continue
                mat = self.blocks.get((v, w))
                if mat is None:
                    mat = _eye(len(es), fld)
                mat = [[fld.coerce(c) for c in row] for row in mat]
                if len(mat) != len(es) or any(len(r) != len(es) for r in mat):
                    raise UsageError(f"block {v} -> {w} must be {len(es)}x{len(es)}")
                if not is_unitary_matrix(mat, fld):
                    raise UsageError(f"block {v} -> {w} is not unitary")
                full[(v, w)] = mat
        for key in self.blocks:
            if key not in full:
                raise UsageError(f"unknown block {key}")
        object.__setattr__(self, "blocks", dict(sorted(full.items())))

    @classmethod
    def identity(cls, graph: Graph, field=EXACT) -> "BlockUnitary":
        return cls(graph, {}, field, "1")

    @classmethod
    def from_element(cls, x: Element, name: str = "u") -> "BlockUnitary":
        if not in_B(x):
            raise UsageError("element is not in B")
        g, fld = x.graph, x.field
        lvl = x.expanded(1)
        blocks = {}
        for v in g.vertices:
            for w in g.vertices:
                es = g.edges_between(v, w)
                if not es:
                    continue
                blocks[(v, w)] = [[lvl.get((g.edge_path(e), g.edge_path(f)), fld.zero) for f in es] for e in es]
        return cls(g, blocks, fld, name)

    def block_edges(self, v: str, w: str) -> tuple[str, ...]:
        return self.graph.edges_between(v, w)

    def to_element(self) -> Element:
        g = self.graph
        terms = []
        for (v, w), mat in self.blocks.items():
            es = g.edges_between(v, w)
            for i, e in enumerate(es):
                for j, f in enumerate(es):
                    terms.append((g.edge_path(e), g.edge_path(f), mat[i][j]))
        return Element(g, terms, self.field)

    def adjoint(self) -> "BlockUnitary":
        return BlockUnitary(self.graph, {k: _conj_t(m, self.field) for k, m in self.blocks.items()},
                            self.field, f"{self.name}*")

    def compose(self, other: "BlockUnitary") -> "BlockUnitary":
        if other.graph != self.graph or other.field is not self.field:
            raise UsageError("block unitaries over different graphs or modes")
        return BlockUnitary(self.graph, {k: _matmul(m, other.blocks[k], self.field.zero)
                                         for k, m in self.blocks.items()},
                            self.field, f"{self.name}{other.name}")

    def __matmul__(self, other: "BlockUnitary") -> "BlockUnitary":
        return self.compose(other)

    def equals(self, other: "BlockUnitary") -> bool:
        fld = self.field
        return all(fld.eq(a, b) for k in self.blocks
                   for ra, rb in zip(self.blocks[k], other.blocks[k]) for a, b in zip(ra, rb))

    def is_identity(self) -> bool:
        return self.equals(BlockUnitary.identity(self.graph, self.field))

    def describe(self) -> dict:
        return {
            "name": self.name,
            "blocks": [
                {"source": v, "range": w, "edges": list(self.block_edges(v, w)),
                 "matrix": [[self.field.format(c) for c in row] for row in m]}
                for (v, w), m in self.blocks.items()
            ],
        }


def compose_quasifree(u: BlockUnitary, w: BlockUnitary) -> BlockUnitary:
    return u.compose(w)


@dataclass(frozen=True)
class UnitaryClass:
    in_UE: bool
    in_UB: bool
    in_UE_core: bool
    approximate: bool

    def as_dict(self) -> dict:
        return {"in_UE": self.in_UE, "in_UB": self.in_UB, "in_UE_core": self.in_UE_core,
                "approximate": self.approximate}


def verify_unitary(u: Element | BlockUnitary) -> UnitaryClass:
    """Decide ``u`` in ``U_E``, ``U(B)`` and ``U_E`` cap ``F_E`` on normal forms."""
    if isinstance(u, BlockUnitary):
        u = u.to_element()
    one = Element.identity(u.graph, u.field)
    unitary = (u.adjoint() * u).equals(one) and (u * u.adjoint()).equals(one)
    in_ue = unitary and commutes_with_vertices(u)
    return UnitaryClass(in_ue, in_ue and in_B(u), in_ue and in_core(u), not u.field.exact)


UnitaryLike = Union[BlockUnitary, Element]


class QuasiFree:
    """``lambda_u`` for a unitary ``u`` in ``U_E``, with cached cocycle chains.

    ``lambda_u(S_mu S_nu^*) = u_{|mu|} S_mu S_nu^* u_{|nu|}^*`` where
    ``u_k = u shift(u) ... shift^{k-1}(u)`` and ``u_0 = 1``.
    """

    def __init__(self, u: UnitaryLike, check: bool = True):
        self.block = u if isinstance(u, BlockUnitary) else None
        elem = u.to_element() if isinstance(u, BlockUnitary) else u
        if check and self.block is None and not verify_unitary(elem).in_UE:
            raise UsageError("lambda needs a unitary commuting with every vertex projection")
        self.u = elem
        self.graph = elem.graph
        self.field = elem.field
        self._chain = [Element.identity(self.graph, self.field), elem]
        self._shifted = [elem]  # shift^j(u)
        self._chain_adj: dict[int, Element] = {}

    def chain(self, k: int) -> Element:
        if k < 0:
            raise UsageError("chain index must be non-negative")
        while len(self._chain) <= k:
            j = len(self._chain) - 1
            while len(self._shifted) <= j:
                self._shifted.append(shift(self._shifted[-1]))
            self._chain.append(self._chain[-1] * self._shifted[j])
        return self._chain[k]

    def _chain_star(self, k: int) -> Element:
        if k not in self._chain_adj:
            self._chain_adj[k] = self.chain(k).adjoint()
        return self._chain_adj[k]

    def __call__(self, x: Element) -> Element:
        if x.graph != self.graph or x.field is not self.field:
            raise UsageError("lambda applied to an element over another graph or mode")
        groups: dict[tuple[int, int], list] = {}
        for mu, nu, c in x:
            groups.setdefault((len(mu.edges), len(nu.edges)), []).append((mu, nu, c))
        out = Element.zero(self.graph, self.field)
        for (a, b), terms in groups.items():
            mid = Element(self.graph, terms, self.field)
            out = out + self.chain(a) * mid * self._chain_star(b)
        return out

    def on_generator(self, name: str) -> Element:
        g = self.graph
        if name in g.edges:
            return self.u * Element(g, [(g.edge_path(name), g.vertex(g.range(name)), 1)], self.field)
        return Element(g, [(g.vertex(name), g.vertex(name), 1)], self.field)


def cocycle_chain(u: UnitaryLike, k: int) -> Element:
    if k < 1:
        raise UsageError("chain needs k >= 1")
    return QuasiFree(u).chain(k)


def lambda_apply(u: UnitaryLike, x: Element) -> Element:
    return QuasiFree(u)(x)


@dataclass(frozen=True)
class HypothesisResult:
    holds: bool
    vertex: str | None = None
    edges: tuple[str, ...] = ()
    witness: Element | None = None

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "witness": None if not self.holds else {
                "vertex": self.vertex, "edges": list(self.edges),
                "projection": self.witness.serialize() if self.witness is not None else None,
            },
        }


def hypothesis_check(u: BlockUnitary) -> HypothesisResult:
    """Does ``u D^1 u^*`` differ from ``D^1``?  True iff some block is not monomial.

    A witness is a range projection ``S_e S_e^*`` whose column in the block
    has at least two non-zero entries, so its conjugate is off-diagonal.
    """
    fld = u.field
    g = u.graph
    for (v, w), mat in u.blocks.items():
        if is_monomial(mat, fld):
            continue
        es = g.edges_between(v, w)
        for j, e in enumerate(es):
            if sum(not fld.is_zero(mat[i][j]) for i in range(len(es))) >= 2:
                p = Element(g, [(g.edge_path(e), g.edge_path(e), 1)], fld)
                return HypothesisResult(True, v, (e,), p)
    return HypothesisResult(False)


def hypothesis_by_conjugation(u: UnitaryLike) -> bool:
    """Independent route: conjugate every ``S_e S_e^*`` and test membership in ``D^1``.

    Since ``u D^1 u^*`` and ``D^1`` have the same dimension, they differ exactly
    when some conjugate of a spanning projection leaves ``D^1``.
    """
    elem = u.to_element() if isinstance(u, BlockUnitary) else u
    g = elem.graph
    star = elem.adjoint()
    for e in g.edges:
        p = Element(g, [(g.edge_path(e), g.edge_path(e), 1)], elem.field)
        if not in_diagonal(elem * p * star, 1):
            return True
    return False


# random generation


def _random_phase(rng: random.Random):
    a, b = rng.randint(-4, 4), rng.randint(-4, 4)
    if a == 0 and b == 0:
        a = 1
    return unit_circle_point(a, b)


def random_monomial_matrix(n: int, rng: random.Random, fld=EXACT) -> Matrix:
    perm = list(range(n))
    rng.shuffle(perm)
    out = [[fld.zero] * n for _ in range(n)]
    for i, j in enumerate(perm):
        out[i][j] = fld.coerce(_random_phase(rng))
    return out


def random_cayley_matrix(n: int, rng: random.Random, fld=EXACT) -> Matrix:
    """Exact unitary ``(I - K)(I + K)^{-1}`` for a random skew-Hermitian Gaussian-integer ``K``."""
    k = [[None] * n for _ in range(n)]
    for i in range(n):
        k[i][i] = QQ_I(0, rng.randint(-3, 3))
        for j in range(i + 1, n):
            z = QQ_I(rng.randint(-3, 3), rng.randint(-3, 3))
            k[i][j] = z
            k[j][i] = QQ_I(-z.x, z.y)
    km = DomainMatrix(k, (n, n), QQ_I)
    eye = DomainMatrix.eye(n, QQ_I)
    mat = ((eye - km) * (eye + km).inv()).to_list()
    return [[fld.coerce(c) for c in row] for row in mat]


def random_block_unitary(graph: Graph, rng: random.Random, kind: str = "mixed", fld=EXACT,
                         name: str = "u") -> BlockUnitary:
    """Random exact block unitary.

    ``kind`` is ``"monomial"`` (permutations times phases), ``"generic"``
    (Cayley transforms, non-monomial with high probability) or ``"mixed"``
    (a coin flip per block).
    """
    blocks = {}
    for v in graph.vertices:
        for w in graph.vertices:
            n = len(graph.edges_between(v, w))
            if not n:
                continue
            mode = kind if kind != "mixed" else rng.choice(["monomial", "generic"])
            if mode == "monomial":
                blocks[(v, w)] = random_monomial_matrix(n, rng, fld)
            elif mode == "generic":
                blocks[(v, w)] = random_cayley_matrix(n, rng, fld)
            else:
                raise UsageError(f"unknown kind {kind!r}")
    return BlockUnitary(graph, blocks, fld, name)


def random_float_block_unitary(graph: Graph, rng: np.random.Generator, name: str = "u") -> BlockUnitary:
    blocks = {}
    for v in graph.vertices:
        for w in graph.vertices:
            n = len(graph.edges_between(v, w))
            if not n:
                continue
            z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            q, r = np.linalg.qr(z)
            q = q * (np.diag(r) / np.abs(np.diag(r)))
            blocks[(v, w)] = q.tolist()
    return BlockUnitary(graph, blocks, FLOAT, name)
