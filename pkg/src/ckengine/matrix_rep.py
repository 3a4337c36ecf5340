"""Block-matrix representation of ``F^k``, operator norms and the distance delta."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .algebra import Element, in_core, in_diagonal
from .endo import BlockUnitary
from .errors import UsageError
from .graph import Graph, Path

MAX_DELTA_OUT_DEGREE = 20


def block_index(graph: Graph, k: int) -> dict[str, list[Path]]:
    """Length-``k`` paths grouped by range vertex, lexicographic within each block."""
    return {v: graph.paths_of_length(k, range=v) for v in graph.vertices}


@dataclass
class BlockMatrixRep:
    """One square matrix per vertex ``v``, indexed by the length-``k`` paths ending at ``v``."""

    graph: Graph
    level: int
    blocks: dict[str, np.ndarray]
    index: dict[str, list[Path]] = field(repr=False)
    exact: bool = True

    def sizes(self) -> dict[str, int]:
        return {v: m.shape[0] for v, m in self.blocks.items()}

    def to_complex(self) -> dict[str, np.ndarray]:
        if not self.exact:
            return self.blocks
        return {v: _to_complex(m) for v, m in self.blocks.items()}

    def matmul(self, other: "BlockMatrixRep") -> "BlockMatrixRep":
        return BlockMatrixRep(self.graph, self.level, {v: m.dot(other.blocks[v]) for v, m in self.blocks.items()},
                              self.index, self.exact)

    def adjoint(self) -> "BlockMatrixRep":
        if self.exact:
            conj = np.vectorize(lambda c: type(c)(c.x, -c.y), otypes=[object])
            blocks = {v: conj(m).T if m.size else m.T for v, m in self.blocks.items()}
        else:
            blocks = {v: m.conj().T for v, m in self.blocks.items()}
        return BlockMatrixRep(self.graph, self.level, blocks, self.index, self.exact)

    def equals(self, other: "BlockMatrixRep", tol: float = 1e-9) -> bool:
        if self.sizes() != other.sizes():
            return False
        for v, m in self.blocks.items():
            o = other.blocks[v]
            if self.exact and other.exact:
                if not all(a == b for a, b in zip(m.flat, o.flat)):
                    return False
            elif np.abs(_to_complex(m) - _to_complex(o)).max(initial=0.0) > tol:
                return False
        return True

    def is_zero(self, tol: float = 1e-9) -> bool:
        if self.exact:
            return all(not c for m in self.blocks.values() for c in m.flat)
        return all(np.abs(m).max(initial=0.0) <= tol for m in self.blocks.values())

    def to_json(self, fmt) -> dict:
        return {
            "level": self.level,
            "blocks": {
                v: {"paths": [p.label() for p in self.index[v]],
                    "matrix": [[fmt(c) for c in row] for row in m.tolist()]}
                for v, m in self.blocks.items()
            },
        }


def _to_complex(m: np.ndarray) -> np.ndarray:
    if m.dtype != object:
        return m.astype(complex)
    out = np.zeros(m.shape, dtype=complex)
    for idx, c in np.ndenumerate(m):
        out[idx] = complex(float(c.x), float(c.y)) if hasattr(c, "x") else complex(c)
    return out


def represent(x: Element, k: int) -> BlockMatrixRep:
    """``S_mu S_nu^*`` maps to the ``(mu, nu)`` matrix unit in block ``r(mu)``."""
    if not in_core(x, k):
        raise UsageError(f"element is not in F^{k}")
    g, fld = x.graph, x.field
    index = block_index(g, k)
    pos = {v: {p: i for i, p in enumerate(ps)} for v, ps in index.items()}
    blocks = {}
    for v, ps in index.items():
        n = len(ps)
        if fld.exact:
            blocks[v] = np.full((n, n), fld.zero, dtype=object)
        else:
            blocks[v] = np.zeros((n, n), dtype=complex)
    for (mu, nu), c in x.expanded(k).items():
        v = mu.range
        blocks[v][pos[v][mu], pos[v][nu]] = c
    return BlockMatrixRep(g, k, blocks, index, fld.exact)


def operator_norm(x: Element, k: int | None = None) -> float:
    """Largest singular value over the blocks of the level-``k`` representation."""
    if k is None:
        k = x.core_level()
    rep = represent(x, k)
    norms = [np.linalg.norm(m, 2) if m.size else 0.0 for m in rep.to_complex().values()]
    return float(max(norms, default=0.0))


def central_projection_Q(graph: Graph, v: str, w: str, fld=None) -> Element:
    from .scalars import EXACT

    fld = fld or EXACT
    es = graph.edges_between(v, w)
    if not es:
        warnings.warn(f"A({v},{w}) = 0; Q is zero", stacklevel=2)
    return Element(graph, [(graph.edge_path(e), graph.edge_path(e), 1) for e in es], fld)


def _is_projection(p: Element) -> bool:
    return (p * p).equals(p) and p.adjoint().equals(p)


def diagonal_projections(graph: Graph, v: str, fld) -> list[tuple[tuple[str, ...], Element]]:
    """All projections of ``D^1 P_v``: sums of ``S_e S_e^*`` over subsets of ``s^{-1}(v)``."""
    out_e = graph.out_edges[v]
    if len(out_e) > MAX_DELTA_OUT_DEGREE:
        raise UsageError(f"out-degree {len(out_e)} at {v} exceeds the enumeration guard")
    res = []
    for r in range(len(out_e) + 1):
        for subset in itertools.combinations(out_e, r):
            q = Element(graph, [(graph.edge_path(e), graph.edge_path(e), 1) for e in subset], fld)
            res.append((subset, q))
    return res


def compute_delta(u: BlockUnitary | Element, p: Element, v: str) -> float:
    """``min_q ||u p u^* - q||`` over the diagonal projections ``q`` of ``D^1 P_v``."""
    ue = u.to_element() if isinstance(u, BlockUnitary) else u
    g, fld = p.graph, p.field
    if ue.graph != g or ue.field is not fld:
        raise UsageError("unitary and projection live over different graphs or modes")
    pv = Element(g, [(g.vertex(v), g.vertex(v), 1)], fld)
    if not (in_diagonal(p, 1) and _is_projection(p) and (pv * p).equals(p)):
        raise UsageError(f"p is not a projection in D^1 P_{v}")
    conj = ue * p * ue.adjoint()
    return min(operator_norm(conj - q, 1) for _, q in diagonal_projections(g, v, fld))


def conjugate_in_diagonal(u: BlockUnitary | Element, p: Element) -> bool:
    """Exact companion of :func:`compute_delta`: is ``u p u^*`` in ``D^1``?"""
    ue = u.to_element() if isinstance(u, BlockUnitary) else u
    return in_diagonal(ue * p * ue.adjoint(), 1)
