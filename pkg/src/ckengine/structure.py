"""Shift, gauge action, degree components and conditional expectations."""

from __future__ import annotations

from .algebra import Element
from .errors import UsageError
from .graph import Path


def shift(x: Element) -> Element:
    """``sum_e S_e x S_e^*``, evaluated termwise: ``S_mu S_nu^* -> sum_{r(e)=s(mu)=s(nu)} S_{e mu} S_{e nu}^*``."""
    g = x.graph
    out = []
    for mu, nu, c in x:
        if mu.source != nu.source:
            continue
        for e in g.in_edges[mu.source]:
            s = g.edges[e][0]
            out.append((Path(s, mu.range, (e,) + mu.edges), Path(s, nu.range, (e,) + nu.edges), c))
    return Element(x.graph, out, x.field)


def shift_power(x: Element, k: int) -> Element:
    for _ in range(k):
        x = shift(x)
    return x


def gauge(x: Element, z) -> Element:
    """Gauge action: a degree-``m`` term is multiplied by ``z**m``."""
    f = x.field
    z = f.coerce(z)
    if not f.is_unimodular(z):
        raise UsageError(f"gauge parameter {f.format(z)} is not on the unit circle")
    zbar = f.conj(z)
    powers: dict[int, object] = {}

    def zpow(m: int):
        if m not in powers:
            base = z if m >= 0 else zbar
            p = f.one
            for _ in range(abs(m)):
                p = p * base
            powers[m] = p
        return powers[m]

    return Element(x.graph, [(mu, nu, c * zpow(len(mu.edges) - len(nu.edges))) for mu, nu, c in x], f)


def degree_component(x: Element, m: int) -> Element:
    """Projection onto the degree-``m`` spectral subspace (a filter on the normal form)."""
    terms = {(mu, nu): c for mu, nu, c in x if len(mu.edges) - len(nu.edges) == m}
    return Element(x.graph, terms, x.field, normal=True)


def expect_core(x: Element) -> Element:
    return degree_component(x, 0)


def expect_diagonal(x: Element) -> Element:
    # dropping off-diagonal terms can leave a contractible family, so renormalize
    terms = {(mu, nu): c for mu, nu, c in x if mu == nu}
    return Element(x.graph, terms, x.field)


def tail_weight(x: Element, tail: Path):
    """Markov weight of a tail path: product of ``1/outdeg(s(f))`` over its edges."""
    g = x.graph
    f = x.field
    w = f.one
    for e in tail.edges:
        w = f.div(w, f.coerce(len(g.out_edges[g.edges[e][0]])))
    return w


def expect_core_level(x: Element, k: int) -> Element:
    """Conditional expectation onto ``F^k``.

    Degree-0 terms at level ``l > k`` are split as ``S_{b a} S_{b' a'}^*`` with
    ``|b| = |b'| = k``; they map to ``[a = a'] w(a) S_b S_{b'}^*`` where ``w`` is
    the uniform Markov weight of :func:`tail_weight`.  Those weights are
    consistent under expansion, so the map is well defined on values.
    """
    if k < 0:
        raise UsageError("level must be non-negative")
    g = x.graph
    out = []
    for mu, nu, c in degree_component(x, 0):
        if len(nu.edges) <= k:
            out.append((mu, nu, c))
            continue
        b, a = g.split_path(mu, k)
        b2, a2 = g.split_path(nu, k)
        if a.edges != a2.edges or a.source != a2.source:
            continue
        out.append((b, b2, c * tail_weight(x, a)))
    return Element(g, out, x.field)
