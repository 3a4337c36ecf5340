"""Randomized law checks: ring axioms, structure maps and quasi-free endomorphisms.

Used by the ``verify-laws`` script statement and by the test suite.
"""

from __future__ import annotations

import random

from .algebra import Element
from .endo import QuasiFree, random_block_unitary
from .graph import Graph, Path
from .scalars import EXACT
from .structure import degree_component, expect_core, expect_core_level, expect_diagonal, shift


def random_scalar(rng: random.Random, fld=EXACT):
    return fld.make(rng.randint(-3, 3), rng.randint(-2, 2))


def _paths_by_range(g: Graph, max_len: int) -> dict[str, list[Path]]:
    out: dict[str, list[Path]] = {v: [] for v in g.vertices}
    for n in range(max_len + 1):
        for p in g.paths_of_length(n):
            out[p.range].append(p)
    return out


def random_element(g: Graph, rng: random.Random, max_len: int = 2, n_terms: int = 3, fld=EXACT) -> Element:
    """Random combination of ``S_mu S_nu^*`` with ``r(mu) = r(nu)`` and ``|mu|, |nu| <= max_len``."""
    pool = _paths_by_range(g, max_len)
    terms = []
    for _ in range(n_terms):
        v = rng.choice(g.vertices)
        terms.append((rng.choice(pool[v]), rng.choice(pool[v]), random_scalar(rng, fld)))
    return Element(g, terms, fld)


def random_core_element(g: Graph, rng: random.Random, k: int, n_terms: int = 3, fld=EXACT) -> Element:
    """Random element of ``F^k``: degree-zero terms with ``|mu| = |nu| <= k``."""
    terms = []
    for _ in range(n_terms):
        n = rng.randint(0, k)
        v = rng.choice(g.vertices)
        ps = g.paths_of_length(n, range=v)
        if ps:
            terms.append((rng.choice(ps), rng.choice(ps), random_scalar(rng, fld)))
    return Element(g, terms, fld)


def random_diagonal_element(g: Graph, rng: random.Random, k: int = 2, n_terms: int = 3, fld=EXACT) -> Element:
    terms = []
    for _ in range(n_terms):
        p = rng.choice(g.paths_of_length(rng.randint(0, k)))
        terms.append((p, p, random_scalar(rng, fld)))
    return Element(g, terms, fld)


def random_B_element(g: Graph, rng: random.Random, fld=EXACT) -> Element:
    """Random element of ``B``: ``S_e S_f^*`` with ``s(e) = s(f)`` and ``r(e) = r(f)``."""
    terms = []
    for v in g.vertices:
        for w in g.vertices:
            es = g.edges_between(v, w)
            for e in es:
                for f in es:
                    if rng.random() < 0.5:
                        terms.append((g.edge_path(e), g.edge_path(f), random_scalar(rng, fld)))
    return Element(g, terms, fld)


def generators(g: Graph, fld=EXACT) -> dict[str, Element]:
    out = {}
    for v in g.vertices:
        out[f"P({v})"] = Element(g, [(g.vertex(v), g.vertex(v), 1)], fld)
    for e in g.edges:
        out[f"S({e})"] = Element(g, [(g.edge_path(e), g.vertex(g.range(e)), 1)], fld)
    return out


def _law(name: str, trials: int, ok: bool) -> dict:
    return {"law": name, "trials": trials, "passed": ok}


def check_ring_axioms(g: Graph, rng: random.Random, trials: int) -> list[dict]:
    assoc = distrib = star = True
    one = Element.identity(g)
    unit = True
    for _ in range(trials):
        x, y, z = (random_element(g, rng) for _ in range(3))
        assoc &= ((x * y) * z).equals(x * (y * z))
        distrib &= (x * (y + z)).equals(x * y + x * z) and ((x + y) * z).equals(x * z + y * z)
        star &= (x * y).adjoint().equals(y.adjoint() * x.adjoint()) and x.adjoint().adjoint().equals(x)
        unit &= (one * x).equals(x) and (x * one).equals(x)
    return [_law("associativity", trials, assoc), _law("distributivity", trials, distrib),
            _law("adjoint anti-multiplicative", trials, star), _law("unit", trials, unit)]


def check_structure_maps(g: Graph, rng: random.Random, trials: int, max_k: int = 3) -> list[dict]:
    idem = bimod = unit = True
    one = Element.identity(g)
    for _ in range(trials):
        x = random_element(g, rng)
        for phi, sub in ((expect_core, lambda: random_core_element(g, rng, 2)),
                         (expect_diagonal, lambda: random_diagonal_element(g, rng))):
            idem &= phi(phi(x)).equals(phi(x))
            a, b = sub(), sub()
            bimod &= phi(a * x * b).equals(a * phi(x) * b)
        for k in range(max_k + 1):
            y = expect_core_level(x, k)
            idem &= expect_core_level(y, k).equals(y)
            a, b = random_core_element(g, rng, k), random_core_element(g, rng, k)
            bimod &= expect_core_level(a * x * b, k).equals(a * y * b)
            unit &= expect_core_level(one, k).equals(one)
        for m in (-1, 0, 1):
            d = degree_component(x, m)
            idem &= degree_component(d, m).equals(d)
    return [_law("expectations idempotent", trials, idem), _law("expectations bimodule", trials, bimod),
            _law("expectations unital", trials, unit)]


def check_shift_laws(g: Graph, rng: random.Random, trials: int) -> list[dict]:
    mult = commute = True
    for _ in range(trials):
        x, y = random_B_element(g, rng), random_B_element(g, rng)
        mult &= shift(x * y).equals(shift(x) * shift(y))
        u = random_block_unitary(g, rng).to_element()
        su = shift(u)
        for e in g.edges:
            s_e = Element(g, [(g.edge_path(e), g.vertex(g.range(e)), 1)])
            commute &= (s_e * u).equals(su * s_e)
    return [_law("shift multiplicative on B", trials, mult), _law("S_e u = shift(u) S_e", trials, commute)]


def check_group_law(g: Graph, rng: random.Random, trials: int) -> list[dict]:
    comp = inv = True
    gens = generators(g)
    for _ in range(trials):
        u, w = random_block_unitary(g, rng), random_block_unitary(g, rng)
        lu, lw, luw = QuasiFree(u), QuasiFree(w), QuasiFree(u @ w)
        lus = QuasiFree(u.adjoint())
        for x in gens.values():
            comp &= luw(x).equals(lu(lw(x)))
            inv &= lus(lu(x)).equals(x)
    return [_law("lambda_uw = lambda_u lambda_w", trials, comp), _law("lambda_u* lambda_u = id", trials, inv)]


def run_law_suite(g: Graph, trials: int, rng: random.Random | None = None) -> list[dict]:
    rng = rng or random.Random(0)
    out = []
    for check in (check_ring_axioms, check_structure_maps, check_shift_laws, check_group_law):
        out.extend(check(g, rng, trials))
    return out
