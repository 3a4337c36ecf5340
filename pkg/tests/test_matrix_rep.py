import itertools
import math
import random
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ckengine.algebra import Element, P, SS, in_diagonal
from ckengine.endo import BlockUnitary, hypothesis_check, random_block_unitary
from ckengine.errors import UsageError
from ckengine.laws import random_core_element
from ckengine.matrix_rep import (block_index, central_projection_Q, compute_delta, conjugate_in_diagonal,
                                 diagonal_projections, operator_norm, represent)
from ckengine.scalars import EXACT, FLOAT
from ckengine.structure import expect_core_level


def hadamard(o2):
    h = 1 / math.sqrt(2)
    return BlockUnitary(o2, {("v", "v"): [[h, h], [h, -h]]}, FLOAT, "had")


def test_matrix_unit_example(o2):
    rep = represent(SS(o2, "e1", "e2"), 1)
    assert rep.to_complex()["v"].tolist() == [[0, 1], [0, 0]]


def test_identity_at_level_two(o2):
    rep = represent(Element.identity(o2), 2)
    assert np.array_equal(rep.to_complex()["v"], np.eye(4))


def test_ex41_level_two_sizes(ex41):
    assert represent(Element.identity(ex41), 2).sizes() == {"v1": 8, "v2": 5}
    a2 = np.linalg.matrix_power(ex41.adjacency_matrix(), 2)
    assert a2.tolist() == [[5, 3], [3, 2]]


@pytest.mark.parametrize("name", ["O2", "E41", "F"])
def test_bratteli_dimensions(named_graphs, name):
    g = named_graphs[name]
    a = g.adjacency_matrix()
    n = {v: 1 for v in g.vertices}
    for k in range(5):
        assert {v: len(ps) for v, ps in block_index(g, k).items()} == n
        n = {w: sum(int(a[g.index[v], g.index[w]]) * n[v] for v in g.vertices) for w in g.vertices}


def test_represent_rejects_non_core(o2):
    with pytest.raises(UsageError):
        represent(SS(o2, "e1 e2", "e1"), 2)
    with pytest.raises(UsageError):
        represent(SS(o2, "e1 e2", "e1 e1"), 1)


@given(st.data())
def test_represent_is_faithful_star_homomorphism(ex41, data):
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    k = data.draw(st.integers(0, 3))
    x, y = random_core_element(ex41, rng, k), random_core_element(ex41, rng, k)
    assert represent(x * y, k).equals(represent(x, k).matmul(represent(y, k)))
    assert represent(x.adjoint(), k).equals(represent(x, k).adjoint())
    assert represent(x, k).is_zero() == x.is_zero()
    assert represent(x - x, k).is_zero()


def test_norm_examples(o2, ex41):
    assert operator_norm(SS(o2, "e1 e2", "e2 e1"), 2) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm(SS(ex41, "a c", "b c"), 2) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm(P(o2, "v").scale(2)) == pytest.approx(2.0, abs=1e-12)
    x = SS(o2, "e1", "e1") + SS(o2, "e1", "e2") + SS(o2, "e2", "e1") + SS(o2, "e2", "e2")
    assert operator_norm(x, 1) == pytest.approx(2.0, abs=1e-9)
    assert operator_norm(x, 3) == pytest.approx(2.0, abs=1e-9)


def test_norm_is_level_independent(ex41):
    rng = random.Random(12)
    for _ in range(10):
        x = random_core_element(ex41, rng, 1)
        n1 = operator_norm(x, 1)
        assert operator_norm(x, 2) == pytest.approx(n1, abs=1e-9)
        # C*-identity
        assert operator_norm(x.adjoint() * x, 2) == pytest.approx(n1 ** 2, rel=1e-9, abs=1e-9)


def test_central_projections(o2, ex41):
    assert central_projection_Q(ex41, "v1", "v1").equals(SS(ex41, "a", "a") + SS(ex41, "b", "b"))
    total = central_projection_Q(ex41, "v1", "v1") + central_projection_Q(ex41, "v1", "v2")
    assert total.equals(P(ex41, "v1"))
    assert central_projection_Q(o2, "v", "v").equals(P(o2, "v"))
    rng = random.Random(0)
    q = central_projection_Q(ex41, "v2", "v1")
    for _ in range(5):
        b = random_block_unitary(ex41, rng).to_element()
        assert (q * b).equals(b * q)


def test_central_projection_warns_on_empty_block():
    from ckengine.graph import Graph

    g = Graph.from_edges(["x", "y"], [("p", "x", "x"), ("q", "x", "y"), ("r", "y", "x"), ("s", "y", "x")])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert central_projection_Q(g, "y", "y").is_zero()
    assert caught


def delta_oracle(u_matrix, p_matrix):
    """Brute force over the four diagonal 0/1 matrices, largest |eigenvalue| of the Hermitian difference."""
    conj = u_matrix @ p_matrix @ u_matrix.conj().T
    best = None
    for bits in itertools.product([0, 1], repeat=2):
        diff = conj - np.diag(bits)
        val = float(np.abs(np.linalg.eigvalsh(diff)).max())
        best = val if best is None else min(best, val)
    return best


def test_delta_hadamard(o2):
    u = hadamard(o2)
    p = SS(o2, "e1", "e1", 1, FLOAT)
    d = compute_delta(u, p, "v")
    h = 1 / math.sqrt(2)
    want = delta_oracle(np.array([[h, h], [h, -h]]), np.diag([1.0, 0.0]))
    assert d == pytest.approx(want, abs=1e-9)
    assert d == pytest.approx(0.7071068, abs=1e-6)


def test_delta_flip_and_zero(o2):
    flip = BlockUnitary(o2, {("v", "v"): [[0, 1], [1, 0]]})
    p = SS(o2, "e1", "e1")
    assert compute_delta(flip, p, "v") == 0.0
    assert conjugate_in_diagonal(flip, p)
    u = random_block_unitary(o2, random.Random(1), kind="generic")
    assert compute_delta(u, Element.zero(o2), "v") == 0.0


def test_delta_rejects_bad_projection(o2, ex41):
    flip = BlockUnitary(o2, {("v", "v"): [[0, 1], [1, 0]]})
    with pytest.raises(UsageError):
        compute_delta(flip, SS(o2, "e1", "e1", 2), "v")
    with pytest.raises(UsageError):
        compute_delta(flip, SS(o2, "e1", "e2"), "v")
    u = BlockUnitary.identity(ex41)
    with pytest.raises(UsageError):
        compute_delta(u, SS(ex41, "c", "c"), "v2")


def test_diagonal_projection_count(ex41):
    assert len(diagonal_projections(ex41, "v1", EXACT)) == 8
    assert len(diagonal_projections(ex41, "v2", EXACT)) == 4


@pytest.mark.parametrize("name", ["O2", "E41", "F"])
def test_delta_zero_iff_conjugate_diagonal(named_graphs, name):
    g = named_graphs[name]
    rng = random.Random(21)
    for _ in range(8):
        u = random_block_unitary(g, rng)
        found = False
        for v in g.vertices:
            for e in g.out_edges[v]:
                p = SS(g, e, e)
                d = compute_delta(u, p, v)
                exact = conjugate_in_diagonal(u, p)
                assert (d <= 1e-9) == exact
                found |= d > 1e-9
        assert found == hypothesis_check(u).holds


def test_delta_float_matches_exact_membership(o2):
    u = hadamard(o2)
    ue = u.to_element()
    p = SS(o2, "e1", "e1", 1, FLOAT)
    assert not in_diagonal(ue * p * ue.adjoint(), 1)


@pytest.mark.parametrize("name", ["O2", "E41", "F"])
@pytest.mark.parametrize("level", [2, 3])
def test_level_one_expectation_does_not_move_away(named_graphs, name, level):
    # for q in D at a deeper level, expF(q, 1) lies in D^1 and is at least as close to u p u*
    g = named_graphs[name]
    rng = random.Random(level)
    for _ in range(5):
        ue = random_block_unitary(g, rng).to_element()
        for v in g.vertices:
            e = g.out_edges[v][0]
            conj = ue * SS(g, e, e) * ue.adjoint()
            for _ in range(4):
                paths = rng.sample(g.paths_of_length(level), k=min(4, len(g.paths_of_length(level))))
                q = Element(g, [(p, p, rng.randint(-3, 3)) for p in paths])
                q1 = expect_core_level(q, 1)
                assert in_diagonal(q1, 1)
                assert operator_norm(conj - q, level) >= operator_norm(conj - q1, level) - 1e-9
