from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ckengine.scalars import EXACT, FLOAT, ScalarError, field_for, render_complex, unit_circle_point

rationals = st.builds(Fraction, st.integers(-99, 99), st.integers(1, 50))


def test_render_forms():
    f = EXACT
    assert f.format(f.make(Fraction(1, 2), Fraction(-3, 4))) == "1/2-3/4 i"
    assert f.format(f.i) == "i"
    assert f.format(f.make(0, -1)) == "-i"
    assert f.format(f.make(1, 1)) == "1+i"
    assert f.format(f.zero) == "0"
    assert render_complex(2, 0, str) == "2"


def test_exact_is_exact():
    third = EXACT.make(Fraction(1, 3))
    assert third + third + third == EXACT.one
    assert EXACT.is_zero(third * 3 - 1)


@given(rationals, rationals, rationals, rationals)
def test_exact_field_matches_fraction_arithmetic(a, b, c, d):
    x, y = EXACT.make(a, b), EXACT.make(c, d)
    prod = x * y
    assert (Fraction(prod.x), Fraction(prod.y)) == (a * c - b * d, a * d + b * c)
    assert EXACT.abs2(x) == a * a + b * b
    assert EXACT.conj(EXACT.conj(x)) == x
    if c or d:
        assert EXACT.div(x, y) * y == x


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_unit_circle_points(a, b):
    if a == 0 and b == 0:
        return
    z = unit_circle_point(a, b)
    assert EXACT.is_unimodular(z)


def test_exact_sqrt_refused():
    with pytest.raises(ScalarError):
        EXACT.sqrt(EXACT.make(2))
    with pytest.raises(ScalarError):
        EXACT.div(EXACT.one, EXACT.zero)


def test_float_tolerance():
    assert FLOAT.is_zero(1e-12)
    assert not FLOAT.is_zero(1e-6)
    assert FLOAT.eq(0.1 + 0.2, 0.3)
    assert FLOAT.sqrt(2) == pytest.approx(2 ** 0.5)


def test_field_for():
    assert field_for("exact") is EXACT and field_for("float") is FLOAT
    with pytest.raises(ValueError):
        field_for("fast")
