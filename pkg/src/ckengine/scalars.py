"""Coefficient fields.

Two modes are supported.  ``EXACT`` uses Gaussian rationals (``sympy``'s
``QQ_I`` domain, backed by gmpy2 when available) and compares exactly.
``FLOAT`` uses Python complex numbers and compares with an absolute
tolerance of ``1e-9``.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from numbers import Rational

from sympy.polys.domains import QQ, QQ_I

FLOAT_TOL = 1e-9


class ScalarError(ValueError):
    pass


def _fmt_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class ExactField:
    name = "exact"
    exact = True
    tol = 0.0

    def __init__(self):
        self.zero = QQ_I.zero
        self.one = QQ_I.one
        self.i = QQ_I(0, 1)

    def make(self, re, im=0):
        return QQ_I(self._rational(re), self._rational(im))

    @staticmethod
    def _rational(x):
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, (int, Rational)):
            return QQ(int(x.numerator), int(x.denominator)) if not isinstance(x, int) else QQ(x)
        if type(x).__name__ == "mpq":
            return x
        if isinstance(x, float):
            if x.is_integer():
                return QQ(int(x))
            raise ScalarError(f"inexact value {x!r} in exact mode")
        raise ScalarError(f"cannot use {x!r} as an exact rational")

    def coerce(self, c):
        if isinstance(c, type(QQ_I.one)):
            return c
        if isinstance(c, complex):
            return self.make(c.real, c.imag)
        return self.make(c, 0)

    def is_zero(self, c) -> bool:
        return not c

    def eq(self, a, b) -> bool:
        return a == b

    def conj(self, c):
        return QQ_I(c.x, -c.y)

    def abs2(self, c):
        return c.x * c.x + c.y * c.y

    def is_unimodular(self, c) -> bool:
        return self.abs2(c) == 1

    def to_complex(self, c) -> complex:
        return complex(float(c.x), float(c.y))

    def format(self, c) -> str:
        return render_complex(Fraction(int(c.x.numerator), int(c.x.denominator)),
                              Fraction(int(c.y.numerator), int(c.y.denominator)), _fmt_rational)

    def sqrt(self, c):
        raise ScalarError("sqrt is not available in exact mode; use --mode float")

    def div(self, a, b):
        if not b:
            raise ScalarError("division by zero")
        return a / b

    def serialize(self, c):
        return self.format(c)


class FloatField:
    name = "float"
    exact = False

    def __init__(self, tol: float = FLOAT_TOL):
        self.tol = tol
        self.zero = 0j
        self.one = 1 + 0j
        self.i = 1j

    def make(self, re, im=0):
        return complex(float(re), float(im))

    def coerce(self, c):
        if isinstance(c, type(QQ_I.one)):
            return complex(float(c.x), float(c.y))
        if type(c).__name__ == "mpq":
            return complex(float(c))
        return complex(c)

    def is_zero(self, c) -> bool:
        return abs(c) <= self.tol

    def eq(self, a, b) -> bool:
        return abs(a - b) <= self.tol

    def conj(self, c):
        return c.conjugate()

    def abs2(self, c):
        return abs(c) ** 2

    def is_unimodular(self, c) -> bool:
        return abs(abs(c) - 1.0) <= self.tol

    def to_complex(self, c) -> complex:
        return complex(c)

    def format(self, c) -> str:
        return render_complex(c.real, c.imag, repr)

    def sqrt(self, c):
        return cmath.sqrt(c)

    def div(self, a, b):
        if b == 0:
            raise ScalarError("division by zero")
        return a / b

    def serialize(self, c):
        return self.format(c)


def render_complex(re, im, fmt) -> str:
    """Render ``re + im i`` in the literal grammar accepted by the parser."""
    if im == 0:
        return fmt(re)
    mag = fmt(abs(im))
    imag = "i" if mag == "1" else f"{mag} i"
    if re == 0:
        return "-" + imag if im < 0 else imag
    return f"{fmt(re)}{'-' if im < 0 else '+'}{imag}"


EXACT = ExactField()
FLOAT = FloatField()


def field_for(mode: str):
    if mode == "exact":
        return EXACT
    if mode == "float":
        return FLOAT
    raise ScalarError(f"unknown scalar mode {mode!r}")


def unit_circle_point(a: int, b: int):
    """Exact point ((a^2-b^2) + 2ab i)/(a^2+b^2) on the unit circle."""
    n = a * a + b * b
    if n == 0:
        raise ScalarError("degenerate parameters")
    return QQ_I(QQ(a * a - b * b, n), QQ(2 * a * b, n))


def is_close(x: float, y: float, tol: float = FLOAT_TOL) -> bool:
    return math.isclose(x, y, rel_tol=0.0, abs_tol=tol)
