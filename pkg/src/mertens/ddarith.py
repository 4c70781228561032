"""Error-free transformations and double-double helpers.

Used wherever a product such as ``gamma * y`` reaches 1e9..1e13 and the
phase modulo 2*pi still has to be known to ~1e-12 rad.  All functions work
elementwise on numpy arrays as well as on Python floats.
"""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from typing import Union

import numpy as np

# 2*pi as an unevaluated triple of doubles (~160 bits).
TWO_PI_HI = 6.283185307179586
TWO_PI_MID = 2.4492935982947064e-16
TWO_PI_LO = -5.989539619436679e-33

_SPLITTER = 134217729.0  # 2**27 + 1

# Multiplier used to push a computed nonnegative quantity upward by a few ulps.
ROUND_UP = 1.0 + 2.0**-50

Number = Union[float, int, str, Decimal, Fraction]


def two_sum(a, b):
    """Return (s, e) with s = fl(a + b) and a + b = s + e exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def quick_two_sum(a, b):
    """two_sum for |a| >= |b|."""
    s = a + b
    e = b - (s - a)
    return s, e


def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def two_prod(a, b):
    """Return (p, e) with p = fl(a * b) and a * b = p + e exactly (Dekker)."""
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


class DD:
    """A real number held as an unevaluated sum ``hi + lo`` of two doubles."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float, lo: float = 0.0):
        s, e = quick_two_sum(float(hi), float(lo)) if abs(hi) >= abs(lo) else two_sum(float(hi), float(lo))
        self.hi = s
        self.lo = e

    @classmethod
    def from_value(cls, value: Number | "DD") -> "DD":
        """Exact conversion of a decimal string, Decimal, Fraction, int or float."""
        if isinstance(value, DD):
            return value
        if isinstance(value, float):
            return cls(value, 0.0)
        if isinstance(value, str):
            value = Decimal(value.strip())
        q = Fraction(value)
        hi = float(q)
        lo = float(q - Fraction(hi))
        return cls(hi, lo)

    def to_fraction(self) -> Fraction:
        return Fraction(self.hi) + Fraction(self.lo)

    def __float__(self) -> float:
        return self.hi + self.lo

    def __add__(self, other):
        o = DD.from_value(other)
        s, e = two_sum(self.hi, o.hi)
        e += self.lo + o.lo
        return DD(*quick_two_sum(s, e))

    def __sub__(self, other):
        o = DD.from_value(other)
        return self + DD(-o.hi, -o.lo)

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __mul__(self, other):
        if isinstance(other, (int, float)) and not isinstance(other, bool):
            p, e = two_prod(self.hi, float(other))
            e += self.lo * float(other)
            return DD(*quick_two_sum(p, e))
        o = DD.from_value(other)
        p, e = two_prod(self.hi, o.hi)
        e += self.hi * o.lo + self.lo * o.hi
        return DD(*quick_two_sum(p, e))

    __rmul__ = __mul__
    __radd__ = __add__

    def __lt__(self, other):
        return self.to_fraction() < DD.from_value(other).to_fraction()

    def __eq__(self, other):
        try:
            return self.to_fraction() == DD.from_value(other).to_fraction()
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.hi, self.lo))

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"


def reduce_phase(gamma, y_hi, y_lo=0.0):
    """Return ``gamma * (y_hi + y_lo)`` reduced to [-pi, pi].

    ``gamma`` is taken as exact.  The absolute error of the result is a few
    ulps of pi as long as |gamma * y| < 2**52.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    ph, pl = two_prod(gamma, y_hi)
    pl = pl + gamma * y_lo
    n = np.rint(ph / TWO_PI_HI)
    qh, ql = two_prod(n, TWO_PI_HI)
    r = ph - qh  # exact: ph and qh agree in sign and lie within a factor 2
    r = r + ((pl - ql) - n * TWO_PI_MID - n * TWO_PI_LO)
    return r


def reduce_angle(x_hi, x_lo=0.0):
    """Reduce the double-double angle ``x_hi + x_lo`` to (-pi, pi]."""
    x_hi = np.asarray(x_hi, dtype=np.float64)
    n = np.rint(x_hi / TWO_PI_HI)
    qh, ql = two_prod(n, TWO_PI_HI)
    return (x_hi - qh) + ((x_lo - ql) - n * TWO_PI_MID - n * TWO_PI_LO)


def fsum(values) -> float:
    """Correctly rounded sum (Shewchuk, via math.fsum)."""
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())


def up(x: float) -> float:
    """Push a nonnegative result one rounding step upward (the rigor model)."""
    return x * ROUND_UP if x >= 0 else x / ROUND_UP


def add_up(*terms: float) -> float:
    """Sum with the result rounded toward +inf."""
    s = math.fsum(terms)
    exact = sum((Fraction(t) for t in terms), Fraction(0))
    if Fraction(s) < exact:
        s = math.nextafter(s, math.inf)
    return s
