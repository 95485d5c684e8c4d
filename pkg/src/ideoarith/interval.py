"""Closed intervals with exact rational endpoints.

Arithmetic is exact (rational endpoints never lose information); ``round`` and
the root/log helpers widen outward onto a dyadic grid so that sizes stay
bounded while the enclosure property is kept.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact number, got {type(x).__name__}")


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n (n >= 0)."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    r = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def _down(x: Fraction, prec: int) -> Fraction:
    return Fraction(floor_frac(x * (1 << prec)), 1 << prec)


def _up(x: Fraction, prec: int) -> Fraction:
    return Fraction(ceil_frac(x * (1 << prec)), 1 << prec)


def root_lower(x: Fraction, k: int, prec: int) -> Fraction:
    """A lower bound for x**(1/k), x >= 0, within 2**-prec."""
    if x <= 0:
        return Fraction(0)
    scaled = floor_frac(x * (1 << (k * prec)))
    return Fraction(iroot(scaled, k), 1 << prec)


def root_upper(x: Fraction, k: int, prec: int) -> Fraction:
    if x <= 0:
        return Fraction(0)
    scaled = ceil_frac(x * (1 << (k * prec)))
    r = iroot(scaled, k)
    if r ** k != scaled:
        r += 1
    return Fraction(r, 1 << prec)


# math.log is accurate to a couple of ulps; this guard is far wider than that.
_LOG_REL_GUARD = Fraction(1, 1 << 40)
_LOG_ABS_GUARD = Fraction(1, 1 << 60)


def _log_approx(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def log_lower(x: Fraction) -> Fraction:
    v = Fraction(_log_approx(x))
    return v - abs(v) * _LOG_REL_GUARD - _LOG_ABS_GUARD


def log_upper(x: Fraction) -> Fraction:
    v = Fraction(_log_approx(x))
    return v + abs(v) * _LOG_REL_GUARD + _LOG_ABS_GUARD


class Interval:
    """A closed interval [lo, hi] of rationals."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = as_fraction(lo)
        hi = lo if hi is None else as_fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @staticmethod
    def lift(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval(x)

    @staticmethod
    def hull_of(*items) -> "Interval":
        ivs = [Interval.lift(v) for v in items]
        return Interval(min(v.lo for v in ivs), max(v.hi for v in ivs))

    # basic queries
    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = as_fraction(x)
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def intersects(self, other) -> bool:
        other = Interval.lift(other)
        return self.lo <= other.hi and other.lo <= self.hi

    def intersection(self, other) -> "Interval":
        other = Interval.lift(other)
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def hull(self, other) -> "Interval":
        return Interval.hull_of(self, other)

    def sign(self):
        """+1, -1 or 0 when certified, otherwise None."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    # certified comparisons
    def lt(self, other) -> bool:
        return self.hi < Interval.lift(other).lo

    def le(self, other) -> bool:
        return self.hi <= Interval.lift(other).lo

    def gt(self, other) -> bool:
        return self.lo > Interval.lift(other).hi

    def ge(self, other) -> bool:
        return self.lo >= Interval.lift(other).hi

    # arithmetic
    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        o = as_fraction(other)
        return Interval(self.lo + o, self.hi + o)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo - other.hi, self.hi - other.lo)
        o = as_fraction(other)
        return Interval(self.lo - o, self.hi - o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Interval):
            ps = (self.lo * other.lo, self.lo * other.hi,
                  self.hi * other.lo, self.hi * other.hi)
            return Interval(min(ps), max(ps))
        o = as_fraction(other)
        if o >= 0:
            return Interval(self.lo * o, self.hi * o)
        return Interval(self.hi * o, self.lo * o)

    __rmul__ = __mul__

    def reciprocal(self):
        if not self.excludes_zero():
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        if isinstance(other, Interval):
            return self * other.reciprocal()
        o = as_fraction(other)
        if o == 0:
            raise ZeroDivisionError("division by zero")
        return self * (1 / o)

    def __rtruediv__(self, other):
        return self.reciprocal() * as_fraction(other)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0, max(-self.lo, self.hi))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        if k == 0:
            return Interval(1)
        if k % 2 == 1 or self.lo >= 0:
            return Interval(self.lo ** k, self.hi ** k)
        if self.hi <= 0:
            return Interval(self.hi ** k, self.lo ** k)
        return Interval(0, max(self.lo ** k, self.hi ** k))

    def max_with(self, c) -> "Interval":
        c = as_fraction(c)
        return Interval(max(self.lo, c), max(self.hi, c))

    def min_with(self, c) -> "Interval":
        c = as_fraction(c)
        return Interval(min(self.lo, c), min(self.hi, c))

    # outward-rounded transcendental helpers
    def round(self, prec: int) -> "Interval":
        """Widen outward to endpoints on the 2**-prec grid."""
        return Interval(_down(self.lo, prec), _up(self.hi, prec))

    def root(self, k: int, prec: int) -> "Interval":
        if self.lo < 0:
            raise ValueError("root of an interval reaching below zero")
        return Interval(root_lower(self.lo, k, prec), root_upper(self.hi, k, prec))

    def sqrt(self, prec: int) -> "Interval":
        return self.root(2, prec)

    def log(self) -> "Interval":
        if self.lo <= 0:
            raise ValueError("log of an interval reaching zero")
        return Interval(log_lower(self.lo), log_upper(self.hi))

    def floor(self):
        """floor of every point when it is the same integer, else None."""
        a = floor_frac(self.lo)
        return a if floor_frac(self.hi) == a else None

    def to_float(self) -> float:
        return float(self.mid)

    def to_strings(self):
        return (str(self.lo), str(self.hi))

    @staticmethod
    def from_strings(pair) -> "Interval":
        return Interval(Fraction(pair[0]), Fraction(pair[1]))

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        if self.is_point():
            return f"Interval({self.lo})"
        return f"Interval({float(self.lo):.6g}, {float(self.hi):.6g})"


def ilog(x) -> Interval:
    return Interval.lift(x).log()
