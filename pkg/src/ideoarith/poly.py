"""Integer polynomials, integer rational maps, and their text grammar."""
from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import MalformedSpec, ZeroPolynomial
from .interval import Interval


def _trim(coeffs: Iterable[int]) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class IntPoly:
    """Polynomial with integer coefficients, stored low degree first.

    The zero polynomial is the empty coefficient tuple and has degree -1.
    Content is never divided out implicitly.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()):
        cs = []
        for c in coeffs:
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ValueError("IntPoly coefficients must be integers")
                c = c.numerator
            if not isinstance(c, int):
                raise TypeError("IntPoly coefficients must be integers")
            cs.append(c)
        self.coeffs = _trim(cs)

    @classmethod
    def parse(cls, text: str) -> "IntPoly":
        return parse_poly(text)

    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> int:
        if not self.coeffs:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def height(self) -> int:
        return max((abs(c) for c in self.coeffs), default=0)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g

    def primitive(self) -> "IntPoly":
        g = self.content()
        if g == 0:
            return self
        if self.lead < 0:
            g = -g
        return IntPoly(c // g for c in self.coeffs)

    # ring operations
    def __add__(self, other):
        other = _lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPoly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly(c * other for c in self.coeffs)
        other = _lift(other)
        if self.is_zero() or other.is_zero():
            return IntPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = IntPoly((1,))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntPoly((other,))
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        """Horner evaluation at an int, Fraction or Interval."""
        if isinstance(x, Interval):
            return self._eval_interval(x)
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def _eval_interval(self, x: Interval) -> Interval:
        # Horner on intervals is a valid (if sometimes loose) enclosure.
        acc = Interval(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, x: Fraction) -> int:
        """Exact sign of f(x) for a rational x, using only integer arithmetic."""
        x = Fraction(x)
        u, v = x.numerator, x.denominator
        d = self.degree
        acc = 0
        vp = 1
        # sum c_i u^i v^(d-i)
        up = [1]
        for _ in range(d):
            up.append(up[-1] * u)
        for i in range(d, -1, -1):
            acc += self.coeff(i) * up[i] * vp
            vp *= v
        return (acc > 0) - (acc < 0)

    def compose(self, g: "IntPoly") -> "IntPoly":
        acc = IntPoly()
        for c in reversed(self.coeffs):
            acc = acc * g + c
        return acc

    def derivative(self) -> "IntPoly":
        return IntPoly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def reverse(self, formal_degree: int | None = None) -> "IntPoly":
        """X^d f(1/X) for the given formal degree d (default: the degree)."""
        d = self.degree if formal_degree is None else formal_degree
        cs = list(self.coeffs) + [0] * (d + 1 - len(self.coeffs))
        return IntPoly(reversed(cs[: d + 1]))

    def similar(self, other: "IntPoly") -> bool:
        """Equality up to a nonzero rational factor."""
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.degree != other.degree:
            return False
        return (self * other.lead).coeffs == (other * self.lead).coeffs

    def roots_numeric(self, dps: int = 30):
        import mpmath

        if self.degree < 1:
            return []
        with mpmath.workdps(dps):
            return mpmath.polyroots(list(reversed(self.coeffs)), maxsteps=400, extraprec=4 * dps)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"IntPoly({format_poly(self)!r})"


def _lift(x) -> IntPoly:
    if isinstance(x, IntPoly):
        return x
    if isinstance(x, int):
        return IntPoly((x,))
    raise TypeError(f"cannot treat {type(x).__name__} as IntPoly")


def format_poly(f: IntPoly, var: str = "x") -> str:
    if f.is_zero():
        return "0"
    parts = []
    for i in range(f.degree, -1, -1):
        c = f.coeffs[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if i == 0:
            body = str(a)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if a == 1 else f"{a}{mono}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += sign + body
    return out


_TERM = re.compile(r"([+-]?)(\d*)\*?(?:([xX])(?:\^(\d+))?)?")


def parse_poly(text: str) -> IntPoly:
    """Parse an expanded integer polynomial in x, e.g. ``x^4-12x^2+36``.

    Terms may repeat (``x^2+x+x``); products of parenthesised factors are also
    accepted, e.g. ``(x-1)(x+1)`` or ``(2x-1)^2*(x+3)``.
    """
    s = text.replace(" ", "").replace("−", "-")
    if not s:
        raise MalformedSpec("empty polynomial")
    if "(" in s:
        return _parse_product(s)
    return _parse_sum(s)


def _parse_sum(s: str) -> IntPoly:
    coeffs: dict = {}
    pos = 0
    if s[0] not in "+-":
        s = "+" + s
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or not m.group(1):
            raise MalformedSpec(f"cannot parse polynomial near {s[pos:]!r}")
        sign, num, var, exp = m.groups()
        if not num and not var:
            raise MalformedSpec(f"dangling sign in {s!r}")
        c = int(num) if num else 1
        if sign == "-":
            c = -c
        e = 0 if not var else (int(exp) if exp else 1)
        coeffs[e] = coeffs.get(e, 0) + c
        pos = m.end()
    if not coeffs:
        raise MalformedSpec("empty polynomial")
    n = max(coeffs) + 1
    return IntPoly(coeffs.get(i, 0) for i in range(n))


_FACTOR = re.compile(r"\(([^()]*)\)(?:\^(\d+))?\*?")


def _parse_product(s: str) -> IntPoly:
    out = IntPoly((1,))
    pos = 0
    m0 = re.match(r"([+-]?\d*)\*?", s)
    if m0 and m0.group(1) and m0.group(1) not in "+-":
        out = out * int(m0.group(1))
        pos = m0.end()
    elif m0 and m0.group(1) == "-":
        out = -out
        pos = 1
    while pos < len(s):
        m = _FACTOR.match(s, pos)
        if not m:
            raise MalformedSpec(f"cannot parse factor near {s[pos:]!r}")
        f = _parse_sum(m.group(1))
        out = out * (f ** int(m.group(2)) if m.group(2) else f)
        pos = m.end()
    return out


class RatMap:
    """Integer rational map p/q in relatively prime form."""

    __slots__ = ("p", "q")

    def __init__(self, p: IntPoly, q: IntPoly):
        if q.is_zero():
            raise ZeroPolynomial("rational map with zero denominator")
        if not poly_gcd(p, q).degree <= 0:
            raise MalformedSpec("rational map numerator and denominator share a factor")
        self.p = p
        self.q = q

    @classmethod
    def parse(cls, text: str) -> "RatMap":
        s = text.replace(" ", "")
        m = re.fullmatch(r"\((.*)\)/\((.*)\)", s)
        if m:
            return cls(parse_poly(m.group(1)), parse_poly(m.group(2)))
        return cls(parse_poly(s), IntPoly((1,)))

    @classmethod
    def identity(cls) -> "RatMap":
        return cls(IntPoly((0, 1)), IntPoly((1,)))

    @property
    def degree(self) -> int:
        return max(self.p.degree, self.q.degree)

    def compose(self, other: "RatMap") -> "RatMap":
        """self o other, cleared of denominators to relatively prime form."""
        d = self.degree
        num = _homogenize(self.p, d, other.p, other.q, other.degree)
        den = _homogenize(self.q, d, other.p, other.q, other.degree)
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = poly_exact_div(num, g)
            den = poly_exact_div(den, g)
        # integer content is kept so that the square action composes exactly
        return RatMap(num, den)

    def __eq__(self, other):
        if not isinstance(other, RatMap):
            return NotImplemented
        return (self.p * other.q) == (other.p * self.q)

    def __str__(self):
        return f"({format_poly(self.p)})/({format_poly(self.q)})"


def _homogenize(f: IntPoly, d: int, p: IntPoly, q: IntPoly, e: int) -> IntPoly:
    # q^d * f(p/q) with f read at formal degree d
    out = IntPoly()
    for i in range(d + 1):
        c = f.coeff(i)
        if c:
            out = out + (p ** i) * (q ** (d - i)) * c
    return out


# exact arithmetic over Q used for gcds and squarefree parts

def _qdivmod(a: list, b: list):
    a = [Fraction(x) for x in a]
    while a and a[-1] == 0:
        a.pop()
    quo = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = Fraction(b[-1])
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        t = a[-1] / lb
        quo[k] = t
        for i, c in enumerate(b):
            a[i + k] -= t * c
        while a and a[-1] == 0:
            a.pop()
    return quo, a


def _to_intpoly(cs: Sequence[Fraction]) -> IntPoly:
    if not cs:
        return IntPoly()
    den = 1
    for c in cs:
        den = den * Fraction(c).denominator // gcd(den, Fraction(c).denominator)
    return IntPoly(int(Fraction(c) * den) for c in cs).primitive()


def poly_gcd(f: IntPoly, g: IntPoly) -> IntPoly:
    """Primitive gcd with positive leading coefficient (1 for coprime inputs)."""
    a = list(f.coeffs)
    b = list(g.coeffs)
    if not a:
        return g.primitive() if b else IntPoly()
    if not b:
        return f.primitive()
    while b:
        _, r = _qdivmod(a, b)
        a, b = b, r
        if b:
            b = list(_to_intpoly(b).coeffs)
    return _to_intpoly(a)


def poly_exact_div(f: IntPoly, g: IntPoly) -> IntPoly:
    q, r = _qdivmod(list(f.coeffs), list(g.coeffs))
    if r:
        raise ValueError("inexact polynomial division")
    for c in q:
        if c.denominator != 1:
            raise ValueError("quotient has non-integer coefficients")
    return IntPoly(int(c) for c in q)


def squarefree_parts(f: IntPoly):
    """Yun decomposition: list of (part, multiplicity) with f ~ prod part^mult."""
    if f.degree < 1:
        return []
    out = []
    fq = [Fraction(x) for x in f.coeffs]
    fp = _qderiv(fq)
    a0 = _qgcd(fq, fp)
    bq, _ = _qdivmod(fq, a0)
    cq, _ = _qdivmod(fp, a0)
    i = 1
    while len(bq) > 1:
        dq = _qsub(cq, _qderiv(bq))
        a = _qgcd(bq, dq)
        if len(a) > 1:
            out.append((_to_intpoly(a), i))
        bq, _ = _qdivmod(bq, a)
        cq, _ = _qdivmod(dq, a)
        i += 1
    return out


def _qderiv(a):
    return [i * c for i, c in enumerate(a)][1:]


def _qsub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _qgcd(a, b):
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    while b:
        _, r = _qdivmod(a, b)
        a, b = b, r
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]
