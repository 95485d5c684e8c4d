"""Computable reals, interval evaluation, and the continued-fraction engine.

Convention: for a real x the expansion is x = [a_0; a_1, a_2, ...] with a_0 the
integer part, q_0 = 1, q_1 = a_1, p_0 = a_0, p_1 = a_1 a_0 + 1.  Negative
rationals, surds and algebraic numbers are expanded through |x| with the sign
carried on the numerators.  Quotient streams are taken exactly as given.
"""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Tuple

from . import config
from .errors import (
    IndexOutOfRange,
    MalformedSpec,
    NonSquarefreeD,
    PrecisionExhausted,
    RationalTerminated,
    ReducibleMinpoly,
    RExceedsQuotient,
)
from .interval import Interval, floor_frac
from .poly import IntPoly, parse_poly


# ---------------------------------------------------------------------------
# partial-quotient streams


class PQStream:
    """A lazily generated sequence a_0, a_1, ... with a thread-safe cache.

    ``factory`` returns a fresh iterator over the terms; regenerating always
    yields the same terms, so the cache is purely an optimisation.
    """

    def __init__(self, rule: str, params: tuple, factory: Callable[[], Iterator[int]],
                 enclose: Optional[Callable[[int], Interval]] = None):
        self.rule = rule
        self.params = params
        self._factory = factory
        self._enclose = enclose
        self._terms: List[int] = []
        self._pq: List[Tuple[int, int]] = []
        self._it: Optional[Iterator[int]] = None
        self._finished = False
        self._lock = threading.RLock()

    def __repr__(self):
        return f"PQStream({self.rule!r}, {self.params!r})"

    def prefix(self, k: int) -> List[int]:
        """The first k terms (fewer if the stream is finite)."""
        with self._lock:
            if self._it is None and not self._finished:
                self._it = self._factory()
            while len(self._terms) < k and not self._finished:
                try:
                    a = next(self._it)
                except StopIteration:
                    self._finished = True
                    break
                if len(self._terms) >= 1 and a < 1:
                    raise MalformedSpec(f"partial quotient a_{len(self._terms)}={a} < 1")
                self._terms.append(a)
            return list(self._terms[:k])

    def term(self, i: int) -> Optional[int]:
        t = self.prefix(i + 1)
        return t[i] if i < len(t) else None

    def convergents(self, k: int) -> List[Tuple[int, int]]:
        """(p_i, q_i) for i < k, fewer when the stream ends."""
        with self._lock:
            if len(self._pq) < k:
                terms = self.prefix(k)
                pq = self._pq
                for i in range(len(pq), len(terms)):
                    a = terms[i]
                    if i == 0:
                        pq.append((a, 1))
                    elif i == 1:
                        p0, q0 = pq[0]
                        pq.append((a * p0 + 1, a))
                    else:
                        (p1, q1), (p2, q2) = pq[i - 1], pq[i - 2]
                        pq.append((a * p1 + p2, a * q1 + q2))
            return list(self._pq[:k])

    def regenerate(self, k: int) -> List[int]:
        """Recompute the first k terms from the rule, bypassing the cache."""
        out = []
        for a in self._factory():
            if len(out) >= k:
                break
            out.append(a)
        return out

    def prefix_within(self, k: int, bit_budget: int) -> List[int]:
        """Terms a_0..a_{j} with j < k, stopping once q_j exceeds the budget."""
        out = []
        i = 0
        while i < k:
            cv = self.convergents(i + 1)
            if len(cv) <= i:
                break
            out.append(self.term(i))
            if cv[i][1].bit_length() > bit_budget:
                break
            i += 1
        return out

    @property
    def finite(self) -> bool:
        return self._finished


def _gen_explicit(terms):
    def factory():
        return iter(terms)
    return factory


def _gen_periodic(pre, cycle):
    def factory():
        def it():
            yield from pre
            while True:
                yield from cycle
        return it()
    return factory


def _gen_factorial():
    def it():
        f = 1
        i = 0
        while True:
            if i > 0:
                f *= i
            yield f
            i += 1
    return it


def _gen_e():
    def it():
        yield 2
        i = 1
        while True:
            yield 2 * (i + 1) // 3 if i % 3 == 2 else 1
            i += 1
    return it


def _gen_liouville_resolute():
    # a_0 = a_1 = 1, a_{n+1} = q_n^(n-1)
    def it():
        yield 1
        yield 1
        q_prev, q = 1, 1  # q_0, q_1
        n = 1
        while True:
            a = q ** (n - 1)
            yield a
            q_prev, q = q, a * q + q_prev
            n += 1
    return it


def _gen_liouville_irresolute():
    # a_0 = 1; for n >= 1, a_n = q_{n-1}^n when n is even, else 1
    def it():
        yield 1
        q_prev, q = 0, 1  # q_{-1}, q_0
        n = 1
        while True:
            a = q ** n if n % 2 == 0 else 1
            yield a
            q_prev, q = q, a * q + q_prev
            n += 1
    return it


def liouville_series_enclosure(m: int, prec: int) -> Interval:
    """Enclosure of L(m) = sum_{j>=0} m^{-(j+1)!} of width <= 2**-prec."""
    log2m = math.log2(m)
    total = Fraction(0)
    j = 0
    fact = 1  # (j+1)!
    while True:
        total += Fraction(1, m ** fact)
        nxt = fact * (j + 2)  # (j+2)!
        # tail after term j is below 2 m^{-(j+2)!}
        if nxt * log2m >= prec + 2:
            return Interval(total, total + Fraction(2, m ** nxt))
        j += 1
        fact = nxt


def cf_of_interval(iv: Interval, limit: int) -> Tuple[List[int], bool]:
    """Certified common prefix of the expansions of every point of iv.

    Returns (terms, terminated); terminated is True only for a degenerate
    interval whose (rational) expansion ended.
    """
    out: List[int] = []
    lo, hi = iv.lo, iv.hi
    while len(out) < limit:
        a = floor_frac(lo)
        if lo == hi:
            out.append(a)
            frac = lo - a
            if frac == 0:
                return out, True
            lo = hi = 1 / frac
            continue
        if floor_frac(hi) != a or lo == a:
            break
        out.append(a)
        lo, hi = 1 / (hi - a), 1 / (lo - a)
    return out, False


def _gen_liouville_series(m: int):
    def it():
        emitted = 0
        prec = 64
        while True:
            terms, _ = cf_of_interval(liouville_series_enclosure(m, prec), 1 << 30)
            while emitted < len(terms):
                yield terms[emitted]
                emitted += 1
            prec *= 2
            if prec > (1 << 24):
                raise PrecisionExhausted("liouville series quotient beyond precision cap")
    return it


def stream_explicit(terms) -> PQStream:
    terms = tuple(int(a) for a in terms)
    if not terms:
        raise MalformedSpec("explicit stream needs at least one term")
    return PQStream("explicit", terms, _gen_explicit(terms))


def stream_periodic(pre, cycle) -> PQStream:
    pre, cycle = tuple(pre), tuple(cycle)
    if not cycle:
        raise MalformedSpec("periodic stream needs a nonempty cycle")
    return PQStream("periodic", (pre, cycle), _gen_periodic(pre, cycle))


def stream_factorial() -> PQStream:
    return PQStream("factorial", (), _gen_factorial())


def stream_e() -> PQStream:
    return PQStream("e", (), _gen_e())


def stream_liouville_resolute() -> PQStream:
    return PQStream("liouville-resolute", (), _gen_liouville_resolute())


def stream_liouville_irresolute() -> PQStream:
    return PQStream("liouville-irresolute", (), _gen_liouville_irresolute())


def stream_liouville_series(m: int) -> PQStream:
    if m < 2:
        raise MalformedSpec("liouville series needs m >= 2")
    return PQStream("liouville-series", (m,), _gen_liouville_series(m),
                    enclose=lambda prec: liouville_series_enclosure(m, prec))


# ---------------------------------------------------------------------------
# real sources


def _check_prec(prec: int, cap: int):
    if prec > cap:
        raise PrecisionExhausted(f"requested {prec} bits exceeds cap {cap}")


class RealSource:
    """A real number that can be enclosed to any requested width."""

    kind = "abstract"

    def __init__(self, label: str):
        self.label = label

    def enclose(self, prec: int) -> Interval:
        """Interval of width <= 2**-prec containing the value."""
        raise NotImplementedError

    def exact(self) -> Optional[Fraction]:
        return None

    def sign(self, cap: int = config.PREC_CAP) -> int:
        e = self.exact()
        if e is not None:
            return (e > 0) - (e < 0)
        prec = 32
        while prec <= cap:
            s = self.enclose(prec).sign()
            if s is not None:
                return s
            prec *= 2
        raise PrecisionExhausted(f"sign of {self.label} undecided")

    def __repr__(self):
        return f"<{self.kind} {self.label}>"

    def __eq__(self, other):
        return isinstance(other, RealSource) and self.label == other.label

    def __hash__(self):
        return hash(self.label)

    # combinators used by composed approximation pairs
    def __add__(self, other):
        return ExprSource("add", (self, as_source(other)))

    def __sub__(self, other):
        return ExprSource("sub", (self, as_source(other)))

    def __mul__(self, other):
        return ExprSource("mul", (self, as_source(other)))

    def __truediv__(self, other):
        return ExprSource("div", (self, as_source(other)))

    def __neg__(self):
        return ExprSource("neg", (self,))

    def inverse(self):
        return ExprSource("div", (RationalSource(Fraction(1)), self))


class RationalSource(RealSource):
    kind = "Rational"

    def __init__(self, value: Fraction):
        value = Fraction(value)
        super().__init__(f"rational:{value.numerator}/{value.denominator}")
        self.value = value

    @property
    def num(self):
        return self.value.numerator

    @property
    def den(self):
        return self.value.denominator

    def enclose(self, prec: int) -> Interval:
        return Interval(self.value)

    def exact(self):
        return self.value


def _squarefree(n: int) -> bool:
    if n < 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1 if k == 2 else 2
    return True


class SurdSource(RealSource):
    """(a + b*sqrt(D)) / c with D squarefree and D > 1."""

    kind = "QuadraticSurd"

    def __init__(self, a: int, b: int, D: int, c: int):
        if c == 0:
            raise MalformedSpec("surd with zero denominator")
        if b == 0:
            raise MalformedSpec("surd with b = 0 is rational")
        if not _squarefree(D):
            raise NonSquarefreeD(f"D={D} is not squarefree")
        if D == 1:
            raise NonSquarefreeD("D=1 gives a rational number")
        g = math.gcd(math.gcd(a, b), c)
        if c < 0:
            g = -g
        a, b, c = a // g, b // g, c // g
        self.a, self.b, self.D, self.c = a, b, D, c
        bs = "+" if b >= 0 else "-"
        super().__init__(f"surd:({a}{bs}{abs(b)}√{D})/{c}")

    def _numerator_sign(self) -> int:
        a, b, D = self.a, self.b, self.D
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 D
        return sa if a * a > b * b * D else sb

    def sign(self, cap: int = config.PREC_CAP) -> int:
        return self._numerator_sign() * (1 if self.c > 0 else -1)

    def enclose(self, prec: int) -> Interval:
        d = self.b * self.b * self.D
        k = prec + 2
        s = math.isqrt(d << (2 * k))
        root = Interval(Fraction(s, 1 << k), Fraction(s + 1, 1 << k))
        num = (root if self.b > 0 else -root) + self.a
        return num / self.c

    def state(self):
        """(P, Q, d) with |x| = (P + sqrt d)/Q and Q | d - P^2."""
        a, b, c = self.a, self.b, self.c
        if self.sign() < 0:
            a, b = -a, -b
        d = b * b * self.D
        if b > 0:
            P, Q = a, c
        else:
            P, Q = -a, -c
        if (d - P * P) % Q != 0:
            P *= abs(Q)
            d *= Q * Q
            Q *= abs(Q)
        return P, Q, d


def surd_steps(P: int, Q: int, d: int) -> Iterator[Tuple[int, int, int]]:
    """Yield (a_k, P_k, Q_k): the tail x_k = (P_k + sqrt d)/Q_k and its floor."""
    s = math.isqrt(d)
    while True:
        if Q > 0:
            a = (P + s) // Q
        else:
            a = -((P + s) // (-Q)) - 1
        yield a, P, Q
        P = a * Q - P
        Q = (d - P * P) // Q


class AlgebraicSource(RealSource):
    """The unique real root of an irreducible integer polynomial in [lo, hi]."""

    kind = "AlgebraicRoot"

    def __init__(self, minpoly: IntPoly, lo, hi, check: bool = True):
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise MalformedSpec("isolating interval with lo > hi")
        if minpoly.degree < 1:
            raise MalformedSpec("minimal polynomial must have degree >= 1")
        if check:
            _check_minpoly(minpoly, lo, hi)
        self.minpoly = minpoly
        super().__init__(f"alg:{minpoly}@[{lo},{hi}]")
        self._lock = threading.Lock()
        self._exact = None
        s_lo, s_hi = minpoly.sign_at(lo), minpoly.sign_at(hi)
        if s_lo == 0:
            self._exact = lo
        elif s_hi == 0:
            self._exact = hi
        self._bracket = (lo, hi, s_lo)

    def exact(self):
        return self._exact

    def enclose(self, prec: int) -> Interval:
        if self._exact is not None:
            return Interval(self._exact)
        target = Fraction(1, 1 << prec)
        with self._lock:
            lo, hi, s_lo = self._bracket
            f = self.minpoly
            while hi - lo > target:
                mid = (lo + hi) / 2
                s = f.sign_at(mid)
                if s == 0:
                    self._exact = mid
                    return Interval(mid)
                if s == s_lo:
                    lo = mid
                else:
                    hi = mid
            self._bracket = (lo, hi, s_lo)
            return Interval(lo, hi)


def _check_minpoly(f: IntPoly, lo: Fraction, hi: Fraction):
    import sympy

    X = sympy.Symbol("X")
    P = sympy.Poly(list(reversed(f.coeffs)), X, domain="ZZ")
    if not P.is_irreducible:
        raise ReducibleMinpoly(f"{f} is reducible over Q")
    n = P.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                      sympy.Rational(hi.numerator, hi.denominator))
    if n != 1:
        raise MalformedSpec(f"interval [{lo},{hi}] holds {n} roots of {f}")


class StreamSource(RealSource):
    """A real given by its partial-quotient stream."""

    kind = "QuotientStream"

    def __init__(self, stream: PQStream, label: Optional[str] = None):
        self.stream = stream
        super().__init__(label or f"stream:{stream.rule}:{stream.params}")

    def exact(self):
        # bounded by size as well as count: fast-growing streams are not expanded
        t = self.stream.prefix_within(1 << 12, config.STREAM_BIT_BUDGET)
        if self.stream.finite and len(t) == len(self.stream.prefix(len(t) + 1)):
            p, q = self.stream.convergents(len(t))[-1]
            return Fraction(p, q)
        return None

    def enclose(self, prec: int) -> Interval:
        if self.stream._enclose is not None:
            return self.stream._enclose(prec)
        return bracket_from_terms(self.stream.term, 0, prec)


def bracket_from_terms(term: Callable[[int], Optional[int]], start: int, prec: int) -> Interval:
    """Enclose [a_start; a_start+1, ...] by consecutive convergents."""
    bound = 1 << prec
    a = term(start)
    if a is None:
        raise IndexOutOfRange(f"no term at index {start}")
    p2, q2 = 1, 0
    p1, q1 = a, 1
    i = start + 1
    while True:
        a = term(i)
        if a is None:
            return Interval(Fraction(p1, q1))
        p, q = a * p1 + p2, a * q1 + q2
        if q * q1 >= bound:
            return Interval.hull_of(Fraction(p1, q1), Fraction(p, q))
        p2, q2, p1, q1 = p1, q1, p, q
        i += 1


class ExprSource(RealSource):
    """A real built from other sources by field operations."""

    kind = "Expression"
    _SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/"}

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args
        if op == "neg":
            label = f"(-{args[0].label})"
        else:
            label = f"({args[0].label}{self._SYM[op]}{args[1].label})"
        super().__init__(label)

    def exact(self):
        vals = [a.exact() for a in self.args]
        if any(v is None for v in vals):
            return None
        if self.op == "neg":
            return -vals[0]
        x, y = vals
        if self.op == "add":
            return x + y
        if self.op == "sub":
            return x - y
        if self.op == "mul":
            return x * y
        if y == 0:
            raise ZeroDivisionError(f"{self.label} divides by zero")
        return x / y

    def _combine(self, ivs):
        if self.op == "neg":
            return -ivs[0]
        x, y = ivs
        if self.op == "add":
            return x + y
        if self.op == "sub":
            return x - y
        if self.op == "mul":
            return x * y
        return x / y

    def enclose(self, prec: int, cap: int = 1 << 20) -> Interval:
        e = self.exact()
        if e is not None:
            return Interval(e)
        extra = 8
        while True:
            p = prec + extra
            if p > cap:
                raise PrecisionExhausted(f"cannot enclose {self.label} to {prec} bits")
            try:
                iv = self._combine([a.enclose(p) for a in self.args])
            except ZeroDivisionError:
                extra *= 2
                continue
            if iv.width <= Fraction(1, 1 << prec):
                return iv.round(prec + 2) if iv.width * (1 << (prec + 2)) < 2 else iv
            extra *= 2


def as_source(x) -> RealSource:
    if isinstance(x, RealSource):
        return x
    if isinstance(x, (int, Fraction)):
        return RationalSource(Fraction(x))
    if isinstance(x, str):
        return make_source(x)
    raise TypeError(f"cannot make a real source from {type(x).__name__}")


def mobius_source(a: int, b: int, c: int, d: int, x: RealSource) -> RealSource:
    """(a x + b)/(c x + d)."""
    num = x * RationalSource(Fraction(a)) + RationalSource(Fraction(b))
    den = x * RationalSource(Fraction(c)) + RationalSource(Fraction(d))
    return num / den


# ---------------------------------------------------------------------------
# the source-spec grammar

_SURD = re.compile(r"\(\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*(?:√|sqrt)\s*\(?(\d+)\)?\s*\)\s*/\s*([+-]?\d+)")
_SHORT_ROOT = re.compile(r"(?:√|sqrt)\(?(\d+)\)?")


def make_source(spec: str) -> RealSource:
    """Build a RealSource from its one-line text description."""
    s = spec.strip()
    try:
        return _make_source(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedSpec(f"bad source spec {spec!r}: {exc}") from exc


def _make_source(s: str) -> RealSource:
    if s.startswith("rational:"):
        body = s[len("rational:"):]
        return RationalSource(Fraction(body))
    if s.startswith("surd:"):
        body = s[len("surd:"):].replace(" ", "")
        if body in ("φ", "phi"):
            return SurdSource(1, 1, 5, 2)
        m = _SHORT_ROOT.fullmatch(body)
        if m:
            return SurdSource(0, 1, int(m.group(1)), 1)
        m = _SURD.fullmatch(body)
        if not m:
            raise MalformedSpec(f"bad surd spec {s!r}")
        a, sg, b, D, c = m.groups()
        b = int(b) if b else 1
        if sg == "-":
            b = -b
        return SurdSource(int(a), b, int(D), int(c))
    if s.startswith("alg:"):
        m = re.fullmatch(r"alg:(.+)@\[([^,\]]+),([^\]]+)\]", s)
        if not m:
            raise MalformedSpec(f"bad algebraic spec {s!r}")
        return AlgebraicSource(parse_poly(m.group(1)), Fraction(m.group(2)), Fraction(m.group(3)))
    if s.startswith("stream:"):
        body = s[len("stream:"):]
        if body == "e":
            return StreamSource(stream_e(), "stream:e")
        if body == "factorial":
            return StreamSource(stream_factorial(), "stream:factorial")
        if body.startswith("periodic:"):
            rest = body[len("periodic:"):]
            if ";" not in rest:
                raise MalformedSpec("periodic stream needs '<pre>;<cycle>'")
            pre_s, cyc_s = rest.split(";", 1)
            pre = [int(t) for t in pre_s.split(",") if t.strip()]
            cyc = [int(t) for t in cyc_s.split(",") if t.strip()]
            return StreamSource(stream_periodic(pre, cyc), s)
        if body.startswith("explicit:"):
            terms = [int(t) for t in body[len("explicit:"):].split(",") if t.strip()]
            return StreamSource(stream_explicit(terms), s)
        raise MalformedSpec(f"unknown stream rule in {s!r}")
    if s == "liouville-resolute":
        return StreamSource(stream_liouville_resolute(), s)
    if s == "liouville-irresolute":
        return StreamSource(stream_liouville_irresolute(), s)
    if s.startswith("liouville-series:"):
        m = int(s.split(":", 1)[1])
        return StreamSource(stream_liouville_series(m), s)
    if s.startswith("blockpair:"):
        from .ideology import blockpair_source

        return blockpair_source(s[len("blockpair:"):])
    raise MalformedSpec(f"unrecognised source spec {s!r}")


# ---------------------------------------------------------------------------
# continued-fraction operations


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int


@dataclass(frozen=True)
class IntermediateConvergent:
    n: int
    r: int
    p: int
    q: int


def eval_interval(x: RealSource, precision: int, cap: int = config.PREC_CAP) -> Interval:
    _check_prec(precision, cap)
    return x.enclose(precision)


def _abs_enclosure(x: RealSource, prec: int, sign: int) -> Interval:
    iv = x.enclose(prec)
    return iv if sign >= 0 else -iv


def cf_expansion(x: RealSource, count: int, cap: int = config.PREC_CAP) -> Tuple[int, List[int]]:
    """(sign, first `count` partial quotients of |x|); streams are used as given."""
    if isinstance(x, StreamSource):
        return 1, x.stream.prefix(count)
    e = x.exact()
    if e is not None:
        sign = (e > 0) - (e < 0)
        terms, _ = cf_of_interval(Interval(abs(e)), count)
        return (sign if sign else 1), terms
    sign = x.sign(cap)
    if isinstance(x, SurdSource):
        P, Q, d = x.state()
        out = []
        for a, _, _ in surd_steps(P, Q, d):
            if len(out) >= count:
                break
            out.append(a)
        return sign, out
    prec = 64
    while True:
        terms, done = cf_of_interval(_abs_enclosure(x, prec, sign), count)
        if len(terms) >= count or done:
            return sign, terms
        if prec >= cap:
            raise PrecisionExhausted(
                f"only {len(terms)} quotients of {x.label} certified at {cap} bits")
        prec = min(prec * 2, cap)


def partial_quotients(x: RealSource, count: int, cap: int = config.PREC_CAP) -> List[int]:
    """First `count` partial quotients (fewer when a rational expansion ends)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return cf_expansion(x, count, cap)[1]


def convergents(x: RealSource, k: Optional[int] = None, cap: int = config.PREC_CAP) -> List[Convergent]:
    """The first k convergents; k=None gives the whole expansion of a rational."""
    if k is None:
        if x.exact() is None:
            raise IndexOutOfRange("an irrational number needs an explicit count")
        k = 1 << 30
    sign, terms = cf_expansion(x, k, cap)
    if len(terms) < k and k != 1 << 30:
        raise RationalTerminated(len(terms))
    out = []
    p2, q2, p1, q1 = 0, 1, 1, 0  # (p_{-2}, q_{-2}), (p_{-1}, q_{-1})
    for i, a in enumerate(terms):
        p, q = a * p1 + p2, a * q1 + q2
        out.append(Convergent(i, sign * p, q))
        p2, q2, p1, q1 = p1, q1, p, q
    return out


def _need_terms(x: RealSource, count: int, cap: int) -> Tuple[int, List[int]]:
    sign, terms = cf_expansion(x, count, cap)
    if len(terms) < count:
        raise IndexOutOfRange(f"{x.label} has only {len(terms)} partial quotients")
    return sign, terms


def intermediate_convergent(x: RealSource, n: int, r: int, cap: int = config.PREC_CAP) -> IntermediateConvergent:
    if n < 0:
        raise IndexOutOfRange("n must be >= 0")
    sign, terms = _need_terms(x, n + 3, cap)
    a = terms[n + 2]
    if not 0 <= r <= a - 1:
        raise RExceedsQuotient(f"r={r} outside [0, a_{n + 2}-1] = [0, {a - 1}]")
    cv = convergents(x, n + 2, cap)
    pn, qn = cv[n].p, cv[n].q
    pn1, qn1 = cv[n + 1].p, cv[n + 1].q
    return IntermediateConvergent(n, r, r * pn1 + pn, r * qn1 + qn)


def tail_quotient(x: RealSource, n: int, precision: int, cap: int = config.PREC_CAP) -> Interval:
    """Enclosure of theta_n = [a_n; a_{n+1}, ...] for |x|, width <= 2**-precision."""
    _check_prec(precision, cap)
    if n < 0:
        raise IndexOutOfRange("n must be >= 0")
    if isinstance(x, StreamSource):
        if x.stream.term(n) is None:
            raise IndexOutOfRange(f"stream ends before index {n}")
        return bracket_from_terms(x.stream.term, n, precision)
    e = x.exact()
    if e is not None:
        v = abs(e)
        for i in range(n):
            frac = v - floor_frac(v)
            if frac == 0:
                raise IndexOutOfRange(f"expansion of {x.label} ends before index {n}")
            v = 1 / frac
        return Interval(v)
    if isinstance(x, SurdSource):
        P, Q, d = x.state()
        for i, (a, Pk, Qk) in enumerate(surd_steps(P, Q, d)):
            if i == n:
                k = precision + 2 + max(0, -(abs(Qk).bit_length()))
                s = math.isqrt(d << (2 * k))
                root = Interval(Fraction(s, 1 << k), Fraction(s + 1, 1 << k))
                return (root + Pk) / Qk
    # generic: theta_n = (p_{n-2} - q_{n-2} t)/(q_{n-1} t - p_{n-1}) with t = |x|
    sign = x.sign(cap)
    _need_terms(x, n + 1, cap)
    if n == 0:
        return _abs_enclosure(x, precision, sign)
    cv = convergents(x, n, cap)
    p1, q1 = abs(cv[n - 1].p), cv[n - 1].q
    if n >= 2:
        p2, q2 = abs(cv[n - 2].p), cv[n - 2].q
    else:
        p2, q2 = 1, 0
    extra = 2 * q1.bit_length() + 8
    while True:
        p = precision + extra
        if p > cap:
            raise PrecisionExhausted(f"tail quotient {n} of {x.label} needs more than {cap} bits")
        t = _abs_enclosure(x, p, sign)
        den = t * q1 - p1
        if den.excludes_zero():
            iv = (p2 - t * q2) / den
            if iv.width <= Fraction(1, 1 << precision):
                return iv
        extra *= 2


def direct_error(x: RealSource, q: int, p: int, precision: int, cap: int = config.PREC_CAP) -> Interval:
    """Enclosure of q*x - p with width <= 2**-precision."""
    e = x.exact()
    if e is not None:
        return Interval(q * e - p)
    bits = precision + abs(q).bit_length() + 1
    _check_prec(bits, max(cap, bits) if isinstance(x, (SurdSource, StreamSource)) else cap)
    return x.enclose(bits) * q - p


def intermediate_error_closed(x: RealSource, n: int, r: int, precision: int,
                              cap: int = config.PREC_CAP) -> Interval:
    """|eps(q_{n,r})| from (theta_{n+2} - r)/(theta_{n+2} q_{n+1} + q_n)."""
    ic = intermediate_convergent(x, n, r, cap)
    cv = convergents(x, n + 2, cap)
    qn, qn1 = cv[n].q, cv[n + 1].q
    t = tail_quotient(x, n + 2, precision + 4, cap)
    val = (t - r) / (t * qn1 + qn)
    return val.round(precision + 2)


def dirichlet_find(x: RealSource, N: int, cap: int = config.PREC_CAP) -> Tuple[int, int]:
    """(p, q) with 1 <= q < N and |q x - p| < 1/N: the first convergent that works."""
    if N < 2:
        raise ValueError("N must be >= 2")
    bound = Fraction(1, N)
    k = 1
    while True:
        k = k * 2
        try:
            cv = convergents(x, k, cap)
        except RationalTerminated:
            cv = convergents(x, None, cap)
        for c in cv:
            if c.q >= N:
                break
            err = abs(_certified_error(x, c.q, c.p, bound, cap))
            if err.lt(bound):
                return c.p, c.q
        else:
            if len(cv) < k:
                raise AssertionError("rational expansion ended without a hit")
            continue
        raise AssertionError("Dirichlet search failed; this contradicts Dirichlet's theorem")


def _certified_error(x: RealSource, q: int, p: int, bound: Fraction, cap: int) -> Interval:
    prec = max(64, 2 * bound.denominator.bit_length() + 8)
    while True:
        err = direct_error(x, q, p, prec, max(cap, prec + q.bit_length() + 2))
        a = abs(err)
        if a.lt(bound) or a.gt(bound) or a.is_point():
            return err
        if prec > cap:
            raise PrecisionExhausted("Dirichlet comparison undecided")
        prec *= 2


def best_error(x: RealSource, i: int, precision: int = 64, cap: int = config.PREC_CAP) -> Interval:
    """Signed q_i x - p_i from the tail quotient, with relative accuracy."""
    cv = convergents(x, i + 1, cap)
    qi = cv[i].q
    qim1 = cv[i - 1].q if i >= 1 else 0
    e = x.exact()
    if e is not None:
        return Interval(qi * e - cv[i].p)
    t = tail_quotient(x, i + 1, precision, cap)
    mag = 1 / (t * qi + qim1)
    sign = x.sign(cap)
    s = (-1) ** i * sign
    return mag if s > 0 else -mag
