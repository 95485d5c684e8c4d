"""Real quadratic fields: Minkowski pairs, PV powers and pushdowns to Z.

Elements of Q(√D) are kept exactly as u + v√D with rational u, v; the two
real embeddings send √D to +√D and -√D.  Approximation targets are pairs of
real sources (z1, z2); a real θ sits diagonally as (θ, θ).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import config
from .errors import (IdentityViolated, MalformedSpec, MembershipFailed, NonSquarefreeD, NormWindowNotInfinitesimal,
                     NotPV, PrecisionExhausted, WindowHypothesisUnmet, WindowMismatch)
from .gdcalc import GDClass, Order, Verdict, compare_class, trop_combine
from .ideology import ApproxPair, FiltrationWindow, _is_zero, _same_class, classify_stream, membership
from .interval import Interval, floor_frac
from .reals import RationalSource, RealSource, SurdSource, _squarefree, as_source, make_source


def _sqrt_iv(D: int, prec: int) -> Interval:
    s = math.isqrt(D << (2 * prec))
    return Interval(Fraction(s, 1 << prec), Fraction(s + 1, 1 << prec))


@dataclass(frozen=True)
class QNum:
    """u + v√D, exact."""

    u: Fraction
    v: Fraction
    D: int

    def __add__(self, o):
        o = self._lift(o)
        return QNum(self.u + o.u, self.v + o.v, self.D)

    def __sub__(self, o):
        o = self._lift(o)
        return QNum(self.u - o.u, self.v - o.v, self.D)

    def __neg__(self):
        return QNum(-self.u, -self.v, self.D)

    def __mul__(self, o):
        o = self._lift(o)
        return QNum(self.u * o.u + self.D * self.v * o.v, self.u * o.v + self.v * o.u, self.D)

    __rmul__ = __mul__
    __radd__ = __add__

    def _lift(self, o) -> "QNum":
        if isinstance(o, QNum):
            if o.D != self.D:
                raise ValueError("elements of different fields")
            return o
        return QNum(Fraction(o), Fraction(0), self.D)

    def conj(self) -> "QNum":
        return QNum(self.u, -self.v, self.D)

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def enclose(self, prec: int) -> Interval:
        if self.v == 0:
            return Interval(self.u)
        extra = abs(self.v).numerator.bit_length() + 4
        return _sqrt_iv(self.D, prec + extra) * self.v + self.u

    def enclose_rel(self, rel: int = 64, cap: int = config.PREC_CAP) -> Interval:
        """Enclosure whose width is below |value|·2^-rel (exact zero gives [0, 0])."""
        if self.v == 0:
            return Interval(self.u)
        if self.is_zero():
            return Interval(0)
        prec = rel + 16
        while True:
            iv = self.enclose(prec)
            if iv.excludes_zero() and iv.width * (1 << rel) <= abs(iv).lo:
                return iv
            if prec > cap:
                raise PrecisionExhausted("relative enclosure needs more bits")
            prec *= 2

    def source(self) -> RealSource:
        if self.v == 0:
            return RationalSource(self.u)
        c = math.lcm(self.u.denominator, self.v.denominator)
        return SurdSource(int(self.u * c), int(self.v * c), self.D, c)


class QuadField:
    """Q(√D) with integral basis {1, ω}."""

    def __init__(self, D: int):
        D = int(D)
        if D <= 1 or not _squarefree(D):
            raise NonSquarefreeD(f"D={D} must be a squarefree integer > 1")
        self.D = D
        half = Fraction(1, 2)
        self.omega = QNum(half, half, D) if D % 4 == 1 else QNum(Fraction(0), Fraction(1), D)

    @classmethod
    def parse(cls, spec: str) -> "QuadField":
        m = re.fullmatch(r"\s*qfield:\s*(\d+)\s*", spec)
        if not m:
            raise MalformedSpec(f"field spec must be qfield:<D>: {spec!r}")
        return cls(int(m.group(1)))

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.D == self.D

    def __hash__(self):
        return hash(("qfield", self.D))

    def __repr__(self):
        return f"qfield:{self.D}"

    def embed(self, a: int, b: int) -> "OElement":
        return OElement(self, int(a), int(b))

    def from_qnum(self, x: QNum) -> "OElement":
        """Coordinates of x in the basis {1, ω}; x must be integral."""
        b = x.v / self.omega.v
        a = x.u - b * self.omega.u
        if a.denominator != 1 or b.denominator != 1:
            raise ValueError(f"{x} is not an algebraic integer of {self}")
        return OElement(self, int(a), int(b))

    def element(self, spec: str) -> "OElement":
        """Parse '<a>+<b>w'."""
        m = re.fullmatch(r"\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*[wω]\s*", spec)
        if not m:
            try:
                return self.embed(int(spec), 0)
            except ValueError:
                raise MalformedSpec(f"element spec must be <a>+<b>w: {spec!r}") from None
        b = int(m.group(3) or 1)
        return self.embed(int(m.group(1)), b if m.group(2) == "+" else -b)


@dataclass(frozen=True)
class OElement:
    K: QuadField
    a: int
    b: int

    @property
    def value(self) -> QNum:
        return self.K.omega * self.b + self.a

    def tau(self, j: int) -> QNum:
        """The j-th embedding (j = 1 identity, j = 2 conjugation) as an exact number."""
        return self.value if j == 1 else self.value.conj()

    def minkowski(self, prec: int = 64) -> Tuple[Interval, Interval]:
        return self.tau(1).enclose(prec), self.tau(2).enclose(prec)

    def trace(self) -> int:
        return int(2 * self.value.u)

    def norm(self) -> int:
        x = self.value
        return int(x.u * x.u - self.K.D * x.v * x.v)

    def conj(self) -> "OElement":
        return self.K.from_qnum(self.value.conj())

    def __mul__(self, o: "OElement") -> "OElement":
        return self.K.from_qnum(self.value * o.value)

    def __add__(self, o: "OElement") -> "OElement":
        return OElement(self.K, self.a + o.a, self.b + o.b)

    def __sub__(self, o: "OElement") -> "OElement":
        return OElement(self.K, self.a - o.a, self.b - o.b)

    def __pow__(self, k: int) -> "OElement":
        out = self.K.embed(1, 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __str__(self):
        return f"{self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}w"


# ---------------------------------------------------------------------------
# targets and pairs


@dataclass(frozen=True)
class KPoint:
    """A point (z1, z2) of the Minkowski space; exact coordinates are kept when known."""

    z1: RealSource
    z2: RealSource
    exact1: Optional[QNum] = None
    exact2: Optional[QNum] = None

    @classmethod
    def diagonal(cls, x, K: Optional[QuadField] = None) -> "KPoint":
        x = as_source(x)
        q = _as_qnum(x, K) if K is not None else None
        return cls(x, x, q, q)

    @classmethod
    def of_element(cls, g: OElement) -> "KPoint":
        t1, t2 = g.tau(1), g.tau(2)
        return cls(t1.source(), t2.source(), t1, t2)

    @property
    def is_diagonal(self) -> bool:
        return self.z1 == self.z2

    def coord(self, j: int) -> RealSource:
        return self.z1 if j == 1 else self.z2

    def exact(self, j: int) -> Optional[QNum]:
        return self.exact1 if j == 1 else self.exact2

    def label(self) -> str:
        return self.z1.label if self.is_diagonal else f"({self.z1.label}, {self.z2.label})"


def _as_qnum(x: RealSource, K: QuadField) -> Optional[QNum]:
    e = x.exact()
    if e is not None:
        return QNum(e, Fraction(0), K.D)
    if isinstance(x, SurdSource) and x.D == K.D:
        return QNum(Fraction(x.a, x.c), Fraction(x.b, x.c), K.D)
    return None


@dataclass(frozen=True)
class OApproxPair:
    z: KPoint
    K: QuadField
    denoms: Tuple[OElement, ...]
    numers: Tuple[OElement, ...]
    errors: Tuple[Tuple[Interval, Interval], ...]

    def __len__(self):
        return len(self.denoms)

    def to_json(self) -> dict:
        return {
            "field": repr(self.K),
            "indices": list(range(1, len(self) + 1)),
            "denoms": [str(a) for a in self.denoms],
            "numers": [str(a) for a in self.numers],
            "err1": [list(e[0].to_strings()) for e in self.errors],
            "err2": [list(e[1].to_strings()) for e in self.errors],
        }


def _coord_error(z: KPoint, j: int, alpha: OElement, dual: OElement, rel: int, cap: int) -> Interval:
    """τ_j(α) z_j - τ_j(α⊥), exact when z_j lies in the field."""
    zq = z.exact(j)
    if zq is not None:
        return (alpha.tau(j) * zq - dual.tau(j)).enclose_rel(rel, cap)
    a, d = alpha.tau(j), dual.tau(j)
    prec = rel + 16
    while True:
        iv = a.enclose(prec + 8) * z.coord(j).enclose(prec + 8 + _mag(a)) - d.enclose(prec + 8)
        if iv.excludes_zero() and iv.width * (1 << rel) <= abs(iv).lo:
            return iv
        if prec > cap:
            return iv  # cannot be separated from 0 within the cap; keep the enclosure
        prec *= 2


def _mag(x: QNum) -> int:
    return int(abs(x.u) + abs(x.v) * x.D).bit_length() + 2


def _round_even(x: Fraction) -> int:
    k = floor_frac(x + Fraction(1, 2))
    if x - floor_frac(x) == Fraction(1, 2) and k % 2:
        k -= 1
    return k


def _nearest_lattice(K: QuadField, w1: Interval, w2: Interval) -> Optional[OElement]:
    """Round the exact solve of a + bω = w1, a + bσω = w2 coordinatewise, or None if undecided."""
    om, om2 = K.omega, K.omega.conj()
    prec = 64 + max(abs(w1.hi), abs(w2.hi), 1).numerator.bit_length()
    diff = (om - om2).enclose(prec)  # = √D
    b = (w1 - w2) / diff
    kb = _certified_round(b)
    if kb is None:
        return None
    a = w1 - om.enclose(prec) * kb
    ka = _certified_round(a)
    if ka is None:
        return None
    return K.embed(ka, kb)


def _certified_round(x: Interval) -> Optional[int]:
    if x.is_point():
        return _round_even(x.lo)
    k = floor_frac(x.mid + Fraction(1, 2))
    d = x - k
    if d.gt(Fraction(-1, 2)) and d.lt(Fraction(1, 2)):
        return k
    return None


def _round_qnum(x: QNum, cap: int) -> int:
    if x.v == 0:
        return _round_even(x.u)
    prec = 32
    while prec <= cap:
        k = _certified_round(x.enclose(prec))
        if k is not None:
            return k
        prec *= 2
    raise PrecisionExhausted("rounding undecided")


def _omega_gap(K: QuadField) -> Fraction:
    # ω - σω = c√D with c = 1 when D ≡ 1 mod 4 and c = 2 otherwise
    return Fraction(1) if K.D % 4 == 1 else Fraction(2)


def _nearest_dual(z: KPoint, alpha: OElement, cap: int) -> OElement:
    K = alpha.K
    if z.exact1 is not None and z.exact2 is not None:
        # exact solve: b = (w1 - w2)/(ω - σω) with ω - σω = c√D, a = w1 - bω
        w1, w2 = alpha.tau(1) * z.exact1, alpha.tau(2) * z.exact2
        bq = (w1 - w2) * QNum(Fraction(0), Fraction(1, _omega_gap(K) * K.D), K.D)
        aq = w1 - bq * K.omega
        return K.embed(_round_qnum(aq, cap), _round_qnum(bq, cap))
    prec = 64
    while prec <= cap:
        mk = alpha.minkowski(prec + 16)
        w1 = mk[0] * z.z1.enclose(prec + 16 + _mag(alpha.tau(1)))
        w2 = mk[1] * z.z2.enclose(prec + 16 + _mag(alpha.tau(2)))
        out = _nearest_lattice(K, w1, w2)
        if out is not None:
            return out
        prec *= 2
    raise PrecisionExhausted(f"nearest lattice point to {alpha}·z undecided")


def o_attach(z: KPoint, K: QuadField, denoms: Sequence[OElement], precision: int = 64,
             cap: int = config.PREC_CAP) -> OApproxPair:
    """Duals are the componentwise-rounded nearest lattice points (ties to even)."""
    ds, ns, es = [], [], []
    for alpha in denoms:
        if alpha.is_zero():
            raise ValueError("denominators must be nonzero")
        dual = _nearest_dual(z, alpha, cap)
        ds.append(alpha)
        ns.append(dual)
        es.append((_coord_error(z, 1, alpha, dual, precision, cap), _coord_error(z, 2, alpha, dual, precision, cap)))
    return OApproxPair(z, K, tuple(ds), tuple(ns), tuple(es))


def o_pair_from_elements(z: KPoint, K: QuadField, denoms, numers, precision: int = 64,
                         cap: int = config.PREC_CAP) -> OApproxPair:
    es = tuple((_coord_error(z, 1, a, d, precision, cap), _coord_error(z, 2, a, d, precision, cap))
               for a, d in zip(denoms, numers))
    return OApproxPair(z, K, tuple(denoms), tuple(numers), es)


def lift_pair(pair: ApproxPair, K: QuadField, precision: int = 64) -> OApproxPair:
    """A Z-pair on θ viewed in O through the diagonal inclusion."""
    z = KPoint.diagonal(pair.x, K)
    return o_pair_from_elements(z, K, [K.embed(n, 0) for n in pair.denoms],
                                [K.embed(k, 0) for k in pair.numers], precision)


# ---------------------------------------------------------------------------
# PV powers


def is_pv(theta: OElement, cap: int = config.PREC_CAP) -> bool:
    t1, t2 = theta.tau(1), theta.tau(2)
    prec = 32
    while prec <= cap:
        a, b = t1.enclose(prec), abs(t2.enclose(prec))
        if a.le(1) or b.ge(1):
            return False
        if a.gt(1) and b.lt(1):
            return True
        prec *= 2
    raise PrecisionExhausted(f"cannot decide whether {theta} is PV")


def pv_pair(theta: OElement, k: int, precision: int = 64) -> OApproxPair:
    """α_i = ϑ^i with dual ϑ^{i+1} on the diagonal target ϑ, i = 1..k.

    The first error coordinate vanishes and the second is σϑ^i(ϑ - σϑ).
    """
    if not is_pv(theta):
        raise NotPV(f"{theta} is not a PV number of {theta.K}")
    z = KPoint(theta.tau(1).source(), theta.tau(1).source(), theta.tau(1), theta.tau(1))
    ds, ns, es = [], [], []
    alpha = theta
    for _ in range(k):
        dual = alpha * theta
        ds.append(alpha)
        ns.append(dual)
        es.append((_coord_error(z, 1, alpha, dual, precision, config.PREC_CAP),
                   _coord_error(z, 2, alpha, dual, precision, config.PREC_CAP)))
        alpha = dual
    return OApproxPair(z, theta.K, tuple(ds), tuple(ns), tuple(es))


def pv_error_law(theta: OElement, i: int) -> QNum:
    """σϑ^i (ϑ - σϑ), the predicted second error coordinate (as an exact field number)."""
    s = theta.tau(2)
    p = QNum(Fraction(1), Fraction(0), theta.K.D)
    for _ in range(i):
        p = p * s
    return p * (theta.tau(1) - s)


@dataclass(frozen=True)
class OWindow:
    """Componentwise window: mu, nu (and optional iota, lam) are pairs of classes."""

    mu: Tuple[GDClass, GDClass]
    nu: Tuple[GDClass, GDClass]
    iota: Optional[Tuple[GDClass, GDClass]] = None
    lam: Optional[Tuple[GDClass, GDClass]] = None

    def swapped(self) -> "OWindow":
        return OWindow(self.nu, self.mu, self.lam, self.iota)

    def coordinate(self, j: int) -> FiltrationWindow:
        pick = lambda c: None if c is None else c[j - 1]
        return FiltrationWindow(self.mu[j - 1], self.nu[j - 1], pick(self.iota), pick(self.lam))


def pv_flat_window(theta: OElement, prec: int = 96) -> OWindow:
    """μ = ν = (1/(2 i ϑ^i), 1)."""
    t = theta.tau(1)

    def first(i):
        p = QNum(Fraction(1), Fraction(0), t.D)
        for _ in range(i):
            p = p * t
        return (p * (2 * i)).enclose(prec).reciprocal()

    mu = (GDClass(first, "infinitesimal", f"1/(2i·{theta}^i)"), GDClass.constant(1))
    return OWindow(mu, mu)


def _norm_class(w: Tuple[GDClass, GDClass]) -> GDClass:
    return trop_combine(w[0], w[1], "mul")


def o_membership(pair: OApproxPair, w: OWindow, depth: int = config.DEFAULT_DEPTH,
                 bound=config.EQUIV_BOUND) -> Verdict:
    """Coordinatewise membership; the growth window must have infinitesimal norm."""
    if len(w.mu) != 2 or len(w.nu) != 2:
        raise ValueError("quadratic windows have two coordinates")
    depth = min(depth, len(pair))
    if depth < 8:
        return Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "window shorter than 8"})
    nv = compare_class(_norm_class(w.mu), GDClass.constant(1), depth, bound)
    if nv.value is not Order.LESS:
        raise NormWindowNotInfinitesimal(f"N(mu) is {nv.value.value} against 1")
    out = []
    for j in (1, 2):
        shim = ApproxPair(pair.z.coord(j), tuple(a.tau(j).enclose_rel(64) for a in pair.denoms),
                          tuple(a.tau(j).enclose_rel(64) for a in pair.numers),
                          tuple(e[j - 1] for e in pair.errors))
        out.append(membership(shim, w.coordinate(j), depth, bound))
    values = [v.value for v in out]
    witness = {"coordinates": [v.value.value for v in out]}
    if Order.GREATER in values:
        j = values.index(Order.GREATER) + 1
        return Verdict(Order.GREATER, depth, {**witness, "coordinate": j, **out[j - 1].witness})
    if all(v is Order.EQUIVALENT for v in values):
        return Verdict(Order.EQUIVALENT, depth, witness)
    return Verdict(Order.UNDECIDED, depth, witness)


def antiprime_splitting(theta: OElement, k: int = 48, depth: int = 40, bound=10) -> Tuple[bool, dict]:
    """ϑ has bounded quotients over Q while pv_pair(ϑ) is flat member-evidence over the field.

    The growth load on the first coordinate is 1/(2i), which only leaves a
    bounded band of width 10 (not 2^16) within a few dozen indices.
    """
    report = classify_stream(theta.tau(1).source(), depth)
    verdict = o_membership(pv_pair(theta, k), pv_flat_window(theta), depth, bound)
    bounded = report.quotient_bound != "ESCAPING"
    holds = bounded and verdict.value is Order.EQUIVALENT
    return holds, {"quotientBound": report.quotient_bound, "flatVerdict": verdict.value.value}


# ---------------------------------------------------------------------------
# pushdowns


@dataclass(frozen=True)
class Pushdown:
    mode: str
    pair: ApproxPair
    indices: Dict[str, GDClass] = field(default_factory=dict)
    verdict: Optional[Verdict] = None
    flags: Tuple[str, ...] = ()
    skipped: Tuple[int, ...] = ()


def _scalar_error(x: RealSource, n: int, k: int, precision: int) -> Interval:
    e = x.exact()
    if e is not None:
        return Interval(n * e - k)
    prec = precision + 16 + abs(n).bit_length()
    while True:
        iv = x.enclose(prec) * n - k
        if iv.excludes_zero() and iv.width * (1 << precision) <= abs(iv).lo or prec > config.PREC_CAP:
            return iv
        prec *= 2


def _identity(direct: Interval, formula: Interval, what: str, i: int):
    if not direct.intersects(formula):
        raise IdentityViolated(f"{what} error identity fails at index {i}")


def push_trace_norm(pair: OApproxPair, mode: str, w: Optional[OWindow] = None,
                    depth: int = config.DEFAULT_DEPTH, precision: int = 64,
                    bound=config.EQUIV_BOUND) -> Pushdown:
    """Push an O-pair down to Z by the trace or the norm.

    trace: needs a diagonal target θ; the image errors are ε_1 + ε_2, with decay
    index Tr(ν) = max and growth index tr(μ) = min.
    norm: target N(z) = z1 z2; the error expands as
    N(ε) + α⊥_1 ε_2 + α⊥_2 ε_1, and the window must have ν = σ(μ).
    """
    if mode == "trace":
        return _push_trace(pair, w, depth, precision, bound)
    if mode == "norm":
        return _push_norm(pair, w, depth, precision, bound)
    raise ValueError(f"unknown pushdown mode {mode!r}")


def _push_trace(pair, w, depth, precision, bound) -> Pushdown:
    if not pair.z.is_diagonal:
        raise ValueError("the trace pushdown needs a diagonal target")
    x = pair.z.z1
    ds, ns, es, skipped = [], [], [], []
    for i, (a, d, e) in enumerate(zip(pair.denoms, pair.numers, pair.errors), 1):
        n, k = a.trace(), d.trace()
        if n == 0:
            skipped.append(i)
            continue
        direct = _scalar_error(x, n, k, precision)
        _identity(direct, e[0] + e[1], "trace", i)
        ds.append(n)
        ns.append(k)
        es.append(direct)
    out = ApproxPair(x, tuple(ds), tuple(ns), tuple(es), skipped=tuple(skipped))
    indices, verdict = {}, None
    if w is not None:
        indices["growth"] = trop_combine(w.mu[0], w.mu[1], "sub")
        indices["decay"] = trop_combine(w.nu[0], w.nu[1], "add")
        if w.iota is not None:
            indices["fine"] = trop_combine(w.iota[0], w.iota[1], "add")
        verdict = membership(out, FiltrationWindow(indices["growth"], indices["decay"], indices.get("fine")),
                             depth, bound)
    return Pushdown("trace", out, indices, verdict, (), tuple(skipped))


def _push_norm(pair, w, depth, precision, bound) -> Pushdown:
    z = pair.z
    ez1, ez2 = z.exact1, z.exact2
    if ez1 is not None and ez2 is not None:
        target = (ez1 * ez2).source()
    else:
        target = z.z1 * z.z2
    ds, ns, es = [], [], []
    for i, (a, d, e) in enumerate(zip(pair.denoms, pair.numers, pair.errors), 1):
        n, k = a.norm(), d.norm()
        direct = _scalar_error(target, n, k, precision)
        formula = e[0] * e[1] + d.tau(1).enclose(precision + 16) * e[1] + d.tau(2).enclose(precision + 16) * e[0]
        _identity(direct, formula, "norm", i)
        ds.append(n)
        ns.append(k)
        es.append(direct)
    out = ApproxPair(target, tuple(ds), tuple(ns), tuple(es))
    flags = ("unit-norms",) if all(abs(n) == 1 for n in ds) else ()
    indices, verdict = {}, None
    if w is not None:
        dd = min(depth, len(pair))
        if not (_same_class(w.nu[0], w.mu[1], dd) and _same_class(w.nu[1], w.mu[0], dd)):
            raise WindowHypothesisUnmet("the decay window must be the conjugate-swapped growth window")
        indices["growth"] = _norm_class(w.mu)
        if w.iota is not None:
            indices["fine"] = _norm_class(w.iota)
            indices["decay"] = trop_combine(w.iota[0], w.iota[1], "add")
        verdict = _norm_hypothesis(pair, w, depth, bound)
    return Pushdown("norm", out, indices, verdict, flags)


def _norm_hypothesis(pair: OApproxPair, w: OWindow, depth: int, bound) -> Verdict:
    """Membership of the O-pair in the σ-swapped window; a partial hold is UNDECIDED."""
    depth = min(depth, len(pair))
    if depth < 8:
        return Verdict(Order.UNDECIDED, depth, {"depth": depth})
    tail = range(depth // 2 + 1, depth + 1)
    held = 0
    for i in tail:
        e = pair.errors[i - 1]
        if all(abs(e[j]).le(w.nu[j].term(i)) for j in (0, 1)):
            held += 1
    if held == 0:
        raise WindowHypothesisUnmet("no tail index satisfies the conjugate-swapped decay bound")
    if held < len(tail):
        return Verdict(Order.UNDECIDED, depth, {"held": held, "of": len(tail)})
    v = o_membership(pair, w, depth, bound)
    if v.value is Order.GREATER:
        raise WindowHypothesisUnmet(f"growth side fails: {v.witness}")
    return v


# ---------------------------------------------------------------------------
# componentwise composition


@dataclass(frozen=True)
class OComposition:
    product: OApproxPair
    sum: OApproxPair
    difference: OApproxPair
    verdict: Verdict


def _kpoint_op(z: KPoint, y: KPoint, op: str) -> KPoint:
    fn = {"mul": lambda a, b: a * b, "add": lambda a, b: a + b, "sub": lambda a, b: a - b}[op]
    coords = []
    for j in (1, 2):
        ea, eb = z.exact(j), y.exact(j)
        if ea is not None and eb is not None:
            q = fn(ea, eb)
            coords.append((q.source(), q))
        else:
            coords.append((fn(z.coord(j), y.coord(j)), None))
    if z.is_diagonal and y.is_diagonal:
        return KPoint(coords[0][0], coords[0][0], coords[0][1], coords[0][1])
    return KPoint(coords[0][0], coords[1][0], coords[0][1], coords[1][1])


def o_compose(pA: OApproxPair, pB: OApproxPair, wA: OWindow, wB: OWindow,
              depth: int = config.DEFAULT_DEPTH, precision: int = 64,
              bound=config.EQUIV_BOUND) -> OComposition:
    """The scalar composition run along both Minkowski coordinates."""
    if pA.K != pB.K:
        raise ValueError("pairs live in different fields")
    depth = min(depth, len(pA), len(pB))
    sw = wA.swapped()
    for j in (0, 1):
        if not (_same_class(wB.mu[j], sw.mu[j], depth) and _same_class(wB.nu[j], sw.nu[j], depth)):
            raise WindowMismatch("second window must be the first with growth and decay swapped")
    vA, vB = o_membership(pA, wA, depth, bound), o_membership(pB, wB, depth, bound)
    for side, v in (("A", vA), ("B", vB)):
        if v.value is Order.GREATER:
            raise MembershipFailed(side, v)
    K = pA.K
    zp, zs, zd = (_kpoint_op(pA.z, pB.z, op) for op in ("mul", "add", "sub"))
    parts = {"p": ([], [], []), "s": ([], [], []), "d": ([], [], [])}
    for i in range(min(len(pA), len(pB))):
        m, mp, em = pA.denoms[i], pA.numers[i], pA.errors[i]
        n, np_, en = pB.denoms[i], pB.numers[i], pB.errors[i]
        d = m * n
        cands = {"p": (zp, mp * np_), "s": (zs, mp * n + m * np_), "d": (zd, mp * n - m * np_)}
        for key, (z, num) in cands.items():
            errs = []
            for j in (1, 2):
                direct = _coord_error(z, j, d, num, precision, config.PREC_CAP)
                mj, nj = m.tau(j).enclose(precision + 16), n.tau(j).enclose(precision + 16)
                mpj, npj = mp.tau(j).enclose(precision + 16), np_.tau(j).enclose(precision + 16)
                e1, e2 = em[j - 1], en[j - 1]
                if key == "p":
                    formula = e1 * npj + mpj * e2 + e1 * e2
                elif key == "s":
                    formula = e1 * nj + mj * e2
                else:
                    formula = e1 * nj - mj * e2
                _identity(direct, formula, {"p": "product", "s": "sum", "d": "difference"}[key], i + 1)
                errs.append(direct)
            for lst, val in zip(parts[key], (d, num, tuple(errs))):
                lst.append(val)
    mk = lambda z, ps: OApproxPair(z, K, tuple(ps[0]), tuple(ps[1]), tuple(ps[2]))
    product = mk(zp, parts["p"])
    if vA.value is Order.UNDECIDED or vB.value is Order.UNDECIDED:
        verdict = Verdict(Order.UNDECIDED, depth, {"poisoned": True, "A": vA.value.value, "B": vB.value.value})
    else:
        tail = range(depth // 2 + 1, depth + 1)
        errs = [_imax(abs(product.errors[i - 1][0]), abs(product.errors[i - 1][1])) for i in tail]
        shrinking = all(errs[j + 1].le(errs[j]) or _is_zero(errs[j + 1]) for j in range(len(errs) - 1))
        if shrinking and errs[-1].lt(errs[0]) or all(_is_zero(e) for e in errs):
            verdict = Verdict(Order.EQUIVALENT, depth, {"lastError": errs[-1]})
        else:
            verdict = Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "errors do not shrink"})
    return OComposition(product, mk(zs, parts["s"]), mk(zd, parts["d"]), verdict)


def _imax(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))
