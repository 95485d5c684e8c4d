"""Approximation pairs and the scalar ideological calculus.

An approximation pair for a real θ is a list of nonzero integer denominators
n_i together with numerators n_i⊥ and certified error intervals
ε_i = n_i θ - n_i⊥.  Windows of growth/decay classes decide membership,
and two pairs with crossed windows compose into pairs for θη, θ+η and θ-η.
"""
from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from . import config
from .errors import (
    IdentityViolated,
    MalformedSpec,
    MembershipFailed,
    NotUnimodular,
    PoleHit,
    PrecisionExhausted,
    RationalInput,
    WindowMismatch,
    ZeroTheta,
)
from .gdcalc import GDClass, Order, Verdict, compare_class
from .interval import Interval, floor_frac
from .reals import (
    PQStream,
    RationalSource,
    RealSource,
    StreamSource,
    convergents,
    mobius_source,
    partial_quotients,
)


# ---------------------------------------------------------------------------
# pairs


@dataclass(frozen=True)
class ApproxPair:
    x: RealSource
    denoms: Tuple[int, ...]
    numers: Tuple[int, ...]
    errors: Tuple[Interval, ...]
    ties: Tuple[int, ...] = ()
    skipped: Tuple[int, ...] = ()

    def __len__(self):
        return len(self.denoms)

    def decay_class(self) -> GDClass:
        errs = self.errors
        return GDClass(lambda i: abs(errs[i - 1]), "infinitesimal", f"decay({self.x.label})")

    def growth_class(self) -> GDClass:
        ds = self.denoms
        return GDClass(lambda i: Fraction(1, abs(ds[i - 1])), "infinitesimal", f"growth({self.x.label})")

    def handle(self) -> str:
        h = hashlib.sha256(f"{self.x.label}|{self.denoms}".encode()).hexdigest()[:16]
        return h

    def to_json(self) -> dict:
        return {
            "indices": list(range(1, len(self) + 1)),
            "denoms": [str(n) for n in self.denoms],
            "numers": [str(n) for n in self.numers],
            "errLo": [str(e.lo) for e in self.errors],
            "errHi": [str(e.hi) for e in self.errors],
        }


_REGISTRY = {}
_REG_LOCK = threading.Lock()


def register_pair(pair: ApproxPair) -> str:
    h = pair.handle()
    with _REG_LOCK:
        _REGISTRY[h] = pair
    return h


def lookup_pair(handle: str) -> ApproxPair:
    with _REG_LOCK:
        if handle not in _REGISTRY:
            raise MalformedSpec(f"unknown pair handle {handle!r}")
        return _REGISTRY[handle]


def _fib_from(k: int):
    a, b = 0, 1
    while True:
        if k <= 0:
            yield a
        k -= 1
        a, b = b, a + b


def denominator_list(x: RealSource, denoms, count: Optional[int] = None,
                     cap: int = config.PREC_CAP) -> List[int]:
    """Resolve a denominator spec: a list, a callable, 'best', 'fib' or 'list:...'."""
    if isinstance(denoms, str):
        if denoms == "best":
            if count is None:
                raise ValueError("'best' needs a count")
            return [c.q for c in convergents(x, count + 1, cap)[1:]]
        if denoms == "fib":
            if count is None:
                raise ValueError("'fib' needs a count")
            gen = _fib_from(1)
            return [next(gen) for _ in range(count)]
        if denoms.startswith("list:"):
            return [int(t) for t in denoms[5:].split(",") if t.strip()]
        raise MalformedSpec(f"unknown denominator spec {denoms!r}")
    if callable(denoms):
        if count is None:
            raise ValueError("a generator spec needs a count")
        return [int(denoms(i)) for i in range(1, count + 1)]
    return [int(n) for n in denoms]


def _nearest(x: RealSource, n: int, cap: int) -> Tuple[int, bool]:
    """Nearest integer to n·x, ties to even; returns (k, tie)."""
    e = x.exact()
    if e is not None:
        v = n * e
        k = floor_frac(v + Fraction(1, 2))
        if v - floor_frac(v) == Fraction(1, 2):
            k = floor_frac(v)
            if k % 2:
                k += 1
            return k, True
        return k, False
    bits = 32 + abs(n).bit_length()
    while True:
        iv = x.enclose(bits) * n
        k = floor_frac(iv.mid + Fraction(1, 2))
        d = iv - k
        if d.gt(Fraction(-1, 2)) and d.lt(Fraction(1, 2)):
            return k, False
        if bits > cap:
            raise PrecisionExhausted(f"nearest integer to {n}·{x.label} undecided")
        bits *= 2


def enclose_error(x: RealSource, n: int, k: int, rel: int = 64, cap: int = config.PREC_CAP) -> Interval:
    """n·x - k with relative accuracy 2**-rel (exact when x is rational)."""
    e = x.exact()
    if e is not None:
        return Interval(n * e - k)
    bits = rel + 2 * abs(n).bit_length() + 16
    while True:
        err = x.enclose(bits) * n - k
        if err.excludes_zero() and err.width * (1 << rel) <= abs(err).lo:
            return err
        if bits > cap:
            raise PrecisionExhausted(f"error of {n}·{x.label} - {k} needs more than {cap} bits")
        bits *= 2


def attach(x: RealSource, denoms, precision: int = 64, count: Optional[int] = None,
           cap: int = config.PREC_CAP) -> ApproxPair:
    """Attach nearest-integer numerators and certified errors to denominators."""
    ns = denominator_list(x, denoms, count, cap)
    if any(n == 0 for n in ns):
        raise ValueError("denominators must be nonzero")
    numers, errors, ties = [], [], []
    for i, n in enumerate(ns, start=1):
        k, tie = _nearest(x, n, cap)
        if tie:
            ties.append(i)
        numers.append(k)
        errors.append(enclose_error(x, n, k, precision, cap))
    return ApproxPair(x, tuple(ns), tuple(numers), tuple(errors), tuple(ties))


def pair_from_numbers(x: RealSource, denoms: Sequence[int], numers: Sequence[int],
                      precision: int = 64, cap: int = config.PREC_CAP) -> ApproxPair:
    """A pair with caller-supplied numerators (errors computed directly)."""
    errors = tuple(enclose_error(x, n, k, precision, cap) for n, k in zip(denoms, numers))
    return ApproxPair(x, tuple(denoms), tuple(numers), errors)


# ---------------------------------------------------------------------------
# windows and membership


@dataclass(frozen=True)
class FiltrationWindow:
    mu: GDClass
    nu: GDClass
    iota: Optional[GDClass] = None
    lam: Optional[GDClass] = None

    def swapped(self) -> "FiltrationWindow":
        return FiltrationWindow(self.nu, self.mu, self.lam, self.iota)


def _envelope_falls(load: GDClass, tail, bound) -> bool:
    """Loads below 1/B on the tail whose maximum drops between its two halves."""
    terms = [load.term(i) for i in tail]
    if not all(t.lt(Fraction(1) / Fraction(bound)) for t in terms):
        return False
    h = len(terms) // 2
    return max(t.hi for t in terms[h:]) < max(t.lo for t in terms[:h])


def membership(pair: ApproxPair, w: FiltrationWindow, depth: int = config.DEFAULT_DEPTH,
               bound=config.EQUIV_BOUND) -> Verdict:
    """Member-evidence when |n_i|μ_i → 0 and |ε_i| ≤ ν_i on the tail half."""
    if len(pair) == 0:
        return Verdict(Order.EQUIVALENT, 0, {"empty": True})
    depth = min(depth, len(pair))
    if depth < 8:
        return Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "window shorter than 8"})
    ds = pair.denoms
    load = GDClass(lambda i: w.mu.term(i) * abs(ds[i - 1]), "unit", "growth-load")
    g = compare_class(load, GDClass.constant(1), depth, bound)
    tail = range(depth // 2 + 1, depth + 1)
    growth_ok: Optional[bool]
    if g.value is Order.LESS:
        growth_ok = True
        if w.iota is not None:
            for i in tail:
                t = load.term(i)
                if t.ge(w.iota.term(i)):
                    growth_ok = False
                    g = Verdict(Order.GREATER, depth, {"index": i, "fine": True})
                    break
                if not t.lt(w.iota.term(i)):
                    growth_ok = None
    elif g.value is Order.GREATER:
        growth_ok = False
    elif _envelope_falls(load, tail, bound):
        # step-shaped loads (repeated denominators) are not strictly monotone
        growth_ok = True
        g = Verdict(Order.LESS, depth, {"envelope": True})
        if w.iota is not None and not all(load.term(i).lt(w.iota.term(i)) for i in tail):
            growth_ok = None
    else:
        # a bounded load on a finite window is not a certified failure
        growth_ok = None
    decay_ok: Optional[bool] = True
    bad = None
    for i in tail:
        err = abs(pair.errors[i - 1])
        for cls in (w.nu, w.lam):
            if cls is None:
                continue
            c = cls.term(i)
            if err.gt(c):
                decay_ok, bad = False, i
            elif not err.le(c) and decay_ok:
                decay_ok = None
        if decay_ok is False:
            break
    if growth_ok is False:
        return Verdict(Order.GREATER, depth, {"side": "growth", "growth": g.value.value, **g.witness})
    if decay_ok is False:
        return Verdict(Order.GREATER, depth, {"side": "decay", "index": bad})
    if growth_ok and decay_ok:
        return Verdict(Order.EQUIVALENT, depth, {"growth": g.witness})
    return Verdict(Order.UNDECIDED, depth, {"depth": depth})


def slow_pair(x: RealSource, mu: GDClass, nu: GDClass, count: int,
              cap: int = config.PREC_CAP) -> ApproxPair:
    """Denominators from Dirichlet searches with N_i = ceil(1/ν_i)."""
    from .reals import dirichlet_find

    ds, ns = [], []
    for i in range(1, count + 1):
        N = max(2, -floor_frac(-(1 / nu.term(i).lo)))
        p, q = dirichlet_find(x, N, cap)
        ds.append(q)
        ns.append(p)
    return pair_from_numbers(x, ds, ns, cap=cap)


# ---------------------------------------------------------------------------
# duality and the PGL2 action


@dataclass(frozen=True)
class Matrix2:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if abs(self.det) != 1:
            raise NotUnimodular(f"det = {self.det}")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, o: "Matrix2") -> "Matrix2":
        return Matrix2(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                       self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)


def _check_identity(direct: Interval, formula: Interval, what: str, i: int):
    if not direct.intersects(formula):
        raise IdentityViolated(f"{what} fails at index {i}: {direct} vs {formula}")


def dual(pair: ApproxPair, precision: int = 64, cap: int = config.PREC_CAP) -> ApproxPair:
    """The pair (n⊥, n) for 1/θ; errors checked against -ε/θ."""
    if pair.x.sign(cap) == 0:
        raise ZeroTheta("θ = 0 has no dual")
    y = pair.x.inverse()
    ds, ns, errs, skipped = [], [], [], []
    for i, (n, k, e) in enumerate(zip(pair.denoms, pair.numers, pair.errors), start=1):
        if k == 0:
            skipped.append(i)
            continue
        direct = enclose_error(y, k, n, precision, cap)
        formula = -e / pair.x.enclose(precision + 2 * abs(k).bit_length() + 16)
        _check_identity(direct, formula, "dual error law", i)
        ds.append(k)
        ns.append(n)
        errs.append(direct)
    return ApproxPair(y, tuple(ds), tuple(ns), tuple(errs), (), tuple(skipped))


def pgl2_act(A: Matrix2, pair: ApproxPair, precision: int = 64,
             cap: int = config.PREC_CAP) -> ApproxPair:
    """Act by A on θ and on (n⊥, n); the error becomes det(A)·ε/(cθ+d)."""
    x = pair.x
    den = x * RationalSource(Fraction(A.c)) + RationalSource(Fraction(A.d))
    try:
        s = den.sign(cap)
    except PrecisionExhausted as exc:
        raise PoleHit("cθ+d not certified nonzero") from exc
    if s == 0:
        raise PoleHit("cθ+d = 0")
    if (A.a, A.b, A.c, A.d) == (1, 0, 0, 1):
        y = x
    else:
        y = mobius_source(A.a, A.b, A.c, A.d, x)
    ds, ns, errs, skipped = [], [], [], []
    for i, (n, k, e) in enumerate(zip(pair.denoms, pair.numers, pair.errors), start=1):
        n2 = A.c * k + A.d * n
        k2 = A.a * k + A.b * n
        if n2 == 0:
            skipped.append(i)
            continue
        direct = enclose_error(y, n2, k2, precision, cap) if y is not x else e
        formula = e * A.det / den.enclose(precision + 16)
        _check_identity(direct, formula, "PGL2 error law", i)
        ds.append(n2)
        ns.append(k2)
        errs.append(direct)
    return ApproxPair(y, tuple(ds), tuple(ns), tuple(errs), (), tuple(skipped))


# ---------------------------------------------------------------------------
# ideological composition


@dataclass(frozen=True)
class Composition:
    product: ApproxPair
    sum: ApproxPair
    difference: ApproxPair
    verdict: Verdict


def compose_pairs(pA: ApproxPair, pB: ApproxPair, precision: int = 64,
                  cap: int = config.PREC_CAP) -> Tuple[ApproxPair, ApproxPair, ApproxPair]:
    """Product, sum and difference pairs with the error expansions checked per index."""
    k = min(len(pA), len(pB))
    x, y = pA.x, pB.x
    targets = (x * y, x + y, x - y)
    out = ([], [], [])
    for i in range(k):
        m, mp, em = pA.denoms[i], pA.numers[i], pA.errors[i]
        n, np_, en = pB.denoms[i], pB.numers[i], pB.errors[i]
        d = m * n
        numers = (mp * np_, mp * n + m * np_, mp * n - m * np_)
        formulas = (em * en + em * np_ + en * mp, em * n + en * m, em * n - en * m)
        for j in range(3):
            direct = enclose_error(targets[j], d, numers[j], precision, cap)
            _check_identity(direct, formulas[j], ("product", "sum", "difference")[j] + " error expansion", i + 1)
            out[j].append((d, numers[j], direct))
    pairs = tuple(
        ApproxPair(targets[j], tuple(t[0] for t in out[j]), tuple(t[1] for t in out[j]),
                   tuple(t[2] for t in out[j]))
        for j in range(3))
    return pairs


def _is_zero(iv: Interval) -> bool:
    return iv.lo == 0 and iv.hi == 0


def _same_class(u: Optional[GDClass], v: Optional[GDClass], depth: int) -> bool:
    if u is None or v is None:
        return u is None and v is None
    return all(u.term(i) == v.term(i) for i in range(1, depth + 1))


def ideo_compose(pA: ApproxPair, pB: ApproxPair, wA: FiltrationWindow, wB: FiltrationWindow,
                 depth: int = config.DEFAULT_DEPTH, precision: int = 64,
                 cap: int = config.PREC_CAP, bound=config.EQUIV_BOUND) -> Composition:
    """Compose pairs on θ and η whose windows are crossed (wB = wA with roles swapped)."""
    depth = min(depth, len(pA), len(pB))
    sw = wA.swapped()
    if not (_same_class(wB.mu, sw.mu, depth) and _same_class(wB.nu, sw.nu, depth)
            and _same_class(wB.iota, sw.iota, depth) and _same_class(wB.lam, sw.lam, depth)):
        raise WindowMismatch("second window must be the first with growth and decay swapped")
    vA = membership(pA, wA, depth, bound)
    vB = membership(pB, wB, depth, bound)
    for side, v in (("A", vA), ("B", vB)):
        if v.value is Order.GREATER:
            raise MembershipFailed(side, v)
    product, total, diff = compose_pairs(pA, pB, precision, cap)
    if vA.value is Order.UNDECIDED or vB.value is Order.UNDECIDED:
        verdict = Verdict(Order.UNDECIDED, depth, {"poisoned": True, "A": vA.value.value, "B": vB.value.value})
    else:
        # composed errors must decay on the tail half
        tail = range(depth // 2 + 1, depth + 1)
        errs = [abs(product.errors[i - 1]) for i in tail]
        shrinking = all(errs[j + 1].le(errs[j]) or _is_zero(errs[j + 1]) for j in range(len(errs) - 1))
        if shrinking and errs[-1].lt(errs[0]) or all(_is_zero(e) for e in errs):
            verdict = Verdict(Order.EQUIVALENT, depth, {"A": vA.value.value, "B": vB.value.value,
                                                        "lastError": errs[-1]})
        elif shrinking:
            verdict = Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "errors flat"})
        else:
            verdict = Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "errors oscillate"})
    return Composition(product, total, diff, verdict)


# ---------------------------------------------------------------------------
# quotient windows, best intervals and composability


def _quotient_window(x: RealSource, count: int, budget: int = config.STREAM_BIT_BUDGET
                     ) -> Tuple[List[int], List[int]]:
    """(a_0..a_L, q_0..q_L) with L < count, stopping at the bit budget."""
    if isinstance(x, StreamSource):
        terms = x.stream.prefix_within(count, budget)
        qs = [q for _, q in x.stream.convergents(len(terms))]
        return terms, qs
    if x.exact() is not None:
        raise RationalInput(f"{x.label} is rational")
    terms = partial_quotients(x, count)
    qs = [c.q for c in convergents(x, len(terms))]
    return terms, qs


def _escapes(vals: List[int], factor=config.ESCAPE_FACTOR) -> bool:
    if len(vals) < 2:
        return False
    h = len(vals) // 2
    return max(vals[h:]) >= factor * max(vals[:h])


@dataclass(frozen=True)
class BestInterval:
    nu: GDClass
    mu: GDClass
    infinite_pq: Verdict
    indices: Tuple[int, ...]

    @property
    def escaping(self) -> Optional[bool]:
        v = self.infinite_pq.value
        return None if v is Order.UNDECIDED else v is Order.GREATER


def best_interval(x: RealSource, subseq, depth: int = config.DEFAULT_DEPTH,
                  cap: int = config.PREC_CAP) -> BestInterval:
    """Classes of 1/q_{n_i} and |ε(q_{n_i})| along a selection, plus the escape test.

    infinitePQ is GREATER when the selected quotients a_{n_i+1} are strictly
    increasing and escape on the window, LESS when they are not increasing,
    UNDECIDED when increasing without escaping.
    """
    terms, qs = _quotient_window(x, depth + 2)
    if len(terms) < 3:
        raise RationalInput(f"{x.label} has too few partial quotients")
    last = len(terms) - 2
    if subseq == "all" or subseq is None:
        sel = list(range(0, last + 1))
    elif callable(subseq):
        sel = [n for n in range(0, last + 1) if subseq(n)]
    else:
        sel = [n for n in subseq if 0 <= n <= last]
    sel = sel[:depth]
    if len(sel) < 2:
        raise ValueError("selection leaves fewer than two indices on the window")
    quot = [terms[n + 1] for n in sel]
    inc = all(quot[j + 1] > quot[j] for j in range(len(quot) - 1))
    if not inc:
        v = Verdict(Order.LESS, len(sel), {"quotients": quot})
    elif _escapes(quot):
        v = Verdict(Order.GREATER, len(sel), {"quotients": quot})
    else:
        v = Verdict(Order.UNDECIDED, len(sel), {"depth": len(sel), "quotients": quot})
    sel_q = [qs[n] for n in sel]
    sel_next = [(qs[n + 1], qs[n - 1] if n >= 1 else 0) for n in sel]

    def eps(i):
        # |ε(q_n)| lies between 1/(q_{n+1}+q_n) and 1/q_{n+1}
        q1, _ = sel_next[i - 1]
        qn = sel_q[i - 1]
        return Interval(Fraction(1, q1 + qn), Fraction(1, q1))

    mu = GDClass(lambda i: Fraction(1, sel_q[i - 1]), "infinitesimal", f"muBreve({x.label})")
    nu = GDClass(eps, "infinitesimal", f"nuBreve({x.label})")
    return BestInterval(nu, mu, v, tuple(sel))


def escaping_positions(terms: List[int]) -> List[int]:
    """n >= 1 where a_{n+1} is a strict record among a_1..a_{n+1} and at least 2."""
    out, best = [], 0
    for n in range(0, len(terms) - 1):
        a = terms[n + 1]
        if n >= 1 and a > best and a >= 2:
            out.append(n)
        best = max(best, a)
    return out


def flat_composable(x: RealSource, y: RealSource, depth: int = config.DEFAULT_DEPTH) -> Verdict:
    """COMPOSABLE when escaping best classes interleave, INCOMPOSABLE-evidence when they cannot.

    Verdict values: EQUIVALENT stands for COMPOSABLE, GREATER for
    INCOMPOSABLE-evidence; the witness carries the label.
    """
    ta, qa = _quotient_window(x, depth + 1)
    tb, qb = _quotient_window(y, depth + 1)
    bounded = [not _escapes(t[1:]) for t in (ta, tb)]
    if any(bounded):
        return Verdict(Order.GREATER, depth, {"label": "INCOMPOSABLE", "reason": "bounded quotients",
                                              "bounded": bounded})
    ea, eb = escaping_positions(ta), escaping_positions(tb)
    hits = []
    for n in ea:
        for m in eb:
            if qa[n] < qb[m + 1] <= qa[n + 1] or qb[m] < qa[n + 1] <= qb[m + 1]:
                hits.append((n, m))
    w = {"escapingX": ea, "escapingY": eb, "interleavings": hits}
    if len(hits) >= 2:
        return Verdict(Order.EQUIVALENT, depth, {"label": "COMPOSABLE", **w})
    if not hits:
        return Verdict(Order.GREATER, depth, {"label": "INCOMPOSABLE", **w})
    return Verdict(Order.UNDECIDED, depth, {"label": "UNDECIDED", "depth": depth, **w})


def composability_label(v: Verdict) -> str:
    return v.witness.get("label", "UNDECIDED")


# ---------------------------------------------------------------------------
# stream classification


@dataclass(frozen=True)
class StreamReport:
    quotient_bound: Union[int, str]
    resolute: bool
    abyssal: bool
    kappa: Optional[Interval]
    liouville_evidence: bool
    window: int

    def to_json(self) -> dict:
        return {
            "quotientBound": self.quotient_bound,
            "resolute": self.resolute,
            "abyssal": self.abyssal,
            "kappaEstimate": list(self.kappa.to_strings()) if self.kappa else None,
            "liouvilleEvidence": self.liouville_evidence,
            "window": self.window,
        }


def _small_runs(terms: List[int], small: int) -> List[Tuple[int, int]]:
    runs, start = [], None
    for i, a in enumerate(terms):
        if a <= small:
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i - start))
            start = None
    if start is not None:
        runs.append((start, len(terms) - start))
    return runs


def kappa_intervals(terms: List[int], qs: List[int]) -> List[Tuple[int, Interval]]:
    """κ_i = log(1/|ε(q_i)|)/log q_i from the two-sided quotient bounds."""
    out = []
    for i in range(1, len(terms) - 1):
        q, qm = qs[i], qs[i - 1]
        if q < 2:
            continue
        a = terms[i + 1]
        lo_err = Fraction(1, (a + 1) * q + qm)
        hi_err = Fraction(1, a * q + qm)
        lq = Interval(q).log()
        num = Interval(1 / hi_err, 1 / lo_err).log()
        out.append((i, num / lq))
    return out


def classify_stream(x: RealSource, depth: int = config.DEFAULT_DEPTH) -> StreamReport:
    terms, qs = _quotient_window(x, depth + 1)
    body = terms[1:]
    if not body:
        raise RationalInput(f"{x.label} has no partial quotients past a_0")
    h = len(body) // 2
    escaping = _escapes(body)
    qbound: Union[int, str] = "ESCAPING" if escaping else max(body)
    tail = body[h:]
    resolute = escaping and all(tail[j + 1] > tail[j] for j in range(len(tail) - 1))
    runs = _small_runs(body, config.ABYSS_BOUND)
    if runs and runs[-1][0] + runs[-1][1] == len(body):
        runs = runs[:-1]  # a run cut off by the window end has unknown length
    lengths = [r[1] for r in runs]
    abyssal = len(runs) >= 3 and all(lengths[j + 1] > lengths[j] for j in range(len(lengths) - 1))
    kap = kappa_intervals(terms, qs)
    kappa = None
    evidence = False
    if kap:
        hk = len(kap) // 2
        kappa = max((k for _, k in kap[hk:]), key=lambda iv: iv.hi)
        if hk >= 1:
            head_max = max(k.hi for _, k in kap[:hk])
            tail_max = max(k.lo for _, k in kap[hk:])
            evidence = tail_max >= head_max + 1
    return StreamReport(qbound, resolute, abyssal, kappa, evidence, len(body))


# ---------------------------------------------------------------------------
# the incomposable block construction


@dataclass(frozen=True)
class BlockSeed:
    n1: int = 4
    stages: int = 4
    kappa: Fraction = Fraction(1)
    kappa_eta: Fraction = Fraction(1)

    @staticmethod
    def parse(text: str) -> "BlockSeed":
        text = text.strip()
        if not text:
            return BlockSeed()
        if text.isdigit():
            return BlockSeed(n1=int(text))
        kw = {}
        for part in text.split(","):
            k, _, v = part.partition("=")
            k = k.strip()
            if k in ("n1", "stages"):
                kw[k] = int(v)
            elif k in ("kappa", "kappa_eta"):
                kw[k] = Fraction(v)
            else:
                raise MalformedSpec(f"unknown block seed key {k!r}")
        return BlockSeed(**kw)


class _BlockBuilder:
    """Builds both quotient sequences stage by stage, on demand and deterministically."""

    def __init__(self, seed: BlockSeed):
        if seed.n1 < 1 or seed.kappa < 1 or seed.kappa_eta < 1:
            raise MalformedSpec("block seed needs n1 >= 1 and exponents >= 1")
        self.seed = seed
        self.a = [1]
        self.b = [1]
        self.qa = [1]
        self.qb = [1]
        self.certs: List[dict] = []
        self.jumps_a: List[int] = []
        self.jumps_b: List[int] = []
        self._lock = threading.RLock()

    @staticmethod
    def _push(terms, qs, a):
        terms.append(a)
        if len(qs) == 1:
            qs.append(a)
        else:
            qs.append(a * qs[-1] + qs[-2])

    @staticmethod
    def _jump(q: int, other_q: int, room: int, k: int, kappa: Fraction, prev: int) -> int:
        """Jump value: escaping, exponent-driven, and large enough that the other
        stream's next block of ones finds `room` denominators below the new q."""
        a = max(3 * 2 ** (k - 1), prev + 1)
        if kappa != 1:
            a = max(a, iroot_frac_power(q, kappa - 1))
        # a block of ones at most doubles q per step
        need = -((-(other_q << (room + 1))) // q)
        return max(a, need)

    def _ones_until(self, terms, qs, target: int, count: int):
        """Append ones until `count` new q's lie below target and `count` lie above."""
        below = above = 0
        while below < count or above < count:
            self._push(terms, qs, 1)
            if qs[-1] < target:
                below += 1
            else:
                above += 1
        return below, above

    def stage(self, k: int):
        with self._lock:
            while len(self.certs) < k:
                self._build(len(self.certs) + 1)

    def _build(self, k: int):
        s = self.seed
        Nk = s.n1 * 2 ** (k - 1)
        if k == 1:
            for _ in range(2 * s.n1):
                self._push(self.a, self.qa, 1)
        else:
            self._ones_until(self.a, self.qa, self.qb[-1], Nk)
        P = len(self.a) - 1
        A = self._jump(self.qa[P], self.qb[-1], Nk, k, s.kappa, self.a[self.jumps_a[-1] + 1] if self.jumps_a else 1)
        self._push(self.a, self.qa, A)
        self.jumps_a.append(P)
        target = self.qa[-1]
        below, above = self._ones_until(self.b, self.qb, target, Nk)
        Q = len(self.b) - 1
        B = self._jump(self.qb[Q], self.qa[-1], 2 * Nk, k, s.kappa_eta, self.b[self.jumps_b[-1] + 1] if self.jumps_b else 1)
        self._push(self.b, self.qb, B)
        self.jumps_b.append(Q)
        self.certs.append({
            "stage": k,
            "N": Nk,
            "thetaJump": P,
            "etaJump": Q,
            "qTheta": self.qa[P],
            "qThetaPlus": self.qa[P + 1],
            "qEta": self.qb[Q],
            "qEtaPlus": self.qb[Q + 1],
            "etaBelow": below,
            "etaAbove": above,
        })

    def term(self, which: int, i: int) -> int:
        seq = self.a if which == 0 else self.b
        k = len(self.certs)
        while len(seq) <= i + 1:
            k += 1
            self.stage(k)
        return seq[i]


def iroot_frac_power(q: int, e: Fraction) -> int:
    """floor(q**e) for rational e > 0."""
    from .interval import iroot

    return iroot(q ** e.numerator, e.denominator)


_BUILDERS = {}
_BUILDER_LOCK = threading.Lock()


def _builder(seed: BlockSeed) -> _BlockBuilder:
    with _BUILDER_LOCK:
        if seed not in _BUILDERS:
            _BUILDERS[seed] = _BlockBuilder(seed)
        return _BUILDERS[seed]


@dataclass(frozen=True)
class BlockPair:
    theta: PQStream
    eta: PQStream
    seed: BlockSeed

    @property
    def horizon(self) -> int:
        """Index of the last jump of either stream within the seeded stages."""
        b = _builder(self.seed)
        b.stage(self.seed.stages)
        return max(b.jumps_a[self.seed.stages - 1], b.jumps_b[self.seed.stages - 1]) + 1

    def certificates(self, stages: Optional[int] = None) -> List[dict]:
        b = _builder(self.seed)
        k = stages or self.seed.stages
        b.stage(k)
        return [dict(c) for c in b.certs[:k]]


def _block_factory(seed: BlockSeed, which: int):
    def factory():
        def it():
            b = _builder(seed)
            i = 0
            while True:
                yield b.term(which, i)
                i += 1
        return it()
    return factory


def build_incomposable_pair(seed: Union[BlockSeed, str, None] = None) -> BlockPair:
    """Two streams whose escaping best classes never interleave."""
    if seed is None:
        seed = BlockSeed()
    elif isinstance(seed, str):
        seed = BlockSeed.parse(seed)
    theta = PQStream("blockpair", (seed, "theta"), _block_factory(seed, 0))
    eta = PQStream("blockpair", (seed, "eta"), _block_factory(seed, 1))
    return BlockPair(theta, eta, seed)


def blockpair_source(text: str) -> StreamSource:
    """Source for 'blockpair:<seed>[:eta]'."""
    which = "theta"
    if text.endswith(":eta") or text.endswith(":theta"):
        text, _, which = text.rpartition(":")
    bp = build_incomposable_pair(BlockSeed.parse(text))
    stream = bp.theta if which == "theta" else bp.eta
    return StreamSource(stream, f"blockpair:{text}:{which}")
