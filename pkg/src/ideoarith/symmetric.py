"""θ-norms, the Lorentzian pairing, Zeckendorf tools and the Littlewood scan."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import config
from .errors import CriterionMismatch, MixedTheta, PoleHit, PrecisionExhausted
from .gdcalc import Order, Verdict
from .ideology import ApproxPair, Matrix2, attach, enclose_error, pgl2_act
from .interval import Interval, floor_frac
from .reals import RealSource, SurdSource


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# norms and the pairing


def theta_norm(pair: ApproxPair, indices: Optional[Sequence[int]] = None, prec: int = 64,
               kappa: Fraction = Fraction(1)) -> List[Interval]:
    """(|n|^κ·|ε(n)|)^{1/2} per index (1-based); κ = 1 gives the θ-norm."""
    if indices is None:
        indices = range(1, len(pair) + 1)
    out = []
    for i in indices:
        sq = _kappa_load(pair.denoms[i - 1], pair.errors[i - 1], kappa, prec)
        out.append(sq.sqrt(prec))
    return out


def _kappa_load(n: int, err: Interval, kappa: Fraction, prec: int) -> Interval:
    kappa = Fraction(kappa)
    base = Interval(abs(n)) ** kappa.numerator
    if kappa.denominator != 1:
        base = base.root(kappa.denominator, prec + abs(n).bit_length())
    return base * abs(err)


@dataclass(frozen=True)
class LorentzSample:
    index: int
    value: Interval
    tag: str
    sigma: Tuple[int, int]


def _tag(v: Interval) -> str:
    s = v.sign()
    if s == 0:
        return "light-like"
    if s == 1:
        return "time-like"
    if s == -1:
        return "space-like"
    return "undecided"


def lorentz_pairing(pA: ApproxPair, pB: ApproxPair, i: int) -> LorentzSample:
    """½(m ε(n) + n ε(m)) at index i (1-based)."""
    if pA.x.label != pB.x.label:
        raise MixedTheta(f"{pA.x.label} vs {pB.x.label}")
    m, em = pA.denoms[i - 1], pA.errors[i - 1]
    n, en = pB.denoms[i - 1], pB.errors[i - 1]
    value = (en * m + em * n) / 2
    s_err = em.sign()
    sigma = (_sgn(m), s_err if s_err is not None else 0)
    return LorentzSample(i, value, _tag(value), sigma)


def _pair_value(pA: ApproxPair, i: int, pB: ApproxPair, j: int) -> Interval:
    return (pB.errors[j - 1] * pA.denoms[i - 1] + pA.errors[i - 1] * pB.denoms[j - 1]) / 2


def add_pairs(pA: ApproxPair, pB: ApproxPair, precision: int = 64) -> ApproxPair:
    """Entrywise sum (m+n, m⊥+n⊥) on the same θ; its error is ε(m)+ε(n)."""
    if pA.x.label != pB.x.label:
        raise MixedTheta(f"{pA.x.label} vs {pB.x.label}")
    ds, ns, errs = [], [], []
    for m, mp, em, n, np_, en in zip(pA.denoms, pA.numers, pA.errors, pB.denoms, pB.numers, pB.errors):
        ds.append(m + n)
        ns.append(mp + np_)
        errs.append(em + en)
    return ApproxPair(pA.x, tuple(ds), tuple(ns), tuple(errs))


def isometry_defect(A: Matrix2, pA: ApproxPair, pB: ApproxPair, i: int,
                    precision: int = 64) -> Tuple[Interval, Interval, Interval]:
    """([A m, A n] at Aθ, [m, n] at θ, c·ε(m)ε(n)/(cθ+d)).

    The exact relation is [A m, A n] = det(A)·([m, n] - defect).
    """
    qA, qB = pgl2_act(A, pA, precision), pgl2_act(A, pB, precision)
    if i in qA.skipped or i in qB.skipped:
        raise PoleHit(f"A sends denominator {i} to 0")
    # the image pairs drop skipped indices, so positions shift
    iA = i - sum(1 for k in qA.skipped if k < i)
    iB = i - sum(1 for k in qB.skipped if k < i)
    lhs = _pair_value(qA, iA, qB, iB)
    rhs = lorentz_pairing(pA, pB, i).value
    den = pA.x.enclose(precision + 16) * A.c + A.d
    defect = pA.errors[i - 1] * pB.errors[i - 1] * A.c / den
    return lhs, rhs, defect


def symmetric_verdict(pair: ApproxPair, depth: int = config.DEFAULT_DEPTH,
                      bound=config.EQUIV_BOUND, kappa: Fraction = Fraction(1)) -> Verdict:
    """EQUIVALENT when |n|^κ|ε| stays in a band [c, C] with C/c ≤ bound on the tail half.

    LESS means the products fall toward 0, GREATER that they escape.
    """
    depth = min(depth, len(pair))
    if depth < 8:
        return Verdict(Order.UNDECIDED, depth, {"depth": depth})
    vals = [_kappa_load(pair.denoms[i - 1], pair.errors[i - 1], kappa, 96)
            for i in range(depth // 2 + 1, depth + 1)]
    band = Interval.hull_of(*vals)
    B = Fraction(bound)
    if band.lo > 0 and band.hi <= B * band.lo:
        return Verdict(Order.EQUIVALENT, depth, {"band": band})
    dec = all(vals[j + 1].lt(vals[j]) for j in range(len(vals) - 1))
    inc = all(vals[j + 1].gt(vals[j]) for j in range(len(vals) - 1))
    if dec:
        return Verdict(Order.LESS, depth, {"band": band})
    if inc:
        return Verdict(Order.GREATER, depth, {"band": band})
    return Verdict(Order.UNDECIDED, depth, {"depth": depth, "band": band})


# ---------------------------------------------------------------------------
# Zeckendorf machinery (F_2 = 1, F_3 = 2, ...)


def fib(k: int) -> int:
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


@dataclass(frozen=True)
class Zeck:
    N: int
    indices: Tuple[int, ...]

    @property
    def zdeg(self) -> int:
        return self.indices[-1] - self.indices[0]


def zeckendorf(N: int) -> Zeck:
    if N < 1:
        raise ValueError("N must be positive")
    fibs = [1, 2]  # F_2, F_3
    while fibs[-1] <= N:
        fibs.append(fibs[-1] + fibs[-2])
    out = []
    rest = N
    for j in range(len(fibs) - 1, -1, -1):
        if fibs[j] <= rest:
            out.append(j + 2)
            rest -= fibs[j]
    return Zeck(N, tuple(sorted(out)))


def golden_criterion(z: Zeck, n: int) -> bool:
    """The Zeckendorf test for ‖Nφ‖ < φ^{-n}."""
    i1 = z.indices[0]
    if i1 >= n + 1:
        return True
    if i1 == n and len(z.indices) >= 2:
        gap = z.indices[1] - i1
        return gap >= 3 and gap % 2 == 1
    return False


def _zphi_sign(a: int, b: int) -> int:
    """Sign of a + bφ with φ = (1+√5)/2, i.e. of (2a+b) + b√5."""
    u, v = 2 * a + b, b
    if u >= 0 and v >= 0:
        return _sgn(u + v)
    if u <= 0 and v <= 0:
        return -_sgn(-(u + v))
    # opposite signs: compare u^2 with 5 v^2
    return _sgn(u) if u * u > 5 * v * v else (_sgn(v) if u * u < 5 * v * v else 0)


def golden_distance_less(N: int, n: int) -> bool:
    """Exact decision of ‖Nφ‖ < φ^{-n} in Z[φ]."""
    k = (N + math.isqrt(5 * N * N) + 1) // 2
    # adjust k until |Nφ - k| < 1/2: sign(2(Nφ-k) - 1) < 0 and sign(2(Nφ-k) + 1) > 0
    while _zphi_sign(-2 * k - 1, 2 * N) > 0:
        k += 1
    while _zphi_sign(-2 * k + 1, 2 * N) < 0:
        k -= 1
    s = _zphi_sign(-k, N)
    # |Nφ - k| = s(Nφ - k); φ^{-n} = (-1)^n (F_{n+1} - F_n φ)
    sg = -1 if n % 2 else 1
    fa, fb = sg * fib(n + 1), -sg * fib(n)
    # φ^{-n} - |Nφ - k| = (fa + fb φ) - s(-k + Nφ)
    return _zphi_sign(fa + s * k, fb - s * N) > 0


@dataclass(frozen=True)
class GoldenCertificate:
    criterion: bool
    direct: bool
    zeck: Zeck


def golden_error_test(N: int, n: int) -> Tuple[bool, GoldenCertificate]:
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    z = zeckendorf(N)
    crit = golden_criterion(z, n)
    direct = golden_distance_less(N, n)
    if crit != direct:
        raise CriterionMismatch(f"N={N}, n={n}: criterion {crit}, direct {direct}")
    return crit, GoldenCertificate(crit, direct, z)


_PHI = (1 + 5 ** 0.5) / 2


def golden_sweep(n_max_N: int, n_max: int) -> dict:
    """Compare the criterion with direct evaluation for all N ≤ n_max_N, n ≤ n_max.

    A float64 pass settles every case whose margin exceeds a rigorous error
    bound; the rest fall back to exact arithmetic in Z[φ].
    """
    Ns = np.arange(1, n_max_N + 1, dtype=np.float64)
    prod = Ns * _PHI
    dist = np.abs(prod - np.rint(prod))
    # fl(φ) is within 2^-53 relative of φ and N·fl(φ) adds one rounding
    err = n_max_N * 4.0 * 2.0 ** -52
    zs = [zeckendorf(N).indices for N in range(1, n_max_N + 1)]
    i1 = np.array([z[0] for z in zs])
    gap = np.array([z[1] - z[0] if len(z) > 1 else 0 for z in zs])
    mismatches, exact_checks = [], 0
    for n in range(1, n_max + 1):
        thr = _PHI ** -n
        margin = dist - thr
        crit = (i1 >= n + 1) | ((i1 == n) & (gap >= 3) & (gap % 2 == 1))
        unsure = np.abs(margin) <= err + 1e-15
        direct = margin < 0
        for idx in np.nonzero(unsure)[0]:
            exact_checks += 1
            direct[idx] = golden_distance_less(int(idx) + 1, n)
        for idx in np.nonzero(crit != direct)[0]:
            mismatches.append((int(idx) + 1, n))
    return {"mismatches": mismatches, "exact": exact_checks, "checked": n_max_N * n_max}


def golden_symmetric_verdict(seq: Sequence[int], depth: int = config.DEFAULT_DEPTH,
                             bound=config.EQUIV_BOUND) -> Verdict:
    """Bounded Zeckendorf degree, cross-checked against the attached φ-pair."""
    depth = min(depth, len(seq))
    if depth < 8:
        return Verdict(Order.UNDECIDED, depth, {"depth": depth})
    if any(s <= 0 for s in seq[:depth]):
        raise ValueError("entries must be positive")
    degs = [zeckendorf(s).zdeg for s in seq[:depth]]
    h = depth // 2
    head, tail = max(degs[:h]), max(degs[h:])
    inc_tail = degs[-1] > head and all(degs[j + 1] >= degs[j] for j in range(h, depth - 1))
    if tail <= head:
        zv = Order.EQUIVALENT
    elif inc_tail:
        zv = Order.GREATER
    else:
        zv = Order.UNDECIDED
    phi = SurdSource(1, 1, 5, 2)
    sv = symmetric_verdict(attach(phi, list(seq[:depth])), depth, bound)
    agree = (zv is Order.EQUIVALENT) == (sv.value is Order.EQUIVALENT)
    w = {"zdegHead": head, "zdegTail": tail, "pairVerdict": sv.value.value}
    if zv is Order.UNDECIDED or sv.value is Order.UNDECIDED or not agree:
        return Verdict(Order.UNDECIDED, depth, {**w, "agree": agree, "depth": depth})
    return Verdict(zv, depth, w)


# ---------------------------------------------------------------------------
# the Littlewood scan


@dataclass(frozen=True)
class ScanResult:
    argmin: int
    value: Interval
    trace: Tuple[dict, ...]


class _Fixed:
    """A real as an integer bracket [lo, hi]·2^-P, exact for rationals."""

    def __init__(self, x: RealSource, P: int):
        self.P = P
        e = x.exact()
        self.exact = e
        if e is None:
            iv = x.enclose(P + 4)
            self.lo = floor_frac(iv.lo * (1 << P))
            self.hi = -floor_frac(-iv.hi * (1 << P))

    def dist(self, n: int) -> Tuple[Fraction, Fraction]:
        """Bounds on ‖n x‖."""
        if self.exact is not None:
            v = n * self.exact
            d = abs(v - floor_frac(v + Fraction(1, 2)))
            return d, d
        lo, hi = self.dist_int(n)
        S = 1 << self.P
        return Fraction(lo, S), Fraction(hi, S)

    def dist_int(self, n: int) -> Tuple[int, int]:
        """Bounds on ‖n x‖ scaled by 2^P (outward rounded)."""
        S = 1 << self.P
        if self.exact is not None:
            d = self.dist(n)[0] * S
            return floor_frac(d), -floor_frac(-d)
        A, B = n * self.lo, n * self.hi
        k = (A + S // 2) // S
        if (B + S // 2) // S == k:
            da, db = A - k * S, B - k * S
            lo = 0 if da <= 0 <= db else min(abs(da), abs(db))
            return lo, max(abs(da), abs(db))
        return min(abs(A - k * S), abs(B - (k + 1) * S)), S // 2


def _value(fx: _Fixed, fy: _Fixed, n: int) -> Interval:
    a, b = fx.dist(n)
    c, d = fy.dist(n)
    return Interval(n * a * c, n * b * d)


def _value_int(fx: _Fixed, fy: _Fixed, n: int) -> Tuple[int, int]:
    a, b = fx.dist_int(n)
    c, d = fy.dist_int(n)
    return n * a * c, n * b * d


def _scan_range(x: RealSource, y: RealSource, start: int, stop: int, P: int) -> List[int]:
    """Candidates for the minimum over [start, stop) at working precision P."""
    fx, fy = _Fixed(x, P), _Fixed(y, P)
    vals = [_value_int(fx, fy, n) for n in range(start, stop)]
    best_hi = min(v[1] for v in vals)
    return [start + j for j, v in enumerate(vals) if v[0] <= best_hi]


def _resolve(x: RealSource, y: RealSource, cands: List[int], P: int, cap: int) -> int:
    """Escalate precision on overlapping candidates; exact ties go to the smaller n."""
    cands = sorted(cands)
    while len(cands) > 1:
        fx, fy = _Fixed(x, P), _Fixed(y, P)
        vals = {n: _value(fx, fy, n) for n in cands}
        best_hi = min(v.hi for v in vals.values())
        keep = [n for n in cands if vals[n].lo <= best_hi]
        if all(vals[n].is_point() for n in keep):
            m = min(vals[n].lo for n in keep)
            return min(n for n in keep if vals[n].lo == m)
        cands = keep
        if len(cands) == 1:
            break
        P *= 2
        if P > cap:
            raise PrecisionExhausted(f"Littlewood minimum undecided among {cands[:5]}")
    return cands[0]


def littlewood_scan(x: RealSource, y: RealSource, limit: int, precision: int = 64,
                    partitions: int = 1, cap: int = 1 << 14, trace: bool = True,
                    workers: int = 1) -> ScanResult:
    """argmin over 1 ≤ n ≤ limit of n‖nx‖‖ny‖ with a certified interval.

    The range may be split into any number of partitions; partial minima are
    merged by (value, then smaller n), so the result does not depend on the split.
    """
    if limit < 2:
        raise ValueError("limit must be at least 2")
    P = precision + limit.bit_length() + 8
    bounds = np.linspace(1, limit + 1, partitions + 1).round().astype(int).tolist()
    ranges = [(bounds[j], bounds[j + 1]) for j in range(partitions) if bounds[j] < bounds[j + 1]]

    def work(r):
        return _resolve(x, y, _scan_range(x, y, r[0], r[1], P), P, cap)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            winners = list(ex.map(work, ranges))
    else:
        winners = [work(r) for r in ranges]
    n_star = _resolve(x, y, winners, P, cap)
    value = _value(_Fixed(x, P), _Fixed(y, P), n_star)
    rows = _trace(x, y, limit, P) if trace else ()
    return ScanResult(n_star, value, tuple(rows))


def _trace(x: RealSource, y: RealSource, limit: int, P: int) -> List[dict]:
    """Rows at which the running minimum (by upper bound) improves."""
    fx, fy = _Fixed(x, P), _Fixed(y, P)
    rows, best = [], None
    for n in range(1, limit + 1):
        lo, hi = _value_int(fx, fy, n)
        if best is None or hi < best:
            best = hi
            a, b = fx.dist(n)
            c, d = fy.dist(n)
            v = Interval(n * a * c, n * b * d)
            rows.append({"n": n, "nErrX": Interval(a, b), "nErrY": Interval(c, d),
                         "product": v, "runningMin": v.hi})
    return rows


TRACE_COLUMNS = ["n", "nErrX_lo", "nErrX_hi", "nErrY_lo", "nErrY_hi", "product_lo", "product_hi", "runningMin"]


def trace_rows(result: ScanResult) -> List[List[str]]:
    out = []
    for r in result.trace:
        out.append([str(r["n"]), str(r["nErrX"].lo), str(r["nErrX"].hi), str(r["nErrY"].lo),
                    str(r["nErrY"].hi), str(r["product"].lo), str(r["product"].hi), str(r["runningMin"])])
    return out
