"""Resultant arithmetic on integer polynomials, heights, Mahler measures and scans.

The three resultant operations are

    f ⋄× g = res_Y(g(Y), Y^m f(X/Y))     roots α_i β_j
    f ⋄+ g = res_Y(g(Y), f(X - Y))       roots α_i + β_j
    f ⋄- g = res_Y(g(Y), f(X + Y))       roots α_i - β_j

each with leading coefficient a_m^n b_n^m.  They are computed by evaluating
the Sylvester determinant at mn+1 integer points (fraction-free Bareiss
elimination) and interpolating.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from . import config
from .errors import (IdentityViolated, PrecisionExhausted, RootIsolationFailed,
                     SearchSpaceTooLarge, TieUnresolved, ZeroDenominator, ZeroPolynomial)
from .interval import Interval
from .poly import IntPoly, RatMap, _homogenize
from .reals import AlgebraicSource, RealSource, SurdSource

# ---------------------------------------------------------------------------
# resultants


def bareiss_det(rows: List[List[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def sylvester(p: Sequence[int], q: Sequence[int]) -> List[List[int]]:
    """Sylvester matrix of p, q given as full coefficient lists (high degree first)."""
    m, n = len(p) - 1, len(q) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(p) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(q) + [0] * (size - n - 1 - i))
    return rows


def resultant(p: Sequence[int], q: Sequence[int]) -> int:
    """res(p, q) with the formal degrees given by the list lengths (low degree first)."""
    return bareiss_det(sylvester(list(reversed(p)), list(reversed(q))))


def _interpolate(xs: Sequence[int], ys: Sequence[int]) -> IntPoly:
    """Newton interpolation; the caller guarantees an integer polynomial exists."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = [Fraction(0)] * n
    # expand the Newton form from the inside out
    for i in range(n - 1, -1, -1):
        # out = out * (X - xs[i]) + coef[i]
        shifted = [Fraction(0)] + out[:-1]
        out = [shifted[k] - xs[i] * out[k] for k in range(n)]
        out[0] += coef[i]
    for c in out:
        if c.denominator != 1:
            raise IdentityViolated("resultant interpolation left a non-integer coefficient")
    return IntPoly(int(c) for c in out)


def _fiber(f: IntPoly, x: int, mode: str) -> List[int]:
    """Coefficients in Y (low first, formal degree m) of the second resultant argument at X = x."""
    m = f.degree
    if mode == "prod":
        # Y^m f(x/Y) = sum a_k x^k Y^(m-k)
        return [f.coeff(m - j) * x ** (m - j) for j in range(m + 1)]
    sgn = -1 if mode == "sum" else 1
    # f(x + sgn*Y) expanded by the binomial theorem
    out = [0] * (m + 1)
    for k, a in enumerate(f.coeffs):
        if a == 0:
            continue
        for j in range(k + 1):
            out[j] += a * math.comb(k, j) * x ** (k - j) * sgn ** j
    return out


def _res_op(f: IntPoly, g: IntPoly, mode: str) -> IntPoly:
    if f.is_zero() or g.is_zero():
        raise ZeroPolynomial("resultant arithmetic needs nonzero operands")
    if f.degree < 1 or g.degree < 1:
        return IntPoly((1,))
    m, n = f.degree, g.degree
    xs = list(range(m * n + 1))
    ys = [resultant(list(g.coeffs), _fiber(f, x, mode)) for x in xs]
    out = _interpolate(xs, ys)
    lead = f.lead ** n * g.lead ** m
    if out.degree != m * n or out.lead != lead:
        raise IdentityViolated(f"unexpected leading term {out.lead} (wanted {lead})")
    return out


def res_prod(f: IntPoly, g: IntPoly) -> IntPoly:
    """f ⋄× g; the identity is X - 1."""
    return _res_op(f, g, "prod")


def res_combine(f: IntPoly, g: IntPoly, mode: str) -> IntPoly:
    """f ⋄+ g (mode "sum") or f ⋄- g (mode "diff"); the identity for ⋄+ is X."""
    if mode not in ("sum", "diff"):
        raise ValueError(f"unknown mode {mode!r}")
    return _res_op(f, g, mode)


def cauchy(f: IntPoly, g: IntPoly, mode: str) -> IntPoly:
    if mode == "mul":
        return f * g
    if mode == "add":
        return f + g
    raise ValueError(f"unknown mode {mode!r}")


def embed_rational(a: int, b: int) -> IntPoly:
    """a/b as the linear polynomial bX - a."""
    if b == 0:
        raise ZeroDenominator("embed_rational needs b != 0")
    return IntPoly((-a, b))


def up_to_unit(f: IntPoly, g: IntPoly) -> bool:
    """f ~ g: equal after scaling by nonzero integers."""
    return f.similar(g)


def square_act(f: IntPoly, R: RatMap, degree: Optional[int] = None) -> IntPoly:
    """f □ R = q^d · f(p/q), with f read at formal degree d (default deg f).

    The result has formal degree d·deg R even when its leading terms cancel;
    pass that formal degree when acting again so the action composes.
    """
    if f.is_zero():
        return f
    d = f.degree if degree is None else degree
    if d < f.degree:
        raise ValueError(f"formal degree {d} is below deg f = {f.degree}")
    return _homogenize(f, d, R.p, R.q, R.degree)


# ---------------------------------------------------------------------------
# certified roots


@dataclass(frozen=True)
class RootCluster:
    """k roots (with multiplicity) inside a connected union of disks."""

    centers: Tuple[Tuple[Fraction, Fraction], ...]
    radii: Tuple[Fraction, ...]
    count: int

    def modulus(self, prec: int) -> Interval:
        return self.distance(Interval(0), prec)

    def distance(self, t: Interval, prec: int) -> Interval:
        """Enclosure of |t - α| for every root α in the cluster (t real)."""
        lo, hi = None, None
        for (x, y), r in zip(self.centers, self.radii):
            d = ((t - x) ** 2 + y * y).sqrt(prec)
            a, b = max(Fraction(0), d.lo - r), d.hi + r
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)
        return Interval(lo, hi)

    @property
    def center(self) -> complex:
        x, y = self.centers[0]
        return complex(float(x), float(y))


def _seed_roots(coeffs: Sequence[int]) -> np.ndarray:
    """Double precision starting points: companion matrix, then vectorized Aberth."""
    top = max(abs(c) for c in coeffs)
    shift = max(0, top.bit_length() - 900)
    hi_first = np.array([float(Fraction(c, 1 << shift)) for c in reversed(coeffs)])
    zs = np.roots(hi_first).astype(complex)
    dcs = np.polyder(hi_first)
    n = len(zs)
    with np.errstate(all="ignore"):
        for _ in range(30):
            ratio = np.polyval(hi_first, zs) / np.polyval(dcs, zs)
            diff = zs[:, None] - zs[None, :]
            np.fill_diagonal(diff, np.inf)
            s = (1 / diff).sum(axis=1)
            w = ratio / (1 - ratio * s)
            if not np.all(np.isfinite(w)):
                break
            zs = zs - w
            if np.max(np.abs(w) / np.maximum(1, np.abs(zs))) < 1e-15:
                break
    if len(set(zs.tolist())) < n:
        zs = zs + np.exp(2j * np.pi * np.arange(n) / n) * 1e-12
    return zs


def _aberth(ctx, cs, zs, tol, steps: int = 8):
    """Aberth-Ehrlich refinement of all roots simultaneously (cs high degree first)."""
    n = len(zs)
    dcs = [c * (n - k) for k, c in enumerate(cs[:-1])]
    for _ in range(steps):
        biggest = ctx.mpf(0)
        new = list(zs)
        for i, z in enumerate(zs):
            fz = ctx.polyval(cs, z)
            if fz == 0:
                continue
            dz = ctx.polyval(dcs, z)
            ratio = fz / dz if dz != 0 else ctx.mpf(1)
            s = ctx.fsum(1 / (z - w) for j, w in enumerate(zs) if j != i and z != w)
            w_ = ratio / (1 - ratio * s)
            new[i] = z - w_
            biggest = max(biggest, abs(w_) / max(1, abs(z)))
        zs = new
        if biggest < tol:
            break
    return zs


def _smith_clusters(ctx, cs, zs, lead) -> List[RootCluster]:
    """Inclusion disks |z - z_i| ≤ n|W_i| and their connected components.

    Each component of k disks holds exactly k roots.  Evaluation errors are
    covered by a Horner bound with a generous constant.
    """
    n = len(zs)
    eps = ctx.mpf(2) ** (-ctx.prec)
    abscs = [abs(c) for c in cs]
    radii, fcenters = [], []
    for i, z in enumerate(zs):
        fz = ctx.polyval(cs, z)
        bound = ctx.polyval(abscs, abs(z)) * 8 * (n + 2) * eps
        prod = ctx.mpf(1)
        for j, w in enumerate(zs):
            if j != i:
                prod *= abs(z - w)
        if prod == 0:
            radii.append(ctx.inf)
        else:
            radii.append(n * (abs(fz) + bound) / (abs(lead) * prod) * (1 + 4 * n * eps))
        fcenters.append(z)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(fcenters[i] - fcenters[j]) * (1 - 4 * eps) <= radii[i] + radii[j]:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        cents = tuple((_to_fraction(ctx.re(fcenters[i])), _to_fraction(ctx.im(fcenters[i])))
                      for i in members)
        rads = tuple(_to_fraction_up(radii[i]) for i in members)
        out.append(RootCluster(cents, rads, len(members)))
    return out


def _to_fraction(v) -> Fraction:
    sign, man, exp, _ = v._mpf_
    out = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -out if sign else out


def _to_fraction_up(v) -> Fraction:
    if v == mpmath.inf:
        raise RootIsolationFailed("coincident root approximations")
    return _to_fraction(v) * (1 + Fraction(1, 1 << 40)) + Fraction(1, 1 << 2000)


def root_clusters(f: IntPoly, rel: float = 1e-9, cap: int = config.PREC_CAP) -> List[RootCluster]:
    """Certified clusters of the complex roots of f, with relative width below rel.

    Repeated roots are split off first so that every cluster is a single
    simple root of a squarefree factor, counted with its multiplicity.
    """
    if f.is_zero():
        raise ZeroPolynomial("roots of the zero polynomial")
    out: List[RootCluster] = []
    for part, mult in _squarefree(f):
        for c in _simple_clusters(part, rel, cap):
            out.extend([c] * mult)
    return out


def _squarefree(f: IntPoly):
    import sympy

    X = sympy.Symbol("X")
    _, parts = sympy.Poly(list(reversed(f.coeffs)), X, domain="ZZ").sqf_list()
    return [(IntPoly(int(c) for c in reversed(p.all_coeffs())), k) for p, k in parts]


def _simple_clusters(f: IntPoly, rel: float, cap: int) -> List[RootCluster]:
    k = 0
    while k < len(f.coeffs) and f.coeffs[k] == 0:
        k += 1
    zero = [RootCluster(((Fraction(0), Fraction(0)),), (Fraction(0),), 1)] * k
    g = IntPoly(f.coeffs[k:])
    if g.degree < 1:
        return zero
    cs = list(reversed(g.coeffs))
    bits = max(abs(c) for c in cs).bit_length()
    zs = list(_seed_roots(g.coeffs))
    prec, refine = 64 + bits, False
    while prec <= cap + bits:
        ctx = mpmath.MPContext()
        ctx.prec = prec
        zs = [ctx.mpc(z) for z in zs]
        mcs = [ctx.mpf(c) for c in cs]
        if refine:
            zs = _aberth(ctx, mcs, zs, ctx.mpf(2) ** (-prec + 16))
        ctx.prec = prec + 64
        clusters = _smith_clusters(ctx, mcs, zs, cs[0])
        if all(c.count == 1 and c.radii[0] <= Fraction(rel) * max(1, abs(c.center))
               for c in clusters):
            return zero + clusters
        # the double precision seeds were not enough: refine, then widen
        if refine:
            prec *= 2
        refine = True
    raise RootIsolationFailed(f"could not separate the roots of {g}")


# ---------------------------------------------------------------------------
# heights and measures


@dataclass(frozen=True)
class HeightMahler:
    h: int
    m: Interval
    m_theta: Optional[Interval] = None
    z_theta: Optional[Interval] = None


def _max1(iv: Interval) -> Interval:
    return Interval(max(iv.lo, 1), max(iv.hi, 1))


def _product(items, prec: int) -> Interval:
    acc = Interval(1)
    for it in items:
        acc = (acc * it).round(prec)
    return acc


def mahler_measure(f: IntPoly, prec: int = 96, clusters=None) -> Interval:
    if f.is_zero():
        raise ZeroPolynomial("Mahler measure of the zero polynomial")
    clusters = root_clusters(f) if clusters is None else clusters
    return _product([Interval(abs(f.lead))] + [_max1(c.modulus(prec)) for c in clusters], prec)


def height_mahler(f: IntPoly, precision: int = 96, theta: Optional[RealSource] = None,
                  rho: Fraction = Fraction(1)) -> HeightMahler:
    """Height, Mahler measure and (given θ) the θ-Mahler and θ-disk measures.

    The leading coefficient is carried by the θ-Mahler measure only, so that
    m_θ · z_θ = |f(θ)|.
    """
    clusters = root_clusters(f)
    m = mahler_measure(f, precision, clusters)
    if theta is None:
        return HeightMahler(f.height(), m)
    t = theta.enclose(precision + 8)
    dists = [c.distance(t, precision + 8) for c in clusters]
    m_theta = _product([Interval(abs(f.lead))] + [_max1(d) for d in dists], precision)
    if _vanishes(f, theta):
        z = Interval(0)
    else:
        z = _disk_measure(dists, Fraction(rho), precision)
    return HeightMahler(f.height(), m, m_theta, z)


def _disk_measure(dists: List[Interval], rho: Fraction, prec: int) -> Interval:
    factors = []
    for d in dists:
        if d.hi < rho:
            factors.append(d)
        elif d.lo >= rho:
            continue
        else:
            # the root may sit on the boundary circle: it contributes d or 1
            factors.append(Interval(min(d.lo, 1), max(d.hi, 1)))
    return _product(factors, prec)


def _nth_root(iv: Interval, d: int, prec: int) -> Interval:
    if d == 1:
        return iv
    # keep 'prec' significant bits even for tiny values
    extra = 0
    if iv.hi > 0:
        extra = max(0, -math.floor(math.log2(iv.hi)) // d + 2) if iv.hi < 1 else 0
    return iv.root(d, prec + extra)


def poly_decay(f: IntPoly, x: RealSource, d: int, precision: int = 96,
               check: bool = True) -> Tuple[Interval, Interval]:
    """(|f(θ)|^{1/d}, h(f)^{-1/d}) with the θ-Mahler factorization cross-check."""
    if f.is_zero():
        raise ZeroPolynomial("poly_decay of the zero polynomial")
    if d < max(1, f.degree):
        raise ValueError("normalization degree must be at least deg f and 1")
    val = _abs_value(f, x, precision)
    nu = _nth_root(val, d, precision)
    mu = _nth_root(Interval(Fraction(1, f.height())), d, precision)
    if check and f.degree >= 1:
        hm = height_mahler(f, precision + 16, x)
        prod = _nth_root(hm.m_theta * hm.z_theta, d, precision)
        if not prod.intersects(nu):
            raise IdentityViolated("ν_d differs from m_θ·ζ_θ")
    return nu, mu


def diamond_bound(f: IntPoly, x: RealSource, g: IntPoly, y: RealSource,
                  precision: int = 96) -> Tuple[Interval, Interval]:
    """Unnormalized decay of f⋄×g at xy and the two-term bound in m(f), m(g), |f(x)|, |g(y)|.

    The bound holds up to a factor depending only on x and y, so callers
    compare the two sides as classes along a family, not pointwise.
    """
    d, e = f.degree, g.degree
    lhs = _abs_value(res_prod(f, g), x * y, precision)
    mf, mg = mahler_measure(f, precision), mahler_measure(g, precision)
    nf, ng = _abs_value(f, x, precision), _abs_value(g, y, precision)
    rhs = mf ** (e - 1) * mg ** d * nf + mf ** e * mg ** (d - 1) * ng
    return lhs, rhs


def _abs_value(f: IntPoly, x: RealSource, precision: int) -> Interval:
    """|f(x)| enclosed to relative accuracy about 2^-precision (exact zeros give [0, 0])."""
    if _vanishes(f, x):
        return Interval(0)
    p = precision
    while p <= 4 * config.PREC_CAP:
        v = abs(f.evaluate(x.enclose(p + 2 * f.degree + 8)))
        if v.lo > 0 and v.width <= v.lo * Fraction(1, 1 << precision):
            return v
        p *= 2
    if v.lo > 0:
        return v
    raise PrecisionExhausted(f"could not separate f(x) from zero for {f}")


def _vanishes(f: IntPoly, x: RealSource) -> bool:
    """Exact test of f(x) = 0 where the source allows one."""
    if f.is_zero():
        return True
    e = x.exact()
    if e is not None:
        return f.sign_at(e) == 0
    if isinstance(x, SurdSource):
        # f((a + b√D)/c) = u + v√D with rational u, v
        u, v = Fraction(0), Fraction(0)
        a, b, D, c = Fraction(x.a, x.c), Fraction(x.b, x.c), x.D, 1
        for coef in reversed(f.coeffs):
            u, v = u * a + v * b * D + coef, u * b + v * a
        return u == 0 and v == 0
    if isinstance(x, AlgebraicSource):
        from .poly import _qdivmod

        _, r = _qdivmod(list(f.coeffs), list(x.minpoly.coeffs))
        return not r
    return False


# ---------------------------------------------------------------------------
# the best-polynomial scan


@dataclass(frozen=True)
class PolyScan:
    poly: IntPoly
    value: Interval
    exponent: Optional[Interval]
    exact_hit: bool


def _canonical(cs: Tuple[int, ...]) -> bool:
    for c in reversed(cs):
        if c:
            return c > 0
    return False


def _tie_key(cs: Tuple[int, ...]):
    f = IntPoly(cs)
    return (f.degree, f.height(), tuple(reversed(f.coeffs)))


def _screen(theta: float, d: int, H: int):
    """All canonical coefficient vectors of height ≤ H with float values."""
    rng = np.arange(-H, H + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * (d + 1)), indexing="ij")
    cs = np.stack([g.ravel() for g in grids], axis=1)  # column k = coefficient of X^k
    lead_pos = np.zeros(len(cs), dtype=bool)
    undecided = np.ones(len(cs), dtype=bool)
    for k in range(d, -1, -1):
        nz = undecided & (cs[:, k] != 0)
        lead_pos[nz] = cs[nz, k] > 0
        undecided &= cs[:, k] == 0
    cs = cs[lead_pos]
    powers = theta ** np.arange(d + 1)
    vals = np.abs(cs.astype(np.float64) @ powers)
    return cs, vals


def best_poly_scan(x: RealSource, d: int, H: int, exclude_vanishing: bool = False,
                   max_space: int = 40_000_000, precision: int = 96) -> PolyScan:
    """The f of degree ≤ d and height ≤ H minimizing |f(θ)|, certified.

    Polynomials are taken up to sign.  Exact ties (possible once d reaches the
    degree of θ) go to the smallest (degree, height, coefficients).
    """
    return best_poly_scan_all(x, d, H, exclude_vanishing, max_space, precision)[H]


def best_poly_scan_all(x: RealSource, d: int, H: int, exclude_vanishing: bool = False,
                       max_space: int = 40_000_000, precision: int = 96) -> dict:
    """best_poly_scan for every height bound 1..H in one pass."""
    if d < 1 or H < 1:
        raise ValueError("need d ≥ 1 and H ≥ 1")
    if (2 * H + 1) ** (d + 1) > max_space:
        raise SearchSpaceTooLarge(f"(2H+1)^(d+1) = {(2 * H + 1) ** (d + 1)} exceeds {max_space}")
    t = x.enclose(80)
    theta = float(t.mid)
    cs, vals = _screen(theta, d, H)
    heights = np.abs(cs).max(axis=1)
    scale = max(1.0, abs(theta)) ** d
    err = (d + 2) * H * scale * 2.0 ** -48 + float(t.width) * d * H * scale * 4
    out = {}
    for h in range(1, H + 1):
        mask = heights <= h
        sub_cs, sub_vals = cs[mask], vals[mask]
        if exclude_vanishing:
            keep = np.ones(len(sub_cs), dtype=bool)
            for idx in np.nonzero(sub_vals <= err)[0]:
                if _vanishes(IntPoly(int(c) for c in sub_cs[idx]), x):
                    keep[idx] = False
            sub_cs, sub_vals = sub_cs[keep], sub_vals[keep]
        best = sub_vals.min()
        cand = [tuple(int(c) for c in sub_cs[i]) for i in np.nonzero(sub_vals <= best + 2 * err)[0]]
        f, value = _certify_min(cand, x, precision)
        hit = value.hi == 0
        expo = None
        if not hit and h >= 2:
            expo = -value.log() / (Interval(h).log() * d)
        out[h] = PolyScan(IntPoly(f), value, expo, hit)
    return out


def _certify_min(cands: List[Tuple[int, ...]], x: RealSource, precision: int):
    """Strict minimum among candidates, escalating precision; exact ties broken by _tie_key."""
    polys = {c: IntPoly(c) for c in cands}
    exact_zero = [c for c in cands if _vanishes(polys[c], x)]
    if exact_zero:
        c = min(exact_zero, key=_tie_key)
        return c, Interval(0)
    # collapse exact ties first: |f(θ)| = |g(θ)| iff f - g or f + g vanishes at θ
    classes: List[List[Tuple[int, ...]]] = []
    for c in sorted(cands, key=_tie_key):
        for cl in classes:
            g = polys[cl[0]]
            if _vanishes(polys[c] - g, x) or _vanishes(polys[c] + g, x):
                cl.append(c)
                break
        else:
            classes.append([c])
    reps = [cl[0] for cl in classes]
    p = precision
    while True:
        vals = {c: _abs_value(polys[c], x, p) for c in reps}
        best_hi = min(v.hi for v in vals.values())
        reps = [c for c in reps if vals[c].lo <= best_hi]
        if len(reps) == 1:
            return reps[0], vals[reps[0]]
        p *= 2
        if p > config.PREC_CAP:
            raise TieUnresolved(f"could not order {reps[:4]}")


# ---------------------------------------------------------------------------
# the Wirsing sandwich


@dataclass(frozen=True)
class WirsingResult:
    lower: Interval
    z: Interval
    upper: Interval
    ok: bool


def wirsing_check(f: IntPoly, x: RealSource, rho=Fraction(1), precision: int = 96) -> WirsingResult:
    """Two-sided bounds on the ρ-disk measure of f at θ.

    With d = deg f, A = |f(θ)|/h(f) and T = max(1, |θ|), the bounds on the
    degree-normalized measure are

        2^{-(d+1)/d} (d+1)^{-1/(2d)} T^{-1} A^{1/d}  and  2^{(d+1)/d} C(d, ⌊d/2⌋)^{1/d} ρ^{-1} T A^{1/d}.

    Both are raised to the d-th power here so they bound the raw measure z.
    """
    if f.is_zero():
        raise ZeroPolynomial("wirsing_check of the zero polynomial")
    rho = Fraction(rho)
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    d = f.degree
    if d < 1:
        raise ValueError("wirsing_check needs deg f ≥ 1")
    hm = height_mahler(f, precision, x, rho)
    A = _abs_value(f, x, precision) / f.height()
    T = _max1(abs(x.enclose(precision)))
    # lower^d = 2^{-(d+1)} (d+1)^{-1/2} T^{-d} A
    low = A / (Interval(2) ** (d + 1) * T ** d) / Interval(d + 1).sqrt(precision)
    up = A * (Interval(2) ** (d + 1)) * math.comb(d, d // 2) * T ** d / Interval(rho) ** d
    z = hm.z_theta
    ok = low.hi <= z.lo and z.hi <= up.lo
    return WirsingResult(low, z, up, ok)
