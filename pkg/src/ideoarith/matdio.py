"""Matrix approximation: house norms, Kronecker arithmetic and the block GL action."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import config
from .errors import (IdentityViolated, MalformedSpec, MembershipFailed, NotSquareForSum,
                     PrecisionExhausted, SingularDenominatorBlock, WindowMismatch)
from .gdcalc import Order, Verdict
from .ideology import ApproxPair, FiltrationWindow, _is_zero, _same_class, membership
from .interval import Interval, floor_frac
from .reals import RationalSource, RealSource, as_source, make_source

Vector = Tuple[int, ...]


class RealMat:
    """An r×s grid of real sources."""

    def __init__(self, rows: Sequence[Sequence]):
        grid = tuple(tuple(as_source(e) for e in row) for row in rows)
        if not grid or not grid[0] or any(len(r) != len(grid[0]) for r in grid):
            raise MalformedSpec("matrix rows must be nonempty and of equal length")
        self.rows = grid

    @classmethod
    def parse(cls, text: str) -> "RealMat":
        """Rows separated by ';', entries by ',' (source specs or integers).

        Separators inside brackets or parentheses are left alone, so
        ``alg:x^3-2@[1,2]`` is a single entry.
        """
        rows = []
        for row in split_top(text, ";"):
            entries = [e.strip() for e in split_top(row, ",") if e.strip()]
            rows.append([_entry(e) for e in entries])
        return cls(rows)

    @classmethod
    def identity(cls, n: int) -> "RealMat":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @property
    def square(self) -> bool:
        return self.shape[0] == self.shape[1]

    def exact(self) -> Optional[List[List[Fraction]]]:
        out = [[e.exact() for e in row] for row in self.rows]
        if any(v is None for row in out for v in row):
            return None
        return out

    def enclose(self, prec: int) -> List[List[Interval]]:
        return [[e.enclose(prec) for e in row] for row in self.rows]

    def form(self, i: int, n: Sequence[int]) -> "LinearForm":
        return LinearForm(self.rows[i], tuple(n))

    def __repr__(self):
        return "RealMat(" + "; ".join(", ".join(e.label for e in r) for r in self.rows) + ")"


def split_top(text: str, sep: str) -> List[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def parse_int_vectors(text: str) -> List[Vector]:
    """'5,-4;1,0' -> [(5, -4), (1, 0)]."""
    return [tuple(int(t) for t in row.split(",") if t.strip()) for row in text.split(";") if row.strip()]


def _entry(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text and ":" not in text:
        return Fraction(text)
    return make_source(text)


class LinearForm(RealSource):
    """Σ θ_j n_j for a row of sources and an integer vector."""

    kind = "LinearForm"

    def __init__(self, row: Sequence[RealSource], n: Sequence[int]):
        self.row = tuple(row)
        self.n = tuple(n)
        super().__init__("+".join(f"{c}*{t.label}" for t, c in zip(self.row, self.n) if c))

    def exact(self):
        total = Fraction(0)
        for t, c in zip(self.row, self.n):
            if c == 0:
                continue
            e = t.exact()
            if e is None:
                return None
            total += c * e
        return total

    def enclose(self, prec: int) -> Interval:
        e = self.exact()
        if e is not None:
            return Interval(e)
        extra = max(abs(c) for c in self.n).bit_length() + len(self.n).bit_length() + 2
        total = Interval(0)
        for t, c in zip(self.row, self.n):
            if c:
                total = total + t.enclose(prec + extra) * c
        return total


def house(v):
    """max |component|; interval vectors give an outward-rounded interval."""
    v = list(v)
    if not v:
        return 0
    if any(isinstance(x, Interval) for x in v):
        ivs = [abs(Interval.lift(x)) for x in v]
        return Interval(max(i.lo for i in ivs), max(i.hi for i in ivs))
    return max(abs(x) for x in v)


# ---------------------------------------------------------------------------
# Kronecker constructions


def _grid(x):
    if isinstance(x, RealMat):
        return [list(r) for r in x.rows], True
    rows = [list(r) for r in x]
    return rows, False


def _kron_grid(a, b):
    r, s = len(a), len(a[0])
    r2, s2 = len(b), len(b[0])
    return [[a[i // r2][j // s2] * b[i % r2][j % s2] for j in range(s * s2)] for i in range(r * r2)]


def _eye(n, one, zero):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _add_grid(a, b, sign=1):
    return [[x + y if sign > 0 else x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def kron(A, B, mode: str = "prod"):
    """Kronecker product, sum or difference of matrices; tensor product of vectors.

    Matrices are RealMat or nested lists of numbers; vectors are flat sequences.
    """
    if mode not in ("prod", "sum", "diff"):
        raise ValueError(f"unknown mode {mode!r}")
    if _is_vector(A) and _is_vector(B):
        if mode != "prod":
            raise ValueError("vectors only have a tensor product")
        return tuple(a * b for a in A for b in B)
    a, real_a = _grid(A)
    b, real_b = _grid(B)
    real = real_a or real_b
    if real:
        a = [[as_source(e) for e in row] for row in a]
        b = [[as_source(e) for e in row] for row in b]
    if mode == "prod":
        out = _kron_grid(a, b)
    else:
        if len(a) != len(a[0]) or len(b) != len(b[0]):
            raise NotSquareForSum("Kronecker sum and difference need square matrices")
        one, zero = (RationalSource(Fraction(1)), RationalSource(Fraction(0))) if real else (1, 0)
        left = _kron_grid(a, _eye(len(b), one, zero))
        right = _kron_grid(_eye(len(a), one, zero), b)
        out = _add_grid(left, right, 1 if mode == "sum" else -1)
    if real:
        out = [[_simplify(e) for e in row] for row in out]
        return RealMat(out)
    return out


def _simplify(e: RealSource) -> RealSource:
    v = e.exact()
    return RationalSource(v) if v is not None else e


def _is_vector(x) -> bool:
    return isinstance(x, (tuple, list)) and bool(x) and not isinstance(x[0], (list, tuple))


def mat_apply(M: List[List], v: Sequence) -> list:
    return [sum((row[j] * v[j] for j in range(len(v))), 0) for row in M]


# ---------------------------------------------------------------------------
# vector approximation pairs


@dataclass(frozen=True)
class VecApproxPair:
    Theta: RealMat
    denoms: Tuple[Vector, ...]
    numers: Tuple[Vector, ...]
    errors: Tuple[Tuple[Interval, ...], ...]

    def __len__(self):
        return len(self.denoms)

    def to_json(self) -> dict:
        return {
            "indices": list(range(1, len(self) + 1)),
            "denoms": [[str(c) for c in n] for n in self.denoms],
            "numers": [[str(c) for c in n] for n in self.numers],
            "errLo": [[str(e.lo) for e in err] for err in self.errors],
            "errHi": [[str(e.hi) for e in err] for err in self.errors],
        }


def _nearest_form(form: LinearForm, cap: int) -> int:
    e = form.exact()
    if e is not None:
        k = floor_frac(e + Fraction(1, 2))
        if e - floor_frac(e) == Fraction(1, 2) and k % 2:
            k -= 1
        return k
    bits = 32
    while bits <= cap:
        iv = form.enclose(bits)
        k = floor_frac(iv.mid + Fraction(1, 2))
        d = iv - k
        if d.gt(Fraction(-1, 2)) and d.lt(Fraction(1, 2)):
            return k
        bits *= 2
    raise PrecisionExhausted(f"nearest integer to {form.label} undecided")


def _form_error(form: LinearForm, k: int, rel: int, cap: int) -> Interval:
    e = form.exact()
    if e is not None:
        return Interval(e - k)
    bits = rel + 16
    while True:
        err = form.enclose(bits) - k
        if err.excludes_zero() and err.width * (1 << rel) <= abs(err).lo:
            return err
        if bits > cap:
            raise PrecisionExhausted(f"error of {form.label} - {k} needs more than {cap} bits")
        bits *= 2


def vec_attach(Theta: RealMat, denoms: Sequence[Sequence[int]], precision: int = 64,
               cap: int = config.PREC_CAP) -> VecApproxPair:
    """Componentwise nearest-integer numerators and certified errors Θn - n⊥."""
    r, s = Theta.shape
    ds, ns, errs = [], [], []
    for n in denoms:
        n = tuple(int(c) for c in n)
        if len(n) != s:
            raise ValueError(f"denominator vectors must have length {s}")
        if not any(n):
            raise ValueError("denominator vectors must be nonzero")
        numer, err = [], []
        for i in range(r):
            form = Theta.form(i, n)
            k = _nearest_form(form, cap)
            numer.append(k)
            err.append(_form_error(form, k, precision, cap))
        ds.append(n)
        ns.append(tuple(numer))
        errs.append(tuple(err))
    return VecApproxPair(Theta, tuple(ds), tuple(ns), tuple(errs))


def vec_pair_from_numbers(Theta: RealMat, denoms, numers, precision: int = 64,
                          cap: int = config.PREC_CAP) -> VecApproxPair:
    r, _ = Theta.shape
    errs = tuple(tuple(_form_error(Theta.form(i, n), k[i], precision, cap) for i in range(r))
                 for n, k in zip(denoms, numers))
    return VecApproxPair(Theta, tuple(map(tuple, denoms)), tuple(map(tuple, numers)), errs)


def vec_membership(pair: VecApproxPair, w: FiltrationWindow, depth: int = config.DEFAULT_DEPTH,
                   bound=config.EQUIV_BOUND) -> Verdict:
    """Membership with the window given in normalized form (μ^s, ν^r).

    The exponents 1/s and 1/r are applied here and the scalar test runs on
    house(n_i) and house(ε_i).
    """
    r, s = pair.Theta.shape
    root = lambda c, k: c if c is None or k == 1 else c.power(Fraction(1, k))
    w1 = FiltrationWindow(root(w.mu, s), root(w.nu, r), root(w.iota, s), root(w.lam, r))
    shim = ApproxPair(pair.Theta.rows[0][0], tuple(house(n) for n in pair.denoms),
                      tuple(house(k) for k in pair.numers), tuple(house(e) for e in pair.errors))
    return membership(shim, w1, depth, bound)


def dual_growth_check(pair: VecApproxPair, prec: int = 64) -> List[bool]:
    """house(n⊥) ≤ s·house(Θ)·house(n) per index (certified on enclosures)."""
    r, s = pair.Theta.shape
    hT = house([e for row in pair.Theta.enclose(prec) for e in row])
    return [Interval(house(k)).le(hT * (s * house(n))) for n, k in zip(pair.denoms, pair.numers)]


# ---------------------------------------------------------------------------
# composition


@dataclass(frozen=True)
class MatComposition:
    product: VecApproxPair
    sum: Optional[VecApproxPair]
    difference: Optional[VecApproxPair]
    verdict: Verdict


def _kv(u, v):
    return tuple(a * b for a in u for b in v)


def mat_ideo_compose(pA: VecApproxPair, pB: VecApproxPair, wA: Optional[FiltrationWindow] = None,
                     wB: Optional[FiltrationWindow] = None, depth: int = config.DEFAULT_DEPTH,
                     precision: int = 64, cap: int = config.PREC_CAP,
                     bound=config.EQUIV_BOUND) -> MatComposition:
    """Kronecker composition with the error expansion certified per index.

    Product: denominators m⊗n, numerators m⊥⊗n⊥, error
    ε(m)⊗n⊥ + m⊥⊗ε(n) + ε(m)⊗ε(n).  Sum and difference (square Θ, Θ′):
    numerators m⊥⊗n ± m⊗n⊥, error ε(m)⊗n ± m⊗ε(n).
    """
    k = min(len(pA), len(pB))
    depth = min(depth, k)
    verdicts = {}
    if wA is not None or wB is not None:
        if wA is None or wB is None:
            raise WindowMismatch("give both windows or neither")
        sw = wA.swapped()
        if not (_same_class(wB.mu, sw.mu, depth) and _same_class(wB.nu, sw.nu, depth)
                and _same_class(wB.iota, sw.iota, depth) and _same_class(wB.lam, sw.lam, depth)):
            raise WindowMismatch("second window must be the first with growth and decay swapped")
        for side, p, w in (("A", pA, wA), ("B", pB, wB)):
            v = vec_membership(p, w, depth, bound)
            if v.value is Order.GREATER:
                raise MembershipFailed(side, v)
            verdicts[side] = v
    TA, TB = pA.Theta, pB.Theta
    square = TA.square and TB.square
    TP = kron(TA, TB, "prod")
    TS = kron(TA, TB, "sum") if square else None
    TD = kron(TA, TB, "diff") if square else None
    prod, tot, dif = ([], [], []), ([], [], []), ([], [], [])
    for i in range(k):
        m, mp, em = pA.denoms[i], pA.numers[i], pA.errors[i]
        n, np_, en = pB.denoms[i], pB.numers[i], pB.errors[i]
        d = _kv(m, n)
        num = _kv(mp, np_)
        formula = [a + b + c for a, b, c in zip(_kv(em, np_), _kv(mp, en), _kv(em, en))]
        prod_err = _checked(TP, d, num, formula, precision, cap, "product", i + 1)
        for lst, val in zip(prod, (d, num, prod_err)):
            lst.append(val)
        if square:
            for sign, TT, out in ((1, TS, tot), (-1, TD, dif)):
                a, b = _kv(mp, n), _kv(m, np_)
                num2 = tuple(x + sign * y for x, y in zip(a, b))
                ea, eb = _kv(em, n), _kv(m, en)
                f2 = [x + y if sign > 0 else x - y for x, y in zip(ea, eb)]
                err2 = _checked(TT, d, num2, f2, precision, cap, "sum" if sign > 0 else "difference", i + 1)
                for lst, val in zip(out, (d, num2, err2)):
                    lst.append(val)

    def mk(T, parts):
        return VecApproxPair(T, tuple(parts[0]), tuple(parts[1]), tuple(parts[2]))

    product = mk(TP, prod)
    total = mk(TS, tot) if square else None
    diff = mk(TD, dif) if square else None
    if k < 8:
        verdict = Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "window shorter than 8"})
    elif any(v.value is Order.UNDECIDED for v in verdicts.values()):
        verdict = Verdict(Order.UNDECIDED, depth, {"poisoned": True})
    else:
        tail = range(depth // 2 + 1, depth + 1)
        errs = [house(product.errors[i - 1]) for i in tail]
        shrinking = all(errs[j + 1].le(errs[j]) or _is_zero(errs[j + 1]) for j in range(len(errs) - 1))
        if shrinking and errs[-1].lt(errs[0]) or all(_is_zero(e) for e in errs):
            verdict = Verdict(Order.EQUIVALENT, depth, {"lastError": errs[-1]})
        else:
            verdict = Verdict(Order.UNDECIDED, depth, {"depth": depth, "reason": "errors do not shrink"})
    return MatComposition(product, total, diff, verdict)


def _checked(T: RealMat, d, num, formula, precision, cap, what, i):
    errs = []
    for row in range(T.shape[0]):
        direct = _direct_error(T.form(row, d), num[row], precision, cap)
        if not direct.intersects(formula[row]):
            raise IdentityViolated(f"{what} error expansion fails at index {i}, row {row + 1}")
        errs.append(direct)
    return tuple(errs)


def _direct_error(form: LinearForm, k: int, precision: int, cap: int) -> Interval:
    try:
        return _form_error(form, k, precision, cap)
    except PrecisionExhausted:
        # an error that is exactly zero for irrational Θ cannot be separated from 0
        return form.enclose(precision + 64) - k


# ---------------------------------------------------------------------------
# the block GL action


class BlockMat:
    """M ∈ GL_{r+s}(Z) split into A (r×r), B (r×s), C (s×r), D (s×s)."""

    def __init__(self, rows: Sequence[Sequence[int]], r: int):
        M = [list(map(int, row)) for row in rows]
        n = len(M)
        if any(len(row) != n for row in M) or not 0 < r < n:
            raise ValueError("need a square integer matrix and 0 < r < size")
        if abs(_det([[Fraction(v) for v in row] for row in M])) != 1:
            raise ValueError("block matrix must have determinant ±1")
        self.M, self.r, self.s = M, r, n - r

    @property
    def A(self):
        return [row[: self.r] for row in self.M[: self.r]]

    @property
    def B(self):
        return [row[self.r:] for row in self.M[: self.r]]

    @property
    def C(self):
        return [row[: self.r] for row in self.M[self.r:]]

    @property
    def D(self):
        return [row[self.r:] for row in self.M[self.r:]]

    def __matmul__(self, other: "BlockMat") -> "BlockMat":
        n = len(self.M)
        P = [[sum(self.M[i][k] * other.M[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        return BlockMat(P, self.r)

    def inverse(self) -> "BlockMat":
        inv = _inverse([[Fraction(v) for v in row] for row in self.M])
        return BlockMat([[int(v) for v in row] for row in inv], self.r)


def _det(M):
    n = len(M)
    M = [list(r) for r in M]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            for j in range(c, n):
                M[i][j] -= f * M[c][j]
    return det


def _inverse(M):
    n = len(M)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [v / piv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def _src_matmul(X, Y):
    """Product of grids whose entries are sources or integers."""
    out = []
    for i in range(len(X)):
        row = []
        for j in range(len(Y[0])):
            acc = None
            for k in range(len(Y)):
                a, b = X[i][k], Y[k][j]
                if (isinstance(a, int) and a == 0) or (isinstance(b, int) and b == 0):
                    continue
                term = as_source(a) * b if isinstance(b, int) else as_source(b) * a if isinstance(a, int) \
                    else as_source(a) * as_source(b)
                acc = term if acc is None else acc + term
            row.append(_simplify(acc) if acc is not None else RationalSource(Fraction(0)))
        out.append(row)
    return out


def _src_add(X, Y):
    return [[_simplify(as_source(a) + as_source(b)) for a, b in zip(rx, ry)] for rx, ry in zip(X, Y)]


def _src_det(X):
    n = len(X)
    if n == 1:
        return as_source(X[0][0])
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in X[1:]]
        term = as_source(X[0][j]) * _src_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return _simplify(total)


def _src_inverse(X, det: RealSource):
    n = len(X)
    if n == 1:
        return [[_simplify(RationalSource(Fraction(1)) / det)]]
    adj = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [r[:i] + r[i + 1:] for k, r in enumerate(X) if k != j]
            c = _src_det(minor)
            if (i + j) % 2:
                c = -c
            row.append(_simplify(c / det))
        adj.append(row)
    return adj


def gl_equiv_act(M: BlockMat, Theta: RealMat, pair: Optional[VecApproxPair] = None,
                 precision: int = 64, cap: int = config.PREC_CAP):
    """Θ′ = (AΘ + B)(CΘ + D)^{-1} and the induced map (n⊥, n) ↦ (An⊥ + Bn, Cn⊥ + Dn).

    The new errors are computed directly and checked against (A - Θ′C)ε.
    """
    r, s = Theta.shape
    if (M.r, M.s) != (r, s):
        raise ValueError(f"block sizes {(M.r, M.s)} do not fit a {r}×{s} matrix")
    T = [list(row) for row in Theta.rows]
    den = _src_add(_src_matmul(M.C, T), M.D)
    det = _src_det(den)
    try:
        sgn = det.sign(cap)
    except PrecisionExhausted as exc:
        raise SingularDenominatorBlock("det(CΘ+D) not certified nonzero") from exc
    if sgn == 0:
        raise SingularDenominatorBlock("det(CΘ+D) = 0")
    num = _src_add(_src_matmul(M.A, T), M.B)
    new = RealMat(_src_matmul(num, _src_inverse(den, det)))
    if pair is None:
        return new, None
    ds, ns, errs = [], [], []
    factor = _src_add(M.A, [[-e for e in row] for row in _src_matmul(new.rows, M.C)]) if r else None
    fenc = [[as_source(e).enclose(precision + 32) for e in row] for row in factor]
    for n, k, e in zip(pair.denoms, pair.numers, pair.errors):
        n2 = tuple(a + b for a, b in zip(mat_apply(M.C, k), mat_apply(M.D, n)))
        k2 = tuple(a + b for a, b in zip(mat_apply(M.A, k), mat_apply(M.B, n)))
        if not any(n2):
            continue
        formula = [sum((fenc[i][j] * e[j] for j in range(r)), Interval(0)) for i in range(r)]
        row_errs = []
        for i in range(r):
            direct = _direct_error(new.form(i, n2), k2[i], precision, cap)
            if not direct.intersects(formula[i]):
                raise IdentityViolated(f"induced pair error law fails in row {i + 1}")
            row_errs.append(direct)
        ds.append(n2)
        ns.append(k2)
        errs.append(tuple(row_errs))
    return new, VecApproxPair(new, tuple(ds), tuple(ns), tuple(errs))
