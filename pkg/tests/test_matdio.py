from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ideoarith.errors import NotSquareForSum, SingularDenominatorBlock, WindowMismatch
from ideoarith.gdcalc import Order, class_from_spec
from ideoarith.ideology import FiltrationWindow, Matrix2, attach, compose_pairs, pgl2_act
from ideoarith.interval import Interval
from ideoarith.matdio import (
    BlockMat,
    RealMat,
    dual_growth_check,
    gl_equiv_act,
    house,
    kron,
    mat_ideo_compose,
    vec_attach,
    vec_membership,
    vec_pair_from_numbers,
)
from ideoarith.reals import make_source


def surd(k):
    return f"surd:(0+1√{k})/1"


def mp_of(c, q):
    return c.mpf(q.numerator) / q.denominator


def test_house():
    assert house((3, -7, 2)) == 7
    assert house((0, 0, 0)) == 0
    h = house([Interval(Fraction(-3), Fraction(-2)), Interval(Fraction(1), Fraction(5, 2))])
    assert h.lo == 2 and h.hi == 3


def test_kron_examples():
    assert kron([[2]], [[3]], "sum") == [[5]]
    assert kron([[0, 1], [1, 0]], [[2]]) == [[0, 2], [2, 0]]
    assert kron((1, 2), (3, 4)) == (3, 4, 6, 8)
    with pytest.raises(NotSquareForSum):
        kron([[1, 2]], [[3]], "sum")
    with pytest.raises(NotSquareForSum):
        kron(RealMat.parse(f"{surd(2)}, 1"), RealMat.parse("1"), "diff")


def test_kron_real_entries():
    K = kron(RealMat.parse(surd(2)), RealMat.parse(surd(2)))
    assert K.rows[0][0].enclose(64).contains(2)
    S = kron(RealMat.parse(surd(2)), RealMat.parse(surd(3)), "sum")
    assert abs(float(S.rows[0][0].enclose(64).mid) - (2 ** 0.5 + 3 ** 0.5)) < 1e-12


def _random_square(rng, n):
    return rng.integers(-5, 6, size=(n, n))


def test_spectrum_laws():
    rng = np.random.default_rng(7)
    for _ in range(20):
        A, B = _random_square(rng, 3), _random_square(rng, 3)
        ea, eb = np.linalg.eigvals(A.astype(float)), np.linalg.eigvals(B.astype(float))
        for mode, op in (("prod", np.multiply), ("sum", np.add), ("diff", np.subtract)):
            K = np.array(kron(A.tolist(), B.tolist(), mode), dtype=float)
            got = np.sort_complex(np.linalg.eigvals(K))
            want = np.sort_complex(op.outer(ea, eb).ravel())
            # sort order is fragile for close values, so match greedily
            pool = list(want)
            for z in got:
                j = min(range(len(pool)), key=lambda t: abs(pool[t] - z))
                assert abs(pool[j] - z) < 1e-6 * max(1, abs(z))
                pool.pop(j)


small = st.integers(-6, 6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2), st.integers(1, 2), st.data())
def test_kronecker_law_exact(r, s, r2, s2, data):
    A = data.draw(st.lists(st.lists(small, min_size=s, max_size=s), min_size=r, max_size=r))
    B = data.draw(st.lists(st.lists(small, min_size=s2, max_size=s2), min_size=r2, max_size=r2))
    m = data.draw(st.lists(small, min_size=s, max_size=s))
    n = data.draw(st.lists(small, min_size=s2, max_size=s2))
    apply = lambda M, v: [sum(a * b for a, b in zip(row, v)) for row in M]
    assert apply(kron(A, B), kron(tuple(m), tuple(n))) == list(kron(tuple(apply(A, m)), tuple(apply(B, n))))


def test_vec_attach_example():
    p = vec_attach(RealMat.parse(f"{surd(2)}, {surd(3)}"), [(5, -4)])
    assert p.numers == ((0,),)
    c = mpmath.MPContext()
    c.prec = 200
    want = 5 * c.sqrt(2) - 4 * c.sqrt(3)
    e = p.errors[0][0]
    assert mp_of(c, e.lo) <= want <= mp_of(c, e.hi)
    assert abs(float(e.mid) - 0.142865) < 1e-6


def test_vec_attach_rational_exact():
    T = RealMat.parse("1/2, 1/3; 2, 3/4")
    p = vec_attach(T, [(12 * k, 12 * k) for k in range(1, 6)])
    assert all(e.lo == 0 and e.hi == 0 for err in p.errors for e in err)
    assert p.numers[0] == (10, 33)


def test_vec_attach_rejects_zero():
    with pytest.raises(ValueError):
        vec_attach(RealMat.parse(surd(2)), [(0,)])


def test_scalar_reduction_attach():
    x = make_source(surd(2))
    a = attach(x, "best", count=15)
    p = vec_attach(RealMat.parse(surd(2)), [(n,) for n in a.denoms])
    assert [k for (k,) in p.numers] == list(a.numers)
    assert all(u.intersects(v) and u.width < Fraction(1, 10 ** 15) for (u,), v in zip(p.errors, a.errors))


def test_scalar_reduction_compose():
    a = attach(make_source(surd(2)), "best", count=10)
    b = attach(make_source(surd(3)), "best", count=10)
    pa = vec_attach(RealMat.parse(surd(2)), [(n,) for n in a.denoms])
    pb = vec_attach(RealMat.parse(surd(3)), [(n,) for n in b.denoms])
    comp = mat_ideo_compose(pa, pb)
    for scalar, vec in zip(compose_pairs(a, b), (comp.product, comp.sum, comp.difference)):
        assert [d for (d,) in vec.denoms] == list(scalar.denoms)
        assert [k for (k,) in vec.numers] == list(scalar.numers)
        assert all(u.intersects(v) for (u,), v in zip(vec.errors, scalar.errors))


def test_diag_times_root6_against_oracle():
    T = RealMat.parse(f"{surd(2)}, 0; 0, {surd(3)}")
    a = attach(make_source(surd(2)), "best", count=12)
    b = attach(make_source(surd(3)), "best", count=12)
    c6 = attach(make_source(surd(6)), "best", count=12)
    pA = vec_pair_from_numbers(T, list(zip(a.denoms, b.denoms)), list(zip(a.numers, b.numers)))
    pB = vec_attach(RealMat.parse(surd(6)), [(n,) for n in c6.denoms])
    comp = mat_ideo_compose(pA, pB, depth=12)
    c = mpmath.MPContext()
    c.prec = 200
    theta = [c.sqrt(2) * c.sqrt(6), c.sqrt(3) * c.sqrt(6)]
    for d, k, err in zip(comp.product.denoms, comp.product.numers, comp.product.errors):
        # Θ⊗Θ′ is diag(√2·√6, √3·√6) laid out on (m1 n, m2 n)
        for row, (dd, kk, e) in enumerate(zip(d, k, err)):
            want = theta[row] * dd - kk
            assert mp_of(c, e.lo) <= want <= mp_of(c, e.hi)
    # the second-order term ε(m)⊗ε(n) is the one that decays
    second = [house([x * y for x in em for y in en]) for em, en in zip(pA.errors, pB.errors)]
    assert all(second[j + 1].lt(second[j]) for j in range(len(second) - 1))


def test_rational_compose_exact():
    TA = RealMat.parse("1/2, 0; 0, 1/3")
    TB = RealMat.parse("2/5")
    pA = vec_attach(TA, [(6 * k, 6 * k) for k in range(1, 9)])
    pB = vec_attach(TB, [(5 * k,) for k in range(1, 9)])
    comp = mat_ideo_compose(pA, pB, depth=8)
    for vec in (comp.product, comp.sum, comp.difference):
        assert all(e.lo == 0 and e.hi == 0 for err in vec.errors for e in err)
    assert comp.product.numers[0] == (6, 4)
    assert comp.verdict.value is Order.EQUIVALENT


def test_compose_window_mismatch():
    p = vec_attach(RealMat.parse(surd(2)), [(n,) for n in attach(make_source(surd(2)), "best", count=10).denoms])
    w = FiltrationWindow(class_from_spec("seq:pow:3"), class_from_spec("seq:pow:2"))
    with pytest.raises(WindowMismatch):
        mat_ideo_compose(p, p, w, None)
    with pytest.raises(WindowMismatch):
        mat_ideo_compose(p, p, w, w)


def test_vec_membership_scalar_case():
    a = attach(make_source(surd(2)), "best", count=30)
    p = vec_attach(RealMat.parse(surd(2)), [(n,) for n in a.denoms])
    w = FiltrationWindow(class_from_spec("seq:pow:3"), class_from_spec("seq:pow:2"))
    assert vec_membership(p, w, 30, 10).value is Order.EQUIVALENT


def test_dual_growth_bound():
    T = RealMat.parse(f"{surd(2)}, {surd(3)}; {surd(5)}, {surd(7)}")
    rng = np.random.default_rng(3)
    denoms = [tuple(int(v) for v in rng.integers(-10 ** 6, 10 ** 6, size=2)) for _ in range(50)]
    p = vec_attach(T, [n for n in denoms if any(n)])
    assert all(dual_growth_check(p))


def test_singular_denominator_block():
    # CΘ + D = [1]·[1] + [-1] = 0
    with pytest.raises(SingularDenominatorBlock):
        gl_equiv_act(BlockMat([[0, 1], [1, -1]], 1), RealMat.parse("1"))


def test_gl_identity():
    T = RealMat.parse(f"{surd(2)}, {surd(3)}")
    p = vec_attach(T, [(5, -4), (12, 7)])
    new, q = gl_equiv_act(BlockMat([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 1), T, p)
    assert new.enclose(64) == T.enclose(64)
    assert q.denoms == p.denoms and q.numers == p.numers
    assert all(u.intersects(v) for a, b in zip(q.errors, p.errors) for u, v in zip(a, b))


def test_gl_matches_pgl2():
    a = attach(make_source(surd(2)), "best", count=10)
    p = vec_attach(RealMat.parse(surd(2)), [(n,) for n in a.denoms])
    for rows in ([[2, 1], [1, 1]], [[0, 1], [1, 0]], [[1, 3], [0, 1]]):
        new, q = gl_equiv_act(BlockMat(rows, 1), RealMat.parse(surd(2)), p)
        ref = pgl2_act(Matrix2(*rows[0], *rows[1]), a)
        assert new.rows[0][0].enclose(64).intersects(ref.x.enclose(64))
        assert [d for (d,) in q.denoms] == list(ref.denoms)
        assert [k for (k,) in q.numers] == list(ref.numers)
        assert all(u.intersects(v) for (u,), v in zip(q.errors, ref.errors))


def _elementary(n, i, j, k):
    rows = [[int(a == b) for b in range(n)] for a in range(n)]
    rows[i][j] = k
    return rows


def _gl4(steps):
    M = BlockMat(_elementary(4, 0, 0, 1), 2)
    for i, j, k in steps:
        if i != j:
            M = M @ BlockMat(_elementary(4, i, j, k), 2)
    return M


gl4 = st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(-2, 2)), min_size=1, max_size=5).map(_gl4)
THETA = RealMat.parse(f"{surd(2)}, {surd(3)}; {surd(5)}, {surd(7)}")


def _close(X, Y):
    return all(u.intersects(v) or abs(u.mid - v.mid) < Fraction(1, 10 ** 12)
               for ru, rv in zip(X.enclose(96), Y.enclose(96)) for u, v in zip(ru, rv))


@settings(max_examples=25, deadline=None)
@given(gl4, gl4)
def test_gl_transitivity(M, N):
    try:
        step, _ = gl_equiv_act(M, THETA)
        twice, _ = gl_equiv_act(N, step)
        once, _ = gl_equiv_act(N @ M, THETA)
    except SingularDenominatorBlock:
        return
    assert _close(twice, once)


@settings(max_examples=25, deadline=None)
@given(gl4)
def test_gl_symmetry(M):
    try:
        step, _ = gl_equiv_act(M, THETA)
        back, _ = gl_equiv_act(M.inverse(), step)
    except SingularDenominatorBlock:
        return
    assert _close(back, THETA)


def test_gl_pair_map_verified():
    p = vec_attach(THETA, [(5, -4), (12, 7), (70, 29)])
    M = _gl4([(0, 2, 1), (3, 1, -1), (1, 0, 2)])
    new, q = gl_equiv_act(M, THETA, p)
    c = mpmath.MPContext()
    c.prec = 200
    for n, k, err in zip(q.denoms, q.numers, q.errors):
        for i in range(2):
            val = sum(mp_of(c, new.rows[i][j].enclose(190).mid) * n[j] for j in range(2)) - k[i]
            assert mp_of(c, err[i].lo) - c.mpf(10) ** -40 <= val <= mp_of(c, err[i].hi) + c.mpf(10) ** -40
