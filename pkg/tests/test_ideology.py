from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ideoarith.errors import (
    MembershipFailed,
    NotUnimodular,
    PoleHit,
    RationalInput,
    WindowMismatch,
    ZeroTheta,
)
from ideoarith.gdcalc import Order, class_from_spec, compare_class
from ideoarith.ideology import (
    FiltrationWindow,
    Matrix2,
    attach,
    best_interval,
    build_incomposable_pair,
    classify_stream,
    composability_label,
    compose_pairs,
    dual,
    flat_composable,
    ideo_compose,
    membership,
    pair_from_numbers,
    pgl2_act,
    slow_pair,
)
from ideoarith.interval import Interval
from ideoarith.reals import StreamSource, make_source

SQRT2 = make_source("surd:(0+1√2)/1")
SQRT3 = make_source("surd:(0+1√3)/1")
PHI = make_source("surd:(1+1√5)/2")


def ctx():
    c = mpmath.MPContext()
    c.prec = 300
    return c


def as_mp(c, q):
    return c.mpf(q.numerator) / q.denominator


def inside(iv, value, c):
    return as_mp(c, iv.lo) <= value <= as_mp(c, iv.hi)


def window(mu, nu):
    return FiltrationWindow(class_from_spec(mu), class_from_spec(nu))


def test_attach_sqrt2_list():
    p = attach(SQRT2, "list:1,2,5,12,29")
    assert p.numers == (1, 3, 7, 17, 41)
    c = ctx()
    for n, m, e in zip(p.denoms, p.numers, p.errors):
        assert inside(e, n * c.sqrt(2) - m, c)
    mags = [float(abs(e).mid) for e in p.errors]
    for got, want in zip(mags, [0.414, 0.172, 0.0711, 0.0294, 0.0122]):
        assert abs(got - want) < 5e-4


def test_attach_phi_fibonacci_binet():
    p = attach(PHI, "fib", count=25)
    c = ctx()
    phi = (1 + c.sqrt(5)) / 2
    fib = [0, 1]
    while len(fib) < 40:
        fib.append(fib[-1] + fib[-2])
    for n, e in zip(p.denoms, p.errors):
        k = max(i for i, f in enumerate(fib) if f == n)
        assert inside(e, -(-phi) ** (-k), c)


def test_attach_rational_multiples_exact():
    p = attach(make_source("rational:7/3"), "list:3,6,9,30")
    assert all(e.lo == 0 and e.hi == 0 for e in p.errors)
    assert p.numers == (7, 14, 21, 70)


def test_half_integer_ties_go_to_even():
    p = attach(make_source("rational:1/2"), "list:1,3,5")
    assert p.numers == (0, 2, 2)
    assert p.ties == (1, 2, 3)


def test_membership_examples():
    p = attach(SQRT2, "best", count=40)
    assert membership(p, window("seq:pow:3", "seq:pow:2"), 40, 10).value is Order.EQUIVALENT
    v = membership(p, window("seq:pow:2", "seq:pow:2"), 40, 10)
    assert v.value is Order.GREATER and v.witness["side"] == "growth"
    empty = attach(SQRT2, "list:")
    assert membership(empty, window("seq:pow:2", "seq:pow:2"), 40, 10).value is Order.EQUIVALENT


def test_dual_example():
    p = pair_from_numbers(SQRT2, [5], [7])
    d = dual(p)
    assert (d.denoms, d.numers) == ((7,), (5,))
    assert abs(float(abs(d.errors[0]).mid) - 0.0503) < 1e-4
    assert abs(float(abs(d.errors[0]).mid) - float(abs(p.errors[0]).mid) / 2 ** 0.5) < 1e-12


def test_dual_phi_swaps_roles():
    p = attach(PHI, "fib", count=10)
    d = dual(p)
    assert d.denoms == p.numers and d.numers == p.denoms
    assert d.x.enclose(40).intersects(PHI.enclose(40) - 1)


def test_dual_zero_theta():
    with pytest.raises(ZeroTheta):
        dual(attach(make_source("rational:0/1"), "list:1,2"))


def test_pgl2_examples():
    p = pair_from_numbers(SQRT2, [5], [7])
    q = pgl2_act(Matrix2(1, 1, 0, 1), p)
    assert (q.denoms, q.numers) == ((5,), (12,))
    assert q.errors[0].intersects(p.errors[0])
    same = pgl2_act(Matrix2(1, 0, 0, 1), p)
    assert (same.denoms, same.numers) == (p.denoms, p.numers)
    flip, d = pgl2_act(Matrix2(0, 1, 1, 0), p), dual(p)
    assert (flip.denoms, flip.numers) == (d.denoms, d.numers)
    assert flip.errors[0].intersects(d.errors[0])


def test_pgl2_errors():
    with pytest.raises(NotUnimodular):
        Matrix2(2, 0, 0, 1)
    with pytest.raises(PoleHit):
        pgl2_act(Matrix2(0, 1, -1, 2), attach(make_source("rational:2/1"), "list:1"))


def test_compose_example():
    m = pair_from_numbers(SQRT2, [5], [7])
    n = pair_from_numbers(SQRT3, [4], [7])
    prod, total, diff = compose_pairs(m, n)
    assert (prod.denoms[0], prod.numers[0]) == (20, 49)
    assert abs(float(abs(prod.errors[0]).mid) - 0.0102) < 1e-4
    assert (total.denoms[0], total.numers[0]) == (20, 63)
    assert abs(float(abs(total.errors[0]).mid) - 0.07471) < 1e-4
    assert (diff.denoms[0], diff.numers[0]) == (20, 7 * 4 - 5 * 7)


def test_compose_rational_exact():
    a, b = make_source("rational:3/5"), make_source("rational:2/7")
    pa, pb = attach(a, "list:5,10,15"), attach(b, "list:7,14,21")
    w = window("seq:pow:2", "seq:pow:3")
    comp = ideo_compose(pa, pb, w, w.swapped(), depth=3)
    for pair in (comp.product, comp.sum, comp.difference):
        assert all(e.lo == 0 and e.hi == 0 for e in pair.errors)
    assert comp.product.denoms == (35, 140, 315)


def test_compose_window_checks():
    pa = attach(SQRT2, "best", count=30)
    pb = attach(SQRT2, "best", count=30)
    w = window("seq:pow:3", "seq:pow:2")
    with pytest.raises(WindowMismatch):
        ideo_compose(pa, pb, w, w, depth=30)
    bad = window("seq:pow:2", "seq:pow:3")
    with pytest.raises(MembershipFailed):
        ideo_compose(pa, pb, bad, bad.swapped(), depth=30)


def test_best_interval_examples():
    fact = make_source("stream:factorial")
    bi = best_interval(fact, "all", 8)
    assert bi.escaping is True
    assert bi.mu.term(4).lo == Fraction(1, 19)
    assert best_interval(PHI, "all", 20).escaping is False
    e = make_source("stream:e")
    assert best_interval(e, lambda n: n % 3 == 1, 20).escaping is True
    with pytest.raises(RationalInput):
        best_interval(make_source("rational:355/113"), "all", 8)


def test_best_interval_sandwich():
    bi = best_interval(SQRT2, "all", 20)
    c = ctx()
    for i, n in enumerate(bi.indices, start=1):
        q = int(1 / bi.mu.term(i).lo)
        err = abs(q * c.sqrt(2) - c.nint(q * c.sqrt(2)))
        assert inside(bi.nu.term(i), err, c)


def test_flat_composable_examples():
    v = flat_composable(PHI, SQRT2, 20)
    assert composability_label(v) == "INCOMPOSABLE"
    lr = make_source("liouville-resolute")
    v = flat_composable(lr, make_source("liouville-resolute"), 8)
    assert composability_label(v) == "COMPOSABLE" and len(v.witness["interleavings"]) >= 2


def test_blockpair_incomposable():
    bp = build_incomposable_pair()
    certs = bp.certificates(3)
    assert [c["stage"] for c in certs] == [1, 2, 3]
    for c in certs:
        # the jump on one side sits strictly inside a run of ones on the other
        assert c["etaBelow"] >= c["N"] and c["etaAbove"] >= c["N"]
        assert c["qTheta"] < c["qThetaPlus"] < c["qEta"] < c["qEtaPlus"]
    t, e = StreamSource(bp.theta, "t"), StreamSource(bp.eta, "e")
    for depth in (40, 80, bp.horizon):
        assert composability_label(flat_composable(t, e, depth)) == "INCOMPOSABLE"


def test_blockpair_exponent_knobs():
    bp = build_incomposable_pair("n1=2,stages=3,kappa=3/2")
    t = StreamSource(bp.theta, "t")
    for c in bp.certificates():
        # a_{P+1} >= q_P^{kappa-1}
        assert c["qThetaPlus"] >= c["qTheta"] * int(c["qTheta"] ** 0.5)
    assert classify_stream(t, 40).kappa.hi > 1


def test_classify_stream_examples():
    r = classify_stream(PHI, 32)
    assert r.quotient_bound == 1 and not r.resolute and not r.abyssal
    assert abs(float(r.kappa.mid) - 1) < 0.2
    r = classify_stream(make_source("liouville-resolute"), 32)
    assert r.resolute and r.quotient_bound == "ESCAPING"
    r = classify_stream(make_source("liouville-irresolute"), 32)
    assert not r.resolute and r.liouville_evidence


# invariants


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 10 ** 6), min_size=1, max_size=6),
       st.lists(st.integers(1, 10 ** 6), min_size=1, max_size=6))
def test_error_identity_holds(ds, es):
    # compose_pairs raises IdentityViolated if any expansion fails
    pa, pb = attach(SQRT2, "list:" + ",".join(map(str, ds))), attach(SQRT3, "list:" + ",".join(map(str, es)))
    prod, _, _ = compose_pairs(pa, pb)
    for i in range(len(prod.denoms)):
        em, en = pa.errors[i], pb.errors[i]
        formula = em * en + em * pb.numers[i] + en * pa.numers[i]
        assert formula.intersects(prod.errors[i])


unimodular = st.sampled_from([Matrix2(1, 1, 0, 1), Matrix2(1, 0, 1, 1), Matrix2(2, 1, 1, 1),
                              Matrix2(0, 1, 1, 0), Matrix2(3, 2, 1, 1), Matrix2(1, -1, 0, 1)])


@settings(max_examples=12, deadline=None)
@given(unimodular)
def test_pgl2_verdict_invariance(A):
    p = attach(SQRT2, "best", count=40)
    for mu, nu in (("seq:pow:3", "seq:pow:2"), ("seq:pow:2", "seq:pow:2")):
        w = window(mu, nu)
        assert membership(p, w, 40, 10).value is membership(pgl2_act(A, p), w, 40, 10).value


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(1, 10 ** 5), min_size=1, max_size=8))
def test_duality_scales_error(ds):
    p = attach(SQRT3, "list:" + ",".join(map(str, ds)))
    d = dual(p)
    root3 = SQRT3.enclose(80)
    for k, (e, e2) in enumerate(zip(p.errors, d.errors)):
        assert e2.intersects(-(e / root3))


@pytest.mark.parametrize("mu,nu", [("seq:pow:3", "seq:pow:2"), ("seq:poly:3", "seq:poly:2")])
def test_slow_windows_populated(mu, nu):
    mu_c, nu_c = class_from_spec(mu), class_from_spec(nu)
    assert compare_class(mu_c, nu_c, 64, 10).value is Order.LESS
    p = slow_pair(SQRT2, mu_c, nu_c, 30)
    assert membership(p, FiltrationWindow(mu_c, nu_c), 30, 10).value is Order.EQUIVALENT


def test_phi_badly_approximable_bound():
    # F_k|ε| = (1 - (-1)^k φ^{-2k})/√5, so the deficit below 1/√5 is at most φ^{-2k}/√5
    p = attach(PHI, "fib", precision=200, count=60)
    root5 = make_source("surd:(0+1√5)/1").enclose(200)
    inv_phi2 = (PHI * PHI).enclose(200).reciprocal()
    for k, (n, e) in enumerate(zip(p.denoms, p.errors), start=1):
        deficit = Interval.lift(1) - abs(e) * n * root5
        assert deficit.le(inv_phi2 ** k * Fraction(1001, 1000))
        if k >= 10:
            assert (abs(e) * n).ge(Fraction(447213, 10 ** 6) - Fraction(1, 10 ** 4))
