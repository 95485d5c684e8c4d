from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ideoarith.errors import MalformedSpec, NonSquarefreeD, RationalTerminated, RExceedsQuotient, ReducibleMinpoly
from ideoarith.interval import Interval
from ideoarith.reals import (
    convergents,
    direct_error,
    dirichlet_find,
    eval_interval,
    intermediate_convergent,
    intermediate_error_closed,
    liouville_series_enclosure,
    make_source,
    partial_quotients,
    tail_quotient,
)

SQRT2 = "surd:(0+1√2)/1"
PHI = "surd:(1+1√5)/2"


def _mp(prec=200):
    ctx = mpmath.MPContext()
    ctx.prec = prec
    return ctx


def _contains_mp(iv, value):
    ctx = _mp(400)
    lo, hi = iv.lo, iv.hi
    return ctx.mpf(lo.numerator) / lo.denominator <= value <= ctx.mpf(hi.numerator) / hi.denominator


def _euclid(a, b):
    out = []
    while b:
        q, r = divmod(a, b)
        out.append(q)
        a, b = b, r
    return out


def test_make_source_examples():
    x = make_source("rational:355/113")
    assert x.exact() == Fraction(355, 113)
    phi = make_source("surd:(1+1√5)/2")
    assert phi.enclose(40).contains(Fraction(16180339887, 10 ** 10)) is False
    assert abs(phi.enclose(40).mid - Fraction(161803398875, 10 ** 11)) < Fraction(1, 10 ** 10)


def test_make_source_errors():
    with pytest.raises(MalformedSpec):
        make_source("nonsense:1")
    with pytest.raises(NonSquarefreeD):
        make_source("surd:(1+1√8)/2")
    with pytest.raises(ReducibleMinpoly):
        make_source("alg:x^2-4@[1,3]")


def test_liouville_resolute_rule():
    x = make_source("liouville-resolute")
    cs = convergents(x, 5)
    a = partial_quotients(x, 5)
    # a_{n+1} = q_n^{n-1}
    for n in range(1, 4):
        assert a[n + 1] == cs[n].q ** (n - 1)


def test_partial_quotients_examples():
    assert partial_quotients(make_source(PHI), 6) == [1] * 6
    assert partial_quotients(make_source("rational:355/113"), 10) == [3, 7, 16]
    assert partial_quotients(make_source("stream:e"), 9) == [2, 1, 2, 1, 1, 4, 1, 1, 6]


def test_convergents_sqrt2():
    cs = convergents(make_source(SQRT2), 5)
    assert [(c.p, c.q) for c in cs] == [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]


def test_convergents_phi_are_fibonacci_ratios():
    fib = [1, 1]
    while len(fib) < 20:
        fib.append(fib[-1] + fib[-2])
    cs = convergents(make_source(PHI), 15)
    for i, c in enumerate(cs):
        assert (c.p, c.q) == (fib[i + 1], fib[i])


def test_rational_full_expansion_and_termination():
    x = make_source("rational:355/113")
    assert convergents(x)[-1].p == 355
    with pytest.raises(RationalTerminated):
        convergents(x, 10)


def test_intermediate_convergents():
    x = make_source(SQRT2)
    ic = intermediate_convergent(x, 1, 1)
    assert (ic.q, ic.p) == (7, 10)
    c = convergents(x, 4)
    ic0 = intermediate_convergent(x, 2, 0)
    assert (ic0.p, ic0.q) == (c[2].p, c[2].q)
    e = make_source("stream:e")
    a4 = partial_quotients(e, 6)[4]
    qs = [intermediate_convergent(e, 2, r).q for r in range(a4)]
    assert all(qs[j] < qs[j + 1] for j in range(len(qs) - 1))
    with pytest.raises(RExceedsQuotient):
        intermediate_convergent(x, 1, 5)


def test_intermediate_error_closed_matches_direct():
    x = make_source(SQRT2)
    iv = intermediate_error_closed(x, 1, 1, 64)
    ctx = _mp()
    assert _contains_mp(iv, abs(7 * ctx.sqrt(2) - 10))
    phi = make_source(PHI)
    c = intermediate_convergent(phi, 5, 0)
    closed = intermediate_error_closed(phi, 5, 0, 64)
    direct = abs(direct_error(phi, c.q, c.p, 64))
    assert closed.intersects(direct)


def test_tail_quotient():
    ctx = _mp()
    assert _contains_mp(tail_quotient(make_source(SQRT2), 3, 64), 1 + ctx.sqrt(2))
    phi_val = (1 + ctx.sqrt(5)) / 2
    assert _contains_mp(tail_quotient(make_source(PHI), 4, 64), phi_val)
    e = make_source("stream:e")
    t6 = tail_quotient(e, 6, 64)
    t7 = tail_quotient(e, 7, 64)
    assert t6.floor() == 1 and (t7.reciprocal() + 1).intersects(t6)


def test_dirichlet_find():
    assert dirichlet_find(make_source(SQRT2), 10) == (7, 5)
    assert dirichlet_find(make_source(PHI), 100) == (89, 55)
    assert dirichlet_find(make_source("rational:1/2"), 5) == (1, 2)


def test_dirichlet_brute_force_agrees():
    # the smallest q with |q√2 - p| < 1/N, found by exhaustive search
    ctx = _mp()
    x = make_source(SQRT2)
    for N in (3, 10, 30, 100):
        p, q = dirichlet_find(x, N)
        assert 1 <= q < N and abs(q * ctx.sqrt(2) - p) < ctx.mpf(1) / N


def test_eval_interval():
    ctx = _mp()
    iv = eval_interval(make_source(SQRT2), 64)
    assert iv.width <= Fraction(1, 2 ** 64) and _contains_mp(iv, ctx.sqrt(2))
    assert eval_interval(make_source("rational:355/113"), 10).is_point()
    # partial sum through j = 4; the remaining tail is below 2·2^-720
    partial = sum(Fraction(1, 2 ** _fact(j + 1)) for j in range(5))
    tail = Fraction(2, 2 ** 720)
    iv = liouville_series_enclosure(2, 64)
    assert iv.intersects(Interval(partial, partial + tail))
    assert eval_interval(make_source("liouville-series:2"), 64).intersects(Interval(partial, partial + tail))


def _fact(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def test_best_approximation_inequality_e():
    e = make_source("stream:e")
    for c in convergents(e, 30)[1:]:
        assert (abs(direct_error(e, c.q, c.p, 64)) * c.q).lt(1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_rational_expansion_is_euclid(a, b):
    x = make_source(f"rational:{a}/{b}")
    assert partial_quotients(x, 100) == _euclid(a, b)
    assert convergents(x)[-1].p * b == convergents(x)[-1].q * a


@settings(max_examples=25, deadline=None)
@given(st.integers(-20, 20), st.integers(1, 9), st.sampled_from([2, 3, 5, 6, 7, 10, 11]), st.integers(1, 9))
def test_nested_refinement(a, b, D, c):
    x = make_source(f"surd:({a}+{b}√{D})/{c}")
    outer, inner = eval_interval(x, 32), eval_interval(x, 96)
    assert outer.lo <= inner.lo and inner.hi <= outer.hi


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 9), st.integers(1, 9), st.sampled_from([2, 3, 5, 7, 13]), st.integers(1, 9))
def test_convergents_reproduce_quotients(a, b, D, c):
    x = make_source(f"surd:({a}+{b}√{D})/{c}")
    cs = convergents(x, 12)
    last = cs[-1]
    # reverse Euclid on the last convergent returns the prefix, up to the usual 1-ambiguity at the end
    rev = _euclid(last.p, last.q)
    terms = partial_quotients(x, 12)
    assert rev == terms or rev[:-1] + [rev[-1] - 1, 1] == terms or rev == terms[:-2] + [terms[-2] + 1]
    for i in range(1, len(cs) - 1):
        assert cs[i].q < cs[i + 1].q


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 30))
def test_stream_regeneration_deterministic(k):
    a = make_source("liouville-irresolute")
    b = make_source("liouville-irresolute")
    assert partial_quotients(a, min(k, 8)) == partial_quotients(b, min(k, 8))
