import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesaro_spaces import norms
from cesaro_spaces.norms import Method, ces_norm, conjugate, d_norm, dyadic_tail, lp_norm, powerlog_tail_integral
from cesaro_spaces.sequences import FiniteSupport, LacunarySpike, PowerLog, UnitBasis, truncate

ZETA2 = float(mpmath.zeta(2))


def test_conjugate_examples():
    assert conjugate(2).p_prime == 2
    assert conjugate(1.5).p_prime == pytest.approx(3, abs=1e-14)
    assert conjugate(4).p_prime == pytest.approx(4 / 3, abs=1e-14)
    for p in (1.01, 1.5, 2.7, 40.0):
        c = conjugate(p)
        assert abs(1 / c.p + 1 / c.p_prime - 1) < 1e-14


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0, math.inf, math.nan])
def test_conjugate_rejects(p):
    with pytest.raises(ValueError):
        conjugate(p)


def test_lp_examples():
    for p in (1.5, 2.0, 3.0):
        e = lp_norm(UnitBasis(7), p, 7)
        assert (e.lo, e.hi, e.method) == (1.0, 1.0, Method.EXACT_FINITE)
    e = lp_norm(PowerLog(1.0), 2, 10**6)
    assert e.contains(math.sqrt(ZETA2))
    assert e.method is Method.INTEGRAL_TAIL
    e = lp_norm(PowerLog(0.5), 2, 10**4)
    assert e.method is Method.DIVERGENT_LOWER_BOUND
    assert e.hi == math.inf


def test_ces_examples():
    e = ces_norm(UnitBasis(1), 2, 10**6)
    assert e.contains(math.sqrt(ZETA2)) and e.width < 1e-5
    e = ces_norm(UnitBasis(2), 2, 10**6)
    assert e.contains(math.sqrt(ZETA2 - 1)) and e.width < 1e-5


def test_ces_of_long_block_of_ones_grows():
    for N in (10, 1000, 100_000):
        e = ces_norm(FiniteSupport((1.0,) * N), 2, N)
        assert e.lo >= math.sqrt(N * (1 - 1e-12))


def test_d_examples():
    e = d_norm(UnitBasis(4), 2)
    assert (e.lo, e.hi, e.method) == (2.0, 2.0, Method.EXACT_FINITE)
    for n in (1, 10, 100):
        for p in (1.25, 2.0, 3.0):
            e = d_norm(UnitBasis(n), p)
            assert abs(e.lo - n ** (1 / p)) <= 1e-12 * n ** (1 / p)
            assert e.lo == e.hi
    assert d_norm(FiniteSupport((0, 3, 1, 2)), 1).lo == 10.0


def test_d_of_growing_spike_is_divergent():
    e = d_norm(LacunarySpike(0.5), 2, 1024)
    assert e.method is Method.DIVERGENT_LOWER_BOUND
    assert e.lo >= norms.DIVERGENCE_THRESHOLD


@pytest.mark.parametrize("fn", [lp_norm, ces_norm, d_norm])
def test_p_domain(fn):
    with pytest.raises(ValueError):
        fn(PowerLog(1.0), 1.0, 100)


@pytest.mark.parametrize(
    "s,beta,N",
    [(2.0, 0.0, 10.0), (1.5, 1.0, 7.0), (1.2, -2.0, 100.0), (3.0, 0.5, 1.0), (1.0, 2.0, 5.0), (1.0, 1.5, 50.0)],
)
def test_powerlog_tail_integral_matches_quadrature(s, beta, N):
    # in the variable u = 1 + ln t the integrand is e^((1-s)(u-1)) u^-beta
    f = lambda u: mpmath.exp((1 - s) * (u - 1)) * u ** -beta
    u0 = 1 + mpmath.log(N)
    with mpmath.workdps(30):
        ref = mpmath.quad(f, [u0, u0 + 1, u0 + 10, u0 + 100, mpmath.inf])
    assert powerlog_tail_integral(s, beta, N) == pytest.approx(float(ref), rel=1e-8)


def test_powerlog_tail_integral_divergent():
    assert powerlog_tail_integral(0.9, 5.0, 10) == math.inf
    assert powerlog_tail_integral(1.0, 1.0, 10) == math.inf


@pytest.mark.parametrize("theta,kappa,J", [(-0.5, 0.0, 3), (-1.0, 2.0, 10), (0.0, -2.0, 4), (-0.2, -3.0, 20)])
def test_dyadic_tail_majorizes_series(theta, kappa, J):
    with mpmath.workdps(30):
        ref = mpmath.nsum(lambda j: mpmath.mpf(2) ** (theta * j) * j ** kappa, [J + 1, mpmath.inf])
    got = dyadic_tail(theta, kappa, J)
    assert got >= float(ref) * (1 - 1e-12)
    assert got <= float(ref) * 2.0 + 1e-12


def test_divergence_certificate_minorant_is_real():
    e = lp_norm(PowerLog(0.4, 1.0), 2, 1000)
    cert = e.certificate
    assert e.method is Method.DIVERGENT_LOWER_BOUND
    s, beta = 0.8, 2.0
    u0 = 1 + math.log(cert["start"])
    U = math.exp(cert["ln_L_cut"])
    # ∫_{start}^{t(U)} t^-s L^-beta dt in the variable u = L(t)
    with mpmath.workdps(30):
        val = mpmath.quad(lambda u: mpmath.exp((1 - s) * (u - 1)) * u ** -beta, [u0, U])
    assert val >= cert["value"]


FAMILIES = [
    PowerLog(1.0),
    PowerLog(0.8, 1.0),
    PowerLog(0.7, -0.5),
    PowerLog(1.0, 2.0),
    PowerLog(2.0, -1.0),
    PowerLog(0.1, -2.0),
    LacunarySpike(-0.5),
    LacunarySpike(-1.0, 2.0),
    LacunarySpike(-0.3, -1.0),
    LacunarySpike(0.0, 2.0),
    LacunarySpike(0.2, 1.0),
    UnitBasis(5),
    FiniteSupport((0.0, 3.0, -1.0, 2.0)),
]


@pytest.mark.parametrize("seq", FAMILIES, ids=repr)
@pytest.mark.parametrize("scale", ["ELL", "CES", "D"])
@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_enclosures_nest_across_truncations(seq, scale, p):
    """hi at a coarse level must dominate lo at a much finer one."""
    try:
        coarse = norms.norm(seq, scale, p, 64)
    except norms.ops.UnsupportedError:
        pytest.skip("unsupported")
    fine = norms.norm(seq, scale, p, 1 << 20)
    assert coarse.lo <= coarse.hi
    assert fine.lo <= coarse.hi * (1 + 1e-12)
    assert fine.lo >= coarse.lo * (1 - 1e-12)


@pytest.mark.parametrize("seq", FAMILIES, ids=repr)
@pytest.mark.parametrize("scale", ["ELL", "CES", "D"])
def test_doubling_never_widens(seq, scale):
    for p in (1.5, 3.0):
        prev = None
        for N in (5, 10, 20, 40, 80, 160, 320, 640, 1280, 2560):
            try:
                e = norms.norm(seq, scale, p, N)
            except norms.ops.UnsupportedError:
                return
            if prev is not None:
                assert e.hi <= prev.hi + 1e-12 * max(1.0, prev.hi)
                assert e.lo >= prev.lo - 1e-12 * prev.lo
            prev = e


def test_exact_references():
    # zeta-type closed forms
    e = lp_norm(PowerLog(1.5), 2, 1 << 16)
    assert e.contains(float(mpmath.zeta(3)) ** 0.5)
    # sum_j 2^-j over spikes at 2^j
    e = lp_norm(LacunarySpike(-0.5), 2, 1 << 20)
    assert e.contains(1.0)
    e = d_norm(LacunarySpike(-1.0), 2, 1 << 16)
    # envelope of heights 2^-j: 1/2 on {1, 2}, then 2^(J-1) entries of 2^-J on block J
    ref = 2 * 0.25 + sum(2.0 ** (J - 1) * 4.0 ** -J for J in range(2, 200))
    assert e.contains(math.sqrt(ref))


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(0.05, 2.5),
    b=st.floats(-2.0, 2.0),
    p=st.sampled_from([1.5, 2.0, 4.0]),
)
def test_coordinate_bounds_powerlog(a, b, p):
    seq = PowerLog(a, b)
    x = truncate(seq, 1000).terms
    n = np.arange(1, 1001)
    ces = ces_norm(seq, p, 1 << 12)
    d = d_norm(seq, p, 1 << 12)
    if ces.finite:
        assert (x <= n * ces.hi + 1e-9).all()
    if d.finite:
        assert (x <= d.hi + 1e-9).all()


@settings(max_examples=60, deadline=None)
@given(
    p=st.sampled_from([1.5, 2.0, 4.0]),
    margin=st.floats(1.25, 3.0),
    b=st.floats(-1.0, 2.0),
    spike=st.booleans(),
)
def test_hardy_domination_of_enclosures(p, margin, b, spike):
    """hi(ces) <= p' hi(l_p), sampled away from the critical line a p = 1."""
    seq = LacunarySpike(-margin / p, b) if spike else PowerLog(margin / p, b)
    lp = lp_norm(seq, p, 1 << 14)
    ces = ces_norm(seq, p, 1 << 14)
    assert lp.finite and ces.finite
    assert ces.hi <= conjugate(p).p_prime * lp.hi + 1e-9


def test_enclosure_json():
    doc = lp_norm(PowerLog(0.5), 2, 100).to_json()
    assert doc["hi"] is None and doc["method"] == "DIVERGENT_LOWER_BOUND"
    doc = d_norm(UnitBasis(4), 2).to_json()
    assert doc == {**doc, "lo": 2.0, "hi": 2.0, "method": "EXACT_FINITE"}


IMAGE_FAMILIES = [
    LacunarySpike(0.0, 1.0),
    LacunarySpike(0.0, 0.5),
    LacunarySpike(-0.3, 1.0),
    FiniteSupport((0.0, 3.0, -1.0, 2.0)),
    UnitBasis(5),
    PowerLog(1.0),
    PowerLog(0.8, 1.0),
]


@pytest.mark.parametrize("seq", IMAGE_FAMILIES, ids=repr)
@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_cesaro_image_d_norm_brackets_brute_force(seq, p):
    # brute force: envelope of the means computed on a much longer truncation
    M = 1 << 20
    x = np.abs(truncate(seq, M).terms)
    means = np.cumsum(x) / np.arange(1, M + 1)
    env = np.maximum.accumulate(means[::-1])[::-1]
    N = 1 << 12
    partial = float(np.sum(env[:N] ** p)) ** (1 / p)
    coarse = norms.cesaro_image_d_norm(seq, p, N)
    fine = norms.cesaro_image_d_norm(seq, p, M // 4)
    assert coarse.lo == pytest.approx(partial, rel=1e-12)
    assert coarse.lo <= fine.lo <= fine.hi <= coarse.hi * (1 + 1e-12)


def test_cesaro_image_d_norm_unsupported():
    with pytest.raises(norms.ops.UnsupportedError):
        norms.cesaro_image_d_norm(PowerLog(0.5, -1.0), 2, 100)
    with pytest.raises(norms.ops.UnsupportedError):
        norms.cesaro_image_d_norm(LacunarySpike(-0.5, -3.0), 2, 100)
