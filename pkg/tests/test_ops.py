import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cesaro_spaces import ops
from cesaro_spaces.sequences import (
    FiniteSupport,
    LacunarySpike,
    PowerLog,
    StepSequence,
    TailKind,
    UnitBasis,
    make_view,
    truncate,
)


def view(values, kind=TailKind.ZERO):
    return make_view(np.asarray(values, dtype=float), kind)


def test_cesaro_examples():
    np.testing.assert_allclose(ops.cesaro(view([1, 1 / 2, 1 / 3])).terms, [1, 3 / 4, 11 / 18], rtol=1e-15)
    assert ops.cesaro(view([1, 1, 1, 1])).terms.tolist() == [1, 1, 1, 1]
    np.testing.assert_allclose(ops.cesaro(truncate(UnitBasis(1), 4)).terms, [1, 1 / 2, 1 / 3, 1 / 4])
    assert ops.cesaro(view([1, 0])).tail_kind is TailKind.UNKNOWN


def test_cesaro_iterate_examples():
    assert ops.cesaro_iterate(view([1, 1, 1]), 2).terms.tolist() == [1, 1, 1]
    np.testing.assert_allclose(ops.cesaro_iterate(truncate(UnitBasis(1), 3), 2).terms, [1, 3 / 4, 11 / 18])
    np.testing.assert_allclose(ops.cesaro_iterate(view([2, 0, 0]), 1).terms, [2, 1, 2 / 3])
    for bad in (0, 3, -1):
        with pytest.raises(ValueError):
            ops.cesaro_iterate(view([1.0]), bad)


def test_cesaro_matches_exact_rational_means():
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(300)
    exact = []
    acc = Fraction(0)
    for k, v in enumerate(vals, start=1):
        acc += Fraction(v)
        exact.append(float(acc / k))
    np.testing.assert_allclose(ops.cesaro(view(vals)).terms, exact, rtol=1e-13, atol=1e-15)


def test_compensated_prefix_sum_harmonic_1e7():
    N = 10_000_000
    x = truncate(PowerLog(1.0), N).terms
    got = ops.compensated_prefix_sum(x)[-1]
    with mpmath.workdps(40):
        ref = mpmath.harmonic(N)
    assert abs(got - float(ref)) / float(ref) < 1e-12


def test_compensated_sum_cancellation():
    assert ops.compensated_sum([1e16, 1.0, -1e16]) == 1.0
    assert ops.compensated_sum([]) == 0.0


def test_envelope_examples():
    assert ops.envelope(view([0, 3, 1, 2, 0, 0]), 0.0).terms.tolist() == [3, 3, 2, 2, 0, 0]
    assert ops.envelope(view([1, 1, 1]), 1.0).terms.tolist() == [1, 1, 1]
    assert ops.envelope(truncate(UnitBasis(4), 6), 0.0).terms.tolist() == [1, 1, 1, 1, 0, 0]
    with pytest.raises(ValueError):
        ops.envelope(view([1.0]), -1.0)


def test_envelope_properties_and_idempotence():
    rng = np.random.default_rng(3)
    v = view(rng.standard_normal(500))
    env = ops.envelope(v, 0.25)
    assert (np.diff(env.terms) <= 0).all()
    assert (env.terms >= np.abs(v.terms)).all()
    again = ops.envelope(env, 0.25)
    assert again.terms.tolist() == env.terms.tolist()


def test_symbolic_envelope_examples():
    assert ops.envelope_symbolic(UnitBasis(4)) == StepSequence(((1.0, 4),))
    assert ops.envelope_symbolic(PowerLog(1.0)) == PowerLog(1.0)
    env = ops.envelope_symbolic(LacunarySpike(-1.0))
    m = np.arange(1, 10_001)
    expected = 2.0 ** -np.maximum(1, np.ceil(np.log2(m)))
    np.testing.assert_array_equal(env.terms_at(m), expected)
    with pytest.raises(ops.UnsupportedError):
        ops.envelope_symbolic(LacunarySpike(0.1))


@pytest.mark.parametrize(
    "seq",
    [
        PowerLog(1.0),
        PowerLog(0.5, -1.0),
        PowerLog(0.1, -2.0),
        PowerLog(0.0, 1.0),
        LacunarySpike(-1.0),
        LacunarySpike(-0.2, -3.0),
        LacunarySpike(-0.5, 2.0),
        LacunarySpike(0.0, 1.0),
        LacunarySpike(0.0, 0.0),
        UnitBasis(17),
        FiniteSupport((0.0, 3.0, -1.0, 2.0, 0.0, -5.0)),
    ],
    ids=repr,
)
def test_symbolic_envelope_matches_suffix_max(seq):
    N = 10_000
    env = ops.envelope_symbolic(seq)
    brute = ops.envelope(truncate(seq, N), ops.tail_sup(seq, N))
    np.testing.assert_array_equal(env.terms_at(np.arange(1, N + 1)), brute.terms)


def test_tail_sup_brute_force():
    seq = LacunarySpike(-0.2, -3.0)
    x = truncate(seq, 1 << 22).terms
    for N in (1, 5, 64, 1000, 50_000):
        assert ops.tail_sup(seq, N) == x[N:].max()
    assert ops.tail_sup(LacunarySpike(0.5), 10) == math.inf
    assert ops.tail_sup(UnitBasis(3), 3) == 0.0


def test_positivity_and_domination():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = rng.standard_normal(200)
        signed = ops.cesaro(view(x)).terms
        absolute = ops.cesaro(view(np.abs(x))).terms
        assert (absolute >= 0).all()
        assert (np.abs(signed) <= absolute + 1e-15).all()
