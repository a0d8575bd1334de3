import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import erfc

from fracrd.mittag_leffler import (
    MlParams,
    SeriesAccuracyError,
    Z_MAX,
    ml,
    ml_kernel_pair,
    ml_on_array,
)
from oracles import ml_reference, ml_reference_series, ml_reference_spectral


def test_exponential_case():
    assert ml(MlParams(1.0, 1.0), 1.0) == pytest.approx(math.e, rel=1e-14)


def test_value_at_zero():
    assert ml(MlParams(0.5, 1.0), 0.0) == 1.0
    assert ml(MlParams(0.3, 0.7), 0.0) == pytest.approx(1.0 / math.gamma(0.7), rel=1e-15)


def test_erfc_identity_point():
    # E_{1/2,1}(-x) = exp(x^2) erfc(x)
    ref = math.e * erfc(1.0)
    assert ml(MlParams(0.5, 1.0), -1.0) == pytest.approx(ref, rel=1e-12)
    assert ref == pytest.approx(0.4275836, abs=5e-8)


def test_cosine_case():
    # test-only alpha = 2 path: E_{2,1}(-z^2) = cos(z)
    assert ml(MlParams(2.0, 1.0), -4.0) == pytest.approx(math.cos(2.0), rel=1e-13)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_erfc_identity_sweep(x):
    ref = ml_reference_series(0.5, 1.0, -x)
    assert abs(ref - math.exp(x * x) * erfc(x)) < 1e-13 * abs(ref)
    assert ml(MlParams(0.5, 1.0), -x) == pytest.approx(ref, rel=1e-9)


def test_domain_errors():
    with pytest.raises(ValueError):
        MlParams(0.0, 1.0)
    with pytest.raises(ValueError):
        MlParams(2.5, 1.0)
    with pytest.raises(ValueError):
        MlParams(0.5, 0.0)
    with pytest.raises(ValueError):
        MlParams(0.5, -1.0)


def test_positive_cap():
    with pytest.raises(OverflowError):
        ml(MlParams(0.5, 1.0), Z_MAX + 1e-9)
    # within the cap the series applies
    assert ml(MlParams(1.0, 1.0), 3.0) == pytest.approx(math.exp(3.0), rel=1e-13)


def test_positive_small_alpha_is_accuracy_error():
    # z^(1/alpha) explodes: the series cannot certify and positives have no fallback
    with pytest.raises(SeriesAccuracyError):
        ml(MlParams(0.05, 1.0), 4.0)


def test_kernel_pair_classical():
    s, k = ml_kernel_pair(1.0, 2.0, 0.5)
    assert s == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert k == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_kernel_pair_zero_eigenvalue():
    s, k = ml_kernel_pair(0.5, 0.0, 4.0)
    assert s == 1.0
    assert k == pytest.approx(4.0**-0.5 / math.gamma(0.5), rel=1e-14)
    assert k == pytest.approx(0.2820948, abs=5e-8)


def test_kernel_pair_erfc():
    s, _ = ml_kernel_pair(0.5, 1.0, 1.0)
    assert s == pytest.approx(math.e * erfc(1.0), rel=1e-11)


def test_kernel_pair_domain():
    with pytest.raises(ValueError):
        ml_kernel_pair(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        ml_kernel_pair(0.5, -1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.05, 0.99),
    lam=st.floats(0.01, 100.0),
    t1=st.floats(0.01, 3.0),
    factor=st.floats(1.01, 5.0),
)
def test_s_multiplier_strictly_decays(alpha, lam, t1, factor):
    s1, _ = ml_kernel_pair(alpha, lam, t1)
    s2, _ = ml_kernel_pair(alpha, lam, t1 * factor)
    assert 0.0 < s2 < s1 <= 1.0


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.1, 0.95), lam=st.floats(0.0, 50.0), t=st.floats(0.01, 2.0))
def test_kernel_pair_nonnegative(alpha, lam, t):
    s, k = ml_kernel_pair(alpha, lam, t)
    assert s >= 0.0
    assert k >= 0.0


def test_derivative_relation_random(rng):
    # d/dt E_{a,1}(-lam t^a) = -lam t^{a-1} E_{a,a}(-lam t^a)
    worst = 0.0
    for _ in range(40):
        alpha = rng.uniform(0.15, 0.9)
        lam = rng.uniform(0.2, 30.0)
        t = rng.uniform(0.05, 2.0)
        h = 1e-4 * t
        sp, _ = ml_kernel_pair(alpha, lam, t + h)
        sm, _ = ml_kernel_pair(alpha, lam, t - h)
        _, kv = ml_kernel_pair(alpha, lam, t)
        worst = max(worst, abs((sp - sm) / (2 * h) + lam * kv) / (lam * kv))
    assert worst < 1e-6


def test_integral_relation_random(rng):
    # int_0^t s^{a-1} E_{a,a}(-lam s^a) ds = (1 - E_{a,1}(-lam t^a))/lam,
    # integrated after s = sigma^{1/a} which removes the endpoint singularity
    worst = 0.0
    for _ in range(25):
        alpha = rng.uniform(0.2, 0.9)
        lam = rng.uniform(0.3, 20.0)
        t = rng.uniform(0.1, 1.5)
        val, _ = quad(
            lambda sig: ml(MlParams(alpha, alpha), -lam * sig) / alpha,
            0.0,
            t**alpha,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        ref = (1.0 - ml(MlParams(alpha, 1.0), -lam * t**alpha)) / lam
        worst = max(worst, abs(val - ref) / abs(ref))
    assert worst < 1e-8


def test_alpha_one_closed_form_far_out():
    # agreement with exp on the negative axis out to lam*t = 30
    for z in np.linspace(-30.0, 0.0, 61):
        assert ml(MlParams(1.0, 1.0), float(z)) == pytest.approx(math.exp(z), rel=1e-13)


@pytest.mark.parametrize("alpha", [0.15, 0.3, 0.5, 0.7, 0.9, 0.97])
def test_negative_axis_against_reference(alpha):
    for beta in (1.0, alpha):
        for x in np.geomspace(0.05, 3e4, 12):
            ref = ml_reference(alpha, beta, float(-x))
            got = ml(MlParams(alpha, beta), float(-x))
            assert got == pytest.approx(ref, rel=3e-10, abs=1e-280), (alpha, beta, -x)


def test_general_beta_against_series_reference():
    for beta in (0.3, 1.5, 2.0):
        for x in (0.2, 3.0, 12.0):
            for alpha in (0.6, 0.8):
                ref = ml_reference_series(alpha, beta, -x)
                assert ml(MlParams(alpha, beta), -x) == pytest.approx(ref, rel=1e-9)


def test_reference_routes_agree():
    # the two independent oracle routes coincide where both apply
    # (series feasibility shrinks with alpha: x^(1/alpha) sets the precision)
    for alpha, xs in ((0.2, (0.5, 2.0)), (0.5, (0.5, 2.0, 9.0)), (0.8, (0.5, 2.0, 9.0))):
        for x in xs:
            r1 = ml_reference_series(alpha, 1.0, -x)
            r2 = ml_reference_spectral(alpha, 1.0, -x)
            assert r1 == pytest.approx(r2, rel=1e-12)


def test_ml_on_array_matches_scalar():
    z = np.array([-0.5, -3.0, -40.0])
    out = ml_on_array(0.7, 1.0, z)
    for zi, oi in zip(z, out):
        assert oi == ml(MlParams(0.7, 1.0), float(zi))
