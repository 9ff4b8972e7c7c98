import math

import mpmath
import numpy as np
import pytest

from pcbayes.core import (
    BetaParams,
    BinLayout,
    CredibleBand,
    DomainError,
    GammaParams,
    InverseGammaParams,
    McmcTrace,
    RngStream,
    cdf_gamma,
    cdf_inverse_gamma,
    exp_integral_E1,
    logpdf_gamma,
    logpdf_inverse_gamma,
    quantile_gamma,
    quantile_inverse_gamma,
    sample,
)

from oracles import e1_quadrature, gamma_cdf_oracle, gamma_quantile_bisect


def test_param_validation():
    with pytest.raises(DomainError):
        GammaParams(0.0, 1.0)
    with pytest.raises(DomainError):
        GammaParams(1.0, -1.0)
    with pytest.raises(DomainError):
        InverseGammaParams(-2.0, 1.0)
    with pytest.raises(DomainError):
        BetaParams(1.0, 0.0)
    g = GammaParams(3.0, 2.0)
    assert g.mean == 1.5
    assert g.variance == 0.75
    ig = InverseGammaParams(3.0, 4.0)
    assert ig.mean == 2.0
    assert ig.variance == 4.0


def test_bin_layout():
    lay = BinLayout.uniform(0.0, 1.0, 4)
    assert lay.n_bins == 4
    np.testing.assert_allclose(lay.widths, 0.25)
    assert lay.is_uniform()
    assert lay == BinLayout([0.0, 0.25, 0.5, 0.75, 1.0])
    idx = lay.locate([0.0, 0.1, 0.25, 0.999, 1.0])
    np.testing.assert_array_equal(idx, [0, 0, 1, 3, 3])
    with pytest.raises(DomainError):
        BinLayout([0.0, 0.5, 0.5])
    assert not BinLayout([0.0, 0.1, 1.0]).is_uniform()


def test_rng_determinism_and_streams():
    a = RngStream(42).normal(5)
    b = RngStream(42).normal(5)
    np.testing.assert_array_equal(a, b)
    c = RngStream(42, stream_id=1).normal(5)
    assert not np.allclose(a, c)
    s1 = RngStream(42).substream(3).uniform(4)
    s2 = RngStream(42).substream(3).uniform(4)
    np.testing.assert_array_equal(s1, s2)
    assert not np.allclose(RngStream(42).substream(2).uniform(4), s1)


def test_logpdf_against_mpmath():
    mpmath.mp.dps = 40
    cases = [(0.5, GammaParams(0.3, 2.0)), (3.0, GammaParams(5.0, 1.3)), (1e-3, GammaParams(1.0, 1.0))]
    for x, g in cases:
        a, r = mpmath.mpf(g.shape), mpmath.mpf(g.rate)
        want = float(a * mpmath.log(r) - mpmath.loggamma(a) + (a - 1) * mpmath.log(x) - r * x)
        assert math.isclose(float(logpdf_gamma(x, g)), want, rel_tol=1e-13, abs_tol=1e-13)
    for x, sh, sc in [(0.5, 0.3, 2.0), (3.0, 5.0, 1.3), (10.0, 1.1, 1.1)]:
        a, b = mpmath.mpf(sh), mpmath.mpf(sc)
        want = float(a * mpmath.log(b) - mpmath.loggamma(a) - (a + 1) * mpmath.log(x) - b / x)
        got = float(logpdf_inverse_gamma(x, InverseGammaParams(sh, sc)))
        assert math.isclose(got, want, rel_tol=1e-13, abs_tol=1e-13)


def test_cdf_against_independent_incomplete_gamma():
    for x, sh, rt in [(0.2, 0.7, 3.0), (1.5, 2.5, 1.0), (8.0, 4.0, 0.5)]:
        got = float(cdf_gamma(x, GammaParams(sh, rt)))
        want = gamma_cdf_oracle(x, sh, rt)
        assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-14)
    # IG cdf via the reciprocal relation
    ig = InverseGammaParams(2.5, 3.0)
    got = float(cdf_inverse_gamma(1.7, ig))
    want = 1.0 - gamma_cdf_oracle(1.0 / 1.7, 2.5, 3.0)
    assert math.isclose(got, want, rel_tol=1e-12)


def test_quantile_bisection_oracle_and_round_trip():
    g = GammaParams(1.7, 2.9)
    for p in (0.01, 0.3, 0.5, 0.9, 0.999):
        q = float(quantile_gamma(p, g))
        assert math.isclose(q, gamma_quantile_bisect(p, g.shape, g.rate), rel_tol=1e-9)
        assert math.isclose(float(cdf_gamma(q, g)), p, rel_tol=1e-10)
    ig = InverseGammaParams(3.3, 0.8)
    for p in (0.05, 0.5, 0.95):
        q = float(quantile_inverse_gamma(p, ig))
        assert math.isclose(float(cdf_inverse_gamma(q, ig)), p, rel_tol=1e-10)
    with pytest.raises(DomainError):
        quantile_gamma(0.0, g)


def test_sample_moments():
    rng = RngStream(7)
    n = 200_000
    g = GammaParams(2.0, 4.0)
    x = sample(g, rng, size=n)
    se = math.sqrt(g.variance / n)
    assert abs(x.mean() - g.mean) < 4 * se
    ig = InverseGammaParams(4.0, 3.0)
    y = sample(ig, rng, size=n)
    se = math.sqrt(ig.variance / n)
    assert abs(y.mean() - ig.mean) < 4 * se


def test_beta11_uniform_ks():
    rng = RngStream(11)
    u = sample(BetaParams(1.0, 1.0), rng, size=20_000)
    from scipy.stats import kstest

    assert kstest(u, "uniform").pvalue > 1e-3


def test_e1_values_and_bounds():
    for z in (1e-6, 0.01, 0.5, 1.0, 2.0, 10.0, 50.0):
        got = exp_integral_E1(z)
        assert math.isclose(got, e1_quadrature(z), rel_tol=1e-11)
        assert math.isclose(got, float(mpmath.e1(z)), rel_tol=1e-12)
        # standard two-sided bound
        lo = 0.5 * math.exp(-z) * math.log(1.0 + 2.0 / z)
        hi = math.exp(-z) * math.log(1.0 + 1.0 / z)
        assert lo <= got <= hi
    arr = exp_integral_E1(np.array([0.5, 5.0]))
    assert arr.shape == (2,)
    with pytest.raises(DomainError):
        exp_integral_E1(0.0)


def test_e1_derivative_fd():
    # d/dz E1(z) = -exp(-z)/z, check by central difference
    for z in (0.3, 2.0, 7.0):
        h = 1e-6 * z
        fd = (exp_integral_E1(z + h) - exp_integral_E1(z - h)) / (2 * h)
        assert math.isclose(fd, -math.exp(-z) / z, rel_tol=1e-7)


def test_credible_band_and_trace_validation():
    with pytest.raises(DomainError):
        CredibleBand(
            lower=np.array([1.0, 1.0]),
            center=np.array([0.5, 2.0]),
            upper=np.array([2.0, 3.0]),
            level=0.9,
        )
    t = McmcTrace(names=["a", "b"], samples=np.zeros((10, 2)), seed=0, burn_in=2)
    assert t.post_burn().shape == (8, 2)
    np.testing.assert_array_equal(t.column("b"), np.zeros(8))
    with pytest.raises(ValueError):
        t.column("c")
