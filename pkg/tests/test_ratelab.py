import math

import numpy as np
import pytest
from scipy import integrate

from pcbayes.core import BinLayout, DomainError, RngStream
from pcbayes.ratelab import (
    PRESETS,
    RateStudyConfig,
    fit_loglog_slope,
    l2_error,
    preset_study,
    run_rate_study,
    sup_error,
)
from pcbayes.simulate import TestFunction, s1


def test_l2_error_trivial_cases():
    lay = BinLayout.uniform(0.0, 1.0, 4)
    const = TestFunction("c", lambda x: np.full_like(np.asarray(x, float), 2.0))
    assert l2_error(np.full(4, 2.0), lay, const) == pytest.approx(0.0, abs=1e-14)
    # constant offset d: error is |d| over a unit interval
    assert l2_error(np.full(4, 3.0), lay, const) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        l2_error(np.zeros(3), lay, const)


def test_l2_error_matches_quadrature_for_bin_averages():
    lay = BinLayout.uniform(0.0, 1.0, 8)
    vals = np.array([
        integrate.quad(s1, a, b, epsabs=1e-13)[0] / (b - a)
        for a, b in zip(lay.endpoints[:-1], lay.endpoints[1:])
    ])
    got = l2_error(vals, lay, s1)
    want2 = 0.0
    for k, (a, b) in enumerate(zip(lay.endpoints[:-1], lay.endpoints[1:])):
        wv, _ = integrate.quad(lambda x, k=k: (vals[k] - s1(x)) ** 2, a, b, epsabs=1e-13)
        want2 += wv
    assert math.isclose(got, math.sqrt(want2), rel_tol=1e-6)


def test_sup_error_simple():
    lay = BinLayout.uniform(0.0, 1.0, 2)
    lin = TestFunction("lin", lambda x: np.asarray(x, float))
    got = sup_error(np.array([0.0, 0.5]), lay, lin)
    assert got == pytest.approx(0.5, rel=1e-12)


def test_fit_loglog_slope_exact_and_scale_invariant():
    ns = np.array([100, 200, 400, 800])
    errs = 3.0 * ns ** -0.5
    assert fit_loglog_slope(ns, errs) == pytest.approx(-0.5, rel=1e-12)
    assert fit_loglog_slope(ns, 10 * errs) == pytest.approx(-0.5, rel=1e-12)


def test_run_rate_study_small_vol():
    cfg = RateStudyConfig("vol", s1, 1.0, (256, 1024), seeds=4, metric="l2")
    res = run_rate_study(cfg, n_boot=50)
    assert res.mean_error.shape == (2,)
    assert res.mean_error[1] < res.mean_error[0]
    assert res.slope < 0
    assert res.slope_ci[0] <= res.slope <= res.slope_ci[1]
    d = res.as_dict()
    assert set(d) >= {"ladder", "mean_error", "slope", "slope_ci"}


def test_run_rate_study_deterministic():
    cfg = RateStudyConfig("vol", s1, 1.0, (256, 512), seeds=3, metric="l2")
    r1 = run_rate_study(cfg, n_boot=10)
    r2 = run_rate_study(cfg, n_boot=10)
    np.testing.assert_array_equal(r1.mean_error, r2.mean_error)
    assert r1.slope == r2.slope


def test_run_rate_study_jobs_match_serial():
    cfg = RateStudyConfig("poisson", PRESETS["poisson-osc"]["truth"], 1.0,
                          (5, 20), seeds=4, metric="l2sq", bins_exponent=1.0 / 3.0,
                          bins_scale=2.0)
    r1 = run_rate_study(cfg, n_boot=10, jobs=1)
    r2 = run_rate_study(cfg, n_boot=10, jobs=3)
    np.testing.assert_array_equal(r1.mean_error, r2.mean_error)


def test_ladder_must_increase():
    cfg = RateStudyConfig("vol", s1, 1.0, (1024, 256), seeds=2, metric="l2")
    with pytest.raises(DomainError):
        run_rate_study(cfg)


def test_preset_study_registry():
    cfg = preset_study("vol-s1", seeds=2)
    assert cfg.model == "vol"
    assert cfg.seeds == 2
    with pytest.raises(DomainError):
        preset_study("nope")
