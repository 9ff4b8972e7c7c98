"""End-to-end acceptance checks for the core statistical guarantees.

Each test here is one headline criterion; the summary at the end of the
pytest run prints one PASS/FAIL line per criterion (see conftest.py).
These are heavier than the unit tests and take a few minutes combined.
"""
import hashlib
import math
import os
import subprocess
import sys
import warnings

import numpy as np
from scipy.stats import invgamma, gamma as gamma_dist

from pcbayes.core import (
    GammaParams,
    InverseGammaParams,
    RngStream,
    exp_integral_E1,
    cdf_gamma,
    cdf_inverse_gamma,
    logpdf_gamma,
    logpdf_inverse_gamma,
    quantile_gamma,
    quantile_inverse_gamma,
)
from pcbayes import gsde as gsde_mod
from pcbayes import micro as micro_mod
from pcbayes import poisson as poisson_mod
from pcbayes import vol as vol_mod
from pcbayes.igmc import (
    BinLikelihood,
    IgmcChainState,
    IgmcHyper,
    igmc_gibbs_sweep,
    limit_process_check,
)
from pcbayes.poisson import GmcChainState, GmcHyper, PoissonData, gmc_gibbs_sweep
from pcbayes.ratelab import preset_study, run_rate_study
from pcbayes.simulate import (
    HestonParams,
    drift_a2,
    s1,
    simulate_diffusion,
    simulate_heston,
    simulate_subordinator,
)
from pcbayes.subord import (
    AugmentedPath,
    PiecewiseLinearTheta,
    SubordConfig,
    ThetaSubordinatorModel,
    loglik_ratio_UT,
    subord_mcmc,
)

from oracles import grid_posterior_tv, dense_state_space_joint, gaussian_condition, gaussian_logpdf, e1_quadrature


# ---------------------------------------------------------------------------
# conjugate posteriors: closed form vs grid-normalised prior x likelihood
# ---------------------------------------------------------------------------

def _tv_ig(prior, shape_inc, rate_inc, post):
    def log_prior(x):
        return logpdf_inverse_gamma(x, prior)

    def log_lik(x):
        return -shape_inc * np.log(x) - rate_inc / x

    closed = lambda x: invgamma.pdf(x, post.shape, scale=post.scale)
    lo = float(invgamma.ppf(1e-12, post.shape, scale=post.scale))
    hi = float(invgamma.ppf(1 - 1e-9, post.shape, scale=post.scale))
    return grid_posterior_tv(log_prior, log_lik, closed, lo, hi, points=4001)


def _tv_gamma(prior, count, exposure, post):
    def log_prior(x):
        return logpdf_gamma(x, prior)

    def log_lik(x):
        return count * np.log(x) - exposure * x

    closed = lambda x: gamma_dist.pdf(x, post.shape, scale=1.0 / post.rate)
    lo = float(gamma_dist.ppf(1e-12, post.shape, scale=1.0 / post.rate))
    hi = float(gamma_dist.ppf(1 - 1e-9, post.shape, scale=1.0 / post.rate))
    return grid_posterior_tv(log_prior, log_lik, closed, max(lo, 1e-12), hi, points=4001)


def test_conjugate_posteriors():
    gen = np.random.default_rng(0)
    worst = 0.0
    # squared-volatility histogram: IG(a + m_k/2, b + n Z_k/2) per bin
    for _ in range(100):
        a, b = gen.uniform(0.5, 4.0), gen.uniform(0.5, 4.0)
        m = int(gen.integers(2, 40))
        n = int(m * gen.integers(2, 20))
        mk = vol_mod._bin_counts(n, m)
        Z = gen.uniform(0.05, 2.0, size=mk.size)
        post = vol_mod.posterior_iig(Z, InverseGammaParams(a, b), n, m)
        k = int(gen.integers(0, mk.size))
        worst = max(
            worst,
            _tv_ig(InverseGammaParams(a, b), mk[k] / 2.0, n * Z[k] / 2.0, post.params[k]),
        )
    # intensity histogram: G(a + H_k, b + n w_k) per bin
    from pcbayes.core import BinLayout

    for _ in range(100):
        a, b = gen.uniform(0.5, 4.0), gen.uniform(0.5, 4.0)
        N = int(gen.integers(1, 6))
        T = float(gen.uniform(0.5, 10.0))
        reps = int(gen.integers(1, 6))
        counts = gen.integers(0, 30, size=N)
        data = PoissonData(T, reps, BinLayout.uniform(0.0, T, N), counts)
        post = poisson_mod.posterior_gamma(data, GammaParams(a, b))
        k = int(gen.integers(0, N))
        worst = max(
            worst,
            _tv_gamma(GammaParams(a, b), int(counts[k]), reps * T / N, post[k]),
        )
    # gamma-SDE scale: IG(alpha dtau + a, n beta dX + b)
    for _ in range(100):
        a, b = gen.uniform(0.6, 4.0), gen.uniform(0.5, 4.0)
        dtau = gen.uniform(0.1, 5.0)
        dx = gen.uniform(0.05, 2.0)
        n, alpha, beta = gen.uniform(5, 500), gen.uniform(0.5, 2.0), gen.uniform(0.5, 2.0)
        post = gsde_mod.posterior_gsde(
            gsde_mod.HittingStats(np.array([dtau]), np.array([dx])),
            n, alpha, beta, InverseGammaParams(a, b),
        )[0]
        worst = max(worst, _tv_ig(InverseGammaParams(a, b), alpha * dtau, n * beta * dx, post))
    assert worst < 1e-4, f"worst TV {worst:.2e}"


# ---------------------------------------------------------------------------
# explicit full conditionals: draw-for-draw replication of both sweeps
# ---------------------------------------------------------------------------

def test_full_conditionals():
    # gamma chain sweep
    hyper = GmcHyper(alpha1=1.3, beta1=0.7, alpha_psi=3.0, alpha_zeta=5.0)
    data = PoissonData.from_points([np.array([0.5, 1.2, 1.9])], 2.0, 3)
    st = GmcChainState(np.array([0.8, 1.5, 2.2]), np.array([1.0, 1.0]))
    out = gmc_gibbs_sweep(st, data, hyper, RngStream(1))
    # replicate with identical draw order from the stated conditionals
    rng = RngStream(1)
    psi, H = st.psi, data.counts
    nw = data.n_replicates * data.layout.widths
    az, ap = 5.0, 3.0
    zeta = rng.inverse_gamma(np.full(2, az + ap), az * psi[:-1] + ap * psi[1:])
    shape = np.array([1.3 + az + H[0], ap + az + H[1], ap + H[2]])
    rate = np.array(
        [0.7 + az / zeta[0] + nw[0], ap / zeta[0] + az / zeta[1] + nw[1], ap / zeta[1] + nw[2]]
    )
    psi_new = rng.gamma(shape, rate)
    np.testing.assert_array_equal(out.zeta, zeta)
    np.testing.assert_array_equal(out.psi, psi_new)

    # inverse gamma chain sweep
    ihyper = IgmcHyper(alpha1=1.1, alpha=4.0, alpha_zeta=6.0, hyperprior=None)
    idata = BinLikelihood(np.array([2.0, 1.0, 3.0]), np.array([0.5, 0.2, 0.9]))
    ist = IgmcChainState(np.array([1.0, 2.0, 0.5]), np.array([1.5, 0.8]), 4.0)
    iout = igmc_gibbs_sweep(ist, idata, ihyper, RngStream(2))
    rng = RngStream(2)
    th = ist.theta
    az, a = 6.0, 4.0
    zeta = rng.inverse_gamma(np.full(2, az + a), az / th[:-1] + a / th[1:])
    shape = np.array([1.1 + az + 2.0, a + az + 1.0, a + 3.0])
    scale = np.array(
        [1.1 + az / zeta[0] + 0.5, a / zeta[0] + az / zeta[1] + 0.2, a / zeta[1] + 0.9]
    )
    th_new = rng.inverse_gamma(shape, scale)
    np.testing.assert_array_equal(iout.zeta, zeta)
    np.testing.assert_array_equal(iout.theta, th_new)

    # noise-variance conditional: IG(a + n/2, b + rss/2), checked by moments
    rng = RngStream(3)
    prior = InverseGammaParams(2.5, 1.5)
    rss = 3.7
    n = 20
    draws = rng.inverse_gamma(prior.shape + n / 2.0, prior.scale + rss / 2.0, size=200_000)
    want = (prior.scale + rss / 2.0) / (prior.shape + n / 2.0 - 1.0)
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - want) < 4 * se


# ---------------------------------------------------------------------------
# FFBS exactness against dense multivariate-Gaussian conditioning
# ---------------------------------------------------------------------------

def test_ffbs_exactness():
    from pcbayes.kernels import ffbs_draw, kalman_filter

    gen = np.random.default_rng(4)
    for n in (2, 5, 10):
        w = gen.uniform(0.2, 1.5, size=n)
        eta_v, mu0, C0 = 0.4, 0.1, 0.9
        y = np.cumsum(gen.standard_normal(n))
        m, C, loglik = kalman_filter(y, w, eta_v, mu0, C0)
        mean, cov = dense_state_space_joint(w, eta_v, mu0, C0)
        obs = np.arange(n + 1, 2 * n + 1)
        cmean, ccov = gaussian_condition(mean, cov, obs, y)
        assert abs(m[-1] - cmean[-1]) < 1e-8
        assert abs(C[-1] - ccov[-1, -1]) < 1e-8
        want = gaussian_logpdf(y, mean[obs], cov[np.ix_(obs, obs)])
        assert abs(loglik - want) < 1e-8

    # sampled-path moments at 1e5 draws within 4 MC standard errors
    n = 6
    w = gen.uniform(0.2, 1.5, size=n)
    y = np.cumsum(gen.standard_normal(n))
    m, C, _ = kalman_filter(y, w, 0.4, 0.1, 0.9)
    reps = 100_000
    z = gen.standard_normal((reps, n + 1))
    draws = np.array([ffbs_draw(m, C, w, zz) for zz in z])
    mean, cov = dense_state_space_joint(w, 0.4, 0.1, 0.9)
    cmean, ccov = gaussian_condition(mean, cov, np.arange(n + 1, 2 * n + 1), y)
    sd = np.sqrt(np.diag(ccov))
    assert np.all(np.abs(draws.mean(axis=0) - cmean) < 4 * sd / math.sqrt(reps))
    se_var = np.sqrt(2.0 / (reps - 1)) * sd**2
    assert np.all(np.abs(draws.var(axis=0, ddof=1) - sd**2) < 4 * se_var)


# ---------------------------------------------------------------------------
# one-step prediction moments of the inverse gamma chain
# ---------------------------------------------------------------------------

def test_prediction_moments():
    alpha, theta0 = 5.0, 2.0
    d = micro_mod.prior_moment_diagnostics(alpha, theta0, rng=RngStream(5), draws=1_000_000)
    assert d["mean"] == 0.5 and d["variance"] == 3.75 and d["mse"] == 4.0
    assert abs(d["mc_mean"] - d["mean"]) < 4 * d["mc_se_mean"]
    assert abs(d["mc_mse"] - d["mse"]) < 4 * d["mc_se_mse"]
    # variance via its own MC standard error
    var_se = math.sqrt(2.0) * d["variance"] / math.sqrt(1_000_000)
    assert abs(d["mc_variance"] - d["variance"]) < 8 * var_se  # heavy-tailed, allow slack


# ---------------------------------------------------------------------------
# limit-process moments of log(theta_N / theta_1)
# ---------------------------------------------------------------------------

def test_limit_process_moments():
    res = limit_process_check(1.0, 2000, RngStream(6), replicates=10_000)
    # variance target 2
    assert abs(res["var"] - 2.0) < 4 * res["se_var"], (
        f"variance {res['var']:.4f} off target 2.0"
    )
    # drifted mean target -1; the chain construction is exactly symmetric in
    # log space, so this check documents the stated target honestly
    assert abs(res["mean"] - (-1.0)) < 4 * res["se_mean"], (
        f"mean {res['mean']:.4f} (se {res['se_mean']:.4f}) vs target -1: the "
        "two-sided transition makes log(theta_N/theta_1) symmetric with mean "
        "exactly 0, so the drifted target is not attainable"
    )


# ---------------------------------------------------------------------------
# posterior contraction slopes on simulation ladders
# ---------------------------------------------------------------------------

def test_contraction_slopes():
    vol = run_rate_study(preset_study("vol-s1"), n_boot=100)
    assert -0.43 <= vol.slope <= -0.23, f"vol slope {vol.slope:.3f}"
    pois = run_rate_study(preset_study("poisson-osc"), n_boot=100)
    assert -0.87 <= pois.slope <= -0.47, f"poisson slope {pois.slope:.3f}"
    g = run_rate_study(preset_study("gsde-sigma0"), n_boot=100)
    assert -0.53 <= g.slope <= -0.13, f"gsde slope {g.slope:.3f}"


# ---------------------------------------------------------------------------
# drift robustness of the volatility histogram posterior
# ---------------------------------------------------------------------------

def _vol_l2(drift, n, seed):
    from pcbayes.ratelab import l2_error
    from pcbayes.simulate import TestFunction

    rec = simulate_diffusion(s1, drift, n, RngStream(seed, stream_id=31))
    obs = vol_mod.VolObservations.from_path(rec)
    N = max(2, int(round(n ** (1.0 / 3.0))))
    m = max(1, n // N)
    Z = vol_mod.bin_statistics(obs, m)
    post = vol_mod.posterior_iig(Z, InverseGammaParams(0.1, 0.1), n, m)
    est = vol_mod.posterior_mean_s2(post)
    truth_sq = TestFunction("s1^2", lambda x: np.asarray(s1(x)) ** 2)
    return l2_error(est, post.layout, truth_sq)


def test_drift_robustness():
    n, seeds = 32001, 50
    e0 = np.mean([_vol_l2(None, n, s) for s in range(seeds)])
    e2 = np.mean([_vol_l2(drift_a2, n, s) for s in range(seeds)])
    rel = abs(e2 - e0) / e0
    assert rel < 0.25, f"relative L2 change under drift: {rel:.3f}"


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def test_special_functions():
    assert abs(exp_integral_E1(1.0) - e1_quadrature(1.0)) < 1e-12
    # Frullani limit at x = 1e-8
    x = 1e-8
    num = exp_integral_E1(2.0 * x) - exp_integral_E1(5.0 * x)
    assert abs(num - math.log(2.5)) < 1e-6
    # quantile round trips
    gen = np.random.default_rng(7)
    for _ in range(50):
        gp = GammaParams(gen.uniform(0.2, 8.0), gen.uniform(0.2, 8.0))
        p = gen.uniform(0.01, 0.99)
        assert abs(float(cdf_gamma(quantile_gamma(p, gp), gp)) - p) < 1e-8
        ip = InverseGammaParams(gen.uniform(0.2, 8.0), gen.uniform(0.2, 8.0))
        assert abs(float(cdf_inverse_gamma(quantile_inverse_gamma(p, ip), ip)) - p) < 1e-8


# ---------------------------------------------------------------------------
# Heston end-to-end coverage of the true spot volatility
# ---------------------------------------------------------------------------

def _heston_coverage(seed, n=4000, N=80, iters=1500):
    eta_v = 1e-6
    rec = simulate_heston(HestonParams(), eta_v, n, RngStream(seed))
    bin_map = micro_mod.bin_map_uniform(n, N)
    model = micro_mod.StateSpaceModel(
        rec.values, np.full(n, 1.0 / n), eta_v, 0.0, 1.0, bin_map
    )
    hyper = IgmcHyper(alpha1=0.1, hyperprior=("lognormal", 0.0, 1.0))
    trace = micro_mod.run_micro_gibbs(
        model, hyper, InverseGammaParams(0.1, 1e-12), iters, RngStream(seed, stream_id=5)
    )
    band = micro_mod.band_sqrt_theta(trace, 0.95, N)
    truth = rec.truth_values[1:]  # per-increment grid
    lo = band.lower[bin_map]
    hi = band.upper[bin_map]
    return float(np.mean((truth >= lo) & (truth <= hi)))


def test_heston_coverage():
    cov = [_heston_coverage(seed) for seed in range(10)]
    med = float(np.median(cov))
    assert med >= 0.80, f"median coverage {med:.3f}, per-seed {np.round(cov, 3)}"


# ---------------------------------------------------------------------------
# subordinator self-recovery and mesh-refinement stability
# ---------------------------------------------------------------------------

_SUB_TRUTH = (1.0, 80.0, 1.4, 60.0)


def _subord_covers(seed, n=200, m=25, iters=40_000):
    a, b, a1, b1 = _SUB_TRUTH
    th = PiecewiseLinearTheta([2.0], [np.log(b / b1)], [a1 - a])
    rec = simulate_subordinator(a, b, th, n, m, RngStream(seed))
    Z = np.asarray(rec.meta["increments"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = subord_mcmc(
            Z, SubordConfig(b1=2.0, m=m, iterations=iters), RngStream(seed, stream_id=7)
        )
    d = tr.post_burn()
    return all(
        bool(np.quantile(d[:, j], 0.025) <= t <= np.quantile(d[:, j], 0.975))
        for j, t in enumerate(_SUB_TRUTH)
    )


def test_subordinator_recovery():
    # mesh-refinement drift of the log-likelihood ratio: coarsening a fine
    # augmentation from 2000 to 1000 cells per interval moves U_T by < 1%.
    # The two-segment model is continuous at its breakpoint (rho1 =
    # -slope * bp); with a jump in theta there, reallocating small-jump
    # dust across the boundary costs O(beta/m) per unit time and the ratio
    # cannot converge at this rate.
    alpha, beta, bp, slope = 1.0, 80.0, 2.0, 0.1
    rho1 = -slope * bp
    th = PiecewiseLinearTheta([bp], [rho1], [slope])
    model = ThetaSubordinatorModel(
        alpha, beta, np.array([bp]), np.array([rho1]), np.array([slope])
    )
    rec = simulate_subordinator(alpha, beta, th, 20, 2000, RngStream(99))
    fine = AugmentedPath(rec.meta["subincrements"])
    coarse = AugmentedPath(fine.sub.reshape(20, 1000, 2).sum(axis=2))
    u_fine = loglik_ratio_UT(fine, model, alpha0=2.0)
    u_coarse = loglik_ratio_UT(coarse, model, alpha0=2.0)
    drift = abs(u_fine - u_coarse) / abs(u_fine)
    assert drift < 0.01, f"mesh drift {drift:.4f} (U {u_fine:.3f} -> {u_coarse:.3f})"

    covered = sum(_subord_covers(seed) for seed in range(20))
    assert covered >= 17, f"covered all four parameters in {covered}/20 runs"


# ---------------------------------------------------------------------------
# determinism of command line artifacts
# ---------------------------------------------------------------------------

def _sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def _run_cli(args, cwd):
    env = dict(os.environ)
    out = subprocess.run(
        [sys.executable, "-m", "pcbayes.cli"] + args,
        capture_output=True, text=True, cwd=cwd, env=env,
    )
    assert out.returncode == 0, out.stderr
    return out


def test_determinism(tmp_path):
    cases = {
        "vol-s1": ["--n", "512"],
        "vol-s2": ["--n", "512"],
        "vol-blocks-igmc": ["--n", "512"],
        "micro-heston": ["--n", "400"],
        "poisson-osc": ["--replicates", "3"],
        "gsde-sigma0": ["--n", "100"],
        "subord-twoseg": ["--n", "10", "--m", "10"],
    }
    for name, extra in cases.items():
        hashes = []
        for tag in ("r1", "r2"):
            out = f"{name}-{tag}.csv"
            _run_cli(["simulate", "--preset", name, "--seed", "11", "--out", out] + extra, tmp_path)
            hashes.append(_sha(tmp_path / out))
        assert hashes[0] == hashes[1], f"simulate artifacts differ for {name}"
    # one full fit artifact per closed-form model
    _run_cli(["simulate", "--preset", "vol-s1", "--n", "1024", "--seed", "12", "--out", "p.csv"], tmp_path)
    fit_hashes = []
    for tag in ("f1", "f2"):
        _run_cli(["fit", "--model", "vol", "--in", "p.csv", "--seed", "12", "--bins", "8",
                  "--out", f"{tag}.json"], tmp_path)
        fit_hashes.append((_sha(tmp_path / f"{tag}.json"), _sha(tmp_path / f"{tag}.csv")))
    assert fit_hashes[0] == fit_hashes[1]
