"""Independent numerical oracles used across the test suite.

Everything here is computed by a different route than the library code:
dense multivariate-Gaussian conditioning for the state-space model,
grid/quadrature normalisation for conjugate posteriors, bisection on an
independently coded incomplete-gamma CDF for quantiles, and mpmath for
arbitrary-precision density values.
"""
from __future__ import annotations

import math

import numpy as np


def dense_state_space_joint(w, eta_v, mu0, C0):
    """Mean and covariance of (x_0..x_n, y_1..y_n) for the local-level model."""
    n = len(w)
    # x_i = mu0 + sum_{j<=i} sqrt(w_j) u_j + sqrt(C0) u_0, y_i = x_i + v_i
    mean = np.full(2 * n + 1, mu0)
    cov_x = np.empty((n + 1, n + 1))
    cum = np.concatenate([[0.0], np.cumsum(w)])
    for i in range(n + 1):
        for j in range(n + 1):
            cov_x[i, j] = C0 + cum[min(i, j)]
    cov = np.zeros((2 * n + 1, 2 * n + 1))
    cov[: n + 1, : n + 1] = cov_x
    cov[: n + 1, n + 1 :] = cov_x[:, 1:]
    cov[n + 1 :, : n + 1] = cov_x[1:, :]
    cov[n + 1 :, n + 1 :] = cov_x[1:, 1:] + eta_v * np.eye(n)
    return mean, cov


def gaussian_condition(mean, cov, obs_idx, y):
    """Conditional mean/covariance of the remaining coordinates given obs."""
    obs_idx = np.asarray(obs_idx)
    all_idx = np.arange(len(mean))
    rest = np.setdiff1d(all_idx, obs_idx)
    S_oo = cov[np.ix_(obs_idx, obs_idx)]
    S_ro = cov[np.ix_(rest, obs_idx)]
    S_rr = cov[np.ix_(rest, rest)]
    sol = np.linalg.solve(S_oo, (y - mean[obs_idx]))
    cmean = mean[rest] + S_ro @ sol
    ccov = S_rr - S_ro @ np.linalg.solve(S_oo, S_ro.T)
    return cmean, ccov


def gaussian_logpdf(y, mean, cov):
    d = len(y)
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    r = y - mean
    return float(-0.5 * (d * math.log(2.0 * math.pi) + logdet + r @ np.linalg.solve(cov, r)))


def grid_posterior_tv(log_prior, log_lik, closed_pdf, lo, hi, points=8001):
    """Total variation between the grid-normalised prior x likelihood and a
    closed-form density, both restricted to [lo, hi]."""
    x = np.linspace(lo, hi, points)
    logp = log_prior(x) + log_lik(x)
    logp -= logp.max()
    p = np.exp(logp)
    p /= np.trapezoid(p, x)
    q = closed_pdf(x)
    qn = np.trapezoid(q, x)
    return 0.5 * np.trapezoid(np.abs(p - q / qn), x)


def _lower_gamma_reg(a: float, x: float) -> float:
    """Regularised lower incomplete gamma via series / continued fraction,
    coded independently of scipy (Numerical Recipes style)."""
    if x < 0 or a <= 0:
        raise ValueError
    if x == 0:
        return 0.0
    if x < a + 1.0:
        term = 1.0 / a
        total = term
        k = a
        for _ in range(10000):
            k += 1.0
            term *= x / k
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    # continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    q = h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    return 1.0 - q


def gamma_cdf_oracle(x, shape, rate):
    return _lower_gamma_reg(shape, rate * x)


def gamma_quantile_bisect(p, shape, rate, tol=1e-12):
    lo, hi = 0.0, 1.0
    while gamma_cdf_oracle(hi, shape, rate) < p:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("bisection bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gamma_cdf_oracle(mid, shape, rate) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def e1_quadrature(z: float, rel_tol=1e-13) -> float:
    """E1 by adaptive quadrature on the substitution t = z + u/(1-u)."""
    from scipy.integrate import quad

    val, err = quad(
        lambda u: math.exp(-(z + u / (1.0 - u))) / (z + u / (1.0 - u)) / (1.0 - u) ** 2,
        0.0,
        1.0,
        epsabs=0.0,
        epsrel=rel_tol,
        limit=400,
    )
    return val


def e1_continued_fraction(z: float) -> float:
    """Independent Lentz-free evaluation: classic ascending CF via mpmath."""
    import mpmath

    return float(mpmath.e1(z))
