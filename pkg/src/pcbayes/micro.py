"""Volatility learning from noisy price observations.

Observation model: y_i = x_i + v_i with iid N(0, eta_v) noise on top of a
latent martingale x whose increments over (t_{i-1}, t_i] are N(0, w_i),
w_i = theta_{k(i)} * delta_i. The sampler alternates exact FFBS draws of
the latent path with the chained inverse-gamma updates of the bin levels,
an inverse-gamma step for eta_v and a log-scale Metropolis step for the
smoothing parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    CredibleBand,
    DomainError,
    InverseGammaParams,
    McmcTrace,
    RngStream,
)
from .igmc import (
    BinLikelihood,
    IgmcChainState,
    IgmcHyper,
    igmc_gibbs_sweep,
    igmc_prior_sample,
    mh_alpha_update,
)

__all__ = [
    "StateSpaceModel",
    "MicroGibbsState",
    "bin_map_uniform",
    "kalman_forward",
    "ffbs_sample",
    "micro_gibbs_iteration",
    "run_micro_gibbs",
    "prior_moment_diagnostics",
    "band_sqrt_theta",
]


def bin_map_uniform(n: int, N: int) -> np.ndarray:
    """Assign n increments to N bins, m = n // N per bin, remainder to the last."""
    if not 1 <= N <= n:
        raise DomainError("need 1 <= N <= n")
    m = n // N
    idx = np.minimum(np.arange(n) // m, N - 1)
    return idx.astype(np.int64)


@dataclass
class StateSpaceModel:
    """Local-level model with bin-tied state-noise variances."""

    y: np.ndarray
    deltas: np.ndarray
    eta_v: float
    mu0: float
    C0: float
    bin_map: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.bin_map = np.asarray(self.bin_map, dtype=np.int64)
        n = self.y.size
        if self.deltas.shape != (n,) or self.bin_map.shape != (n,):
            raise DomainError("y, deltas and bin_map must share length")
        if np.any(self.deltas <= 0):
            raise DomainError("observation times must be strictly increasing")
        if self.eta_v <= 0 or self.C0 <= 0:
            raise DomainError("eta_v and C0 must be positive")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def n_bins(self) -> int:
        return int(self.bin_map.max()) + 1

    def state_variances(self, theta: np.ndarray) -> np.ndarray:
        w = np.asarray(theta, dtype=float)[self.bin_map] * self.deltas
        if np.any(w <= 0):
            raise DomainError("state-noise variances must be positive")
        return w


@dataclass
class MicroGibbsState:
    x: np.ndarray  # latent path x_0..x_n
    chain: IgmcChainState
    eta_v: float

    def __post_init__(self):
        if self.eta_v <= 0:
            raise DomainError("eta_v must be positive")


def kalman_forward(model: StateSpaceModel, theta) -> tuple:
    """Filtered means, variances and the log-evidence of y_{1:n}."""
    w = model.state_variances(theta)
    return kernels.kalman_filter(model.y, w, model.eta_v, model.mu0, model.C0)


def ffbs_sample(model: StateSpaceModel, theta, rng: RngStream) -> np.ndarray:
    """Exact draw of x_{0:n} from its smoothing law given theta and eta_v."""
    w = model.state_variances(theta)
    m, C, _ = kernels.kalman_filter(model.y, w, model.eta_v, model.mu0, model.C0)
    z = rng.normal(model.n + 1)
    return kernels.ffbs_draw(m, C, w, np.asarray(z, dtype=float))


def _bin_sums(model: StateSpaceModel, x: np.ndarray):
    dx2 = np.diff(x) ** 2 / model.deltas
    Z = np.bincount(model.bin_map, weights=dx2, minlength=model.n_bins)
    mk = np.bincount(model.bin_map, minlength=model.n_bins).astype(float)
    return mk, Z


def micro_gibbs_iteration(
    state: MicroGibbsState,
    model: StateSpaceModel,
    hyper: IgmcHyper,
    eta_prior: InverseGammaParams,
    rng: RngStream,
    mh_step: float = 0.1,
) -> MicroGibbsState:
    """One full scan: x | rest, (theta, zeta) | rest, eta_v | rest, alpha MH."""
    model.eta_v = state.eta_v
    x = ffbs_sample(model, state.chain.theta, rng)
    if not np.all(np.isfinite(x)):
        raise RuntimeError(
            "latent path diverged (non-finite FFBS draw); check eta_v and theta scales"
        )
    mk, Z = _bin_sums(model, x)
    data = BinLikelihood.from_increment_sums(mk, Z)
    chain = igmc_gibbs_sweep(state.chain, data, hyper, rng)
    if not np.all(np.isfinite(chain.theta)):
        raise RuntimeError("theta update diverged (non-finite level)")
    resid = model.y - x[1:]
    eta_v = float(
        rng.inverse_gamma(
            eta_prior.shape + model.n / 2.0,
            eta_prior.scale + float(resid @ resid) / 2.0,
        )
    )
    chain = mh_alpha_update(chain, hyper, rng, step=mh_step)
    return MicroGibbsState(x, chain, eta_v)


def run_micro_gibbs(
    model: StateSpaceModel,
    hyper: IgmcHyper,
    eta_prior: InverseGammaParams,
    iterations: int,
    rng: RngStream,
    burn_in: int | None = None,
    mh_step: float = 0.1,
    adapt: bool = True,
    init: MicroGibbsState | None = None,
) -> McmcTrace:
    """Run the Gibbs chain; trace columns are theta_1..theta_N, eta_v, alpha.

    During burn-in the Metropolis step size for log alpha is nudged toward
    a 0.3 acceptance rate.
    """
    N = model.n_bins
    if burn_in is None:
        burn_in = iterations // 5
    if init is None:
        chain0 = igmc_prior_sample(N, hyper, rng)
        # moderate starting levels avoid a long climb out of prior tails
        chain0.theta[:] = np.median(np.diff(model.y) ** 2 / model.deltas[1:]) + 1e-12
        init = MicroGibbsState(np.concatenate(([model.mu0], model.y)), chain0, model.eta_v)
    state = init
    step = mh_step
    samples = np.empty((iterations, N + 2))
    accepted = 0
    window = 0
    for it in range(iterations):
        prev_alpha = state.chain.alpha
        state = micro_gibbs_iteration(state, model, hyper, eta_prior, rng, mh_step=step)
        samples[it, :N] = state.chain.theta
        samples[it, N] = state.eta_v
        samples[it, N + 1] = state.chain.alpha
        if adapt and it < burn_in:
            accepted += state.chain.alpha != prev_alpha
            window += 1
            if window == 50:
                rate = accepted / window
                step *= math.exp(0.5 * (rate - 0.3))
                accepted = 0
                window = 0
    names = [f"theta_{k+1}" for k in range(N)] + ["eta_v", "alpha"]
    return McmcTrace(names, samples, seed=rng.seed, burn_in=burn_in)


def prior_moment_diagnostics(
    alpha: float, theta_k: float, rng: RngStream | None = None, draws: int = 1_000_000
) -> dict:
    """Analytic one-step mean/variance/MSE of theta_{k+1} - theta_k, with MC."""
    if alpha <= 2:
        raise DomainError("variance undefined for alpha <= 2")
    mean = theta_k / (alpha - 1.0)
    var = alpha * (2.0 * alpha - 1.0) * theta_k**2 / ((alpha - 1.0) ** 2 * (alpha - 2.0))
    mse = 2.0 * (alpha + 1.0) * theta_k**2 / ((alpha - 1.0) * (alpha - 2.0))
    out = {"mean": mean, "variance": var, "mse": mse}
    if rng is not None:
        gen = rng.generator
        # zeta | theta ~ IG(a, a/theta); theta' | zeta ~ IG(a, a/zeta)
        zeta = (alpha / theta_k) / gen.gamma(alpha, size=draws)
        theta_next = (alpha / zeta) / gen.gamma(alpha, size=draws)
        d = theta_next - theta_k
        out["mc_mean"] = float(d.mean())
        out["mc_variance"] = float(d.var(ddof=1))
        out["mc_mse"] = float((d**2).mean())
        out["mc_se_mean"] = float(d.std(ddof=1) / math.sqrt(draws))
        out["mc_se_mse"] = float((d**2).std(ddof=1) / math.sqrt(draws))
    return out


def band_sqrt_theta(trace: McmcTrace, level: float, n_bins: int) -> CredibleBand:
    draws = np.sqrt(trace.post_burn()[:, :n_bins])
    half = (1.0 - level) / 2.0
    return CredibleBand(
        level,
        np.quantile(draws, half, axis=0),
        np.quantile(draws, 0.5, axis=0),
        np.quantile(draws, 1.0 - half, axis=0),
    )
