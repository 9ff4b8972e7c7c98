"""Scale estimation for a gamma-driven SDE observed continuously.

The scaled path X^n is nondecreasing; first hitting times of the state
boundaries b_1 < ... < b_K reduce the continuous record to per-bin elapsed
times and increments, for which the scale levels xi_k (= n times the scale
on bin k) have independent inverse-gamma posteriors.
"""
from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .core import (
    CredibleBand,
    DomainError,
    InverseGammaParams,
    quantile_inverse_gamma,
)

__all__ = [
    "GsdeObservation",
    "HittingStats",
    "hitting_stats",
    "posterior_gsde",
    "loglik_gsde",
    "band_gsde",
    "posterior_median_scale",
]


@dataclass
class GsdeObservation:
    times: np.ndarray
    values: np.ndarray
    n: float
    alpha: float
    beta: float
    boundaries: np.ndarray  # b_1 < ... < b_K, with b_0 = 0 implicit

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.boundaries = np.asarray(self.boundaries, dtype=float)
        if self.times.shape != self.values.shape:
            raise DomainError("times/values mismatch")
        if np.any(np.diff(self.values) < 0):
            raise DomainError("path must be nondecreasing")
        if self.values[0] != 0.0:
            raise DomainError("path must start at 0")
        if np.any(np.diff(self.boundaries) <= 0) or self.boundaries[0] <= 0:
            raise DomainError("boundaries must be positive and increasing")
        if min(self.n, self.alpha, self.beta) <= 0:
            raise DomainError("n, alpha, beta must be positive")

    @classmethod
    def from_path(cls, record, n, alpha, beta, boundaries) -> "GsdeObservation":
        return cls(record.times, record.values, n, alpha, beta, boundaries)


@dataclass
class HittingStats:
    delta_tau: np.ndarray
    delta_x: np.ndarray

    def __post_init__(self):
        self.delta_tau = np.asarray(self.delta_tau, dtype=float)
        self.delta_x = np.asarray(self.delta_x, dtype=float)
        if self.delta_tau.shape != self.delta_x.shape:
            raise DomainError("delta_tau/delta_x mismatch")
        if np.any(self.delta_tau < 0) or np.any(self.delta_x < 0):
            raise DomainError("hitting statistics must be nonnegative")


def hitting_stats(obs: GsdeObservation) -> HittingStats:
    """Per-bin elapsed times and increments between boundary hits.

    tau_k is the first mesh time with X >= b_k; overshoot past b_k stays
    with the bin being exited.
    """
    if obs.values[-1] < obs.boundaries[-1]:
        raise DomainError("incomplete observation: path never crosses the last boundary")
    idx = np.searchsorted(obs.values, obs.boundaries, side="left")
    tau = obs.times[idx]
    x_at = obs.values[idx]
    prev_t = np.concatenate(([obs.times[0]], tau[:-1]))
    prev_x = np.concatenate(([obs.values[0]], x_at[:-1]))
    return HittingStats(tau - prev_t, x_at - prev_x)


def posterior_gsde(
    stats: HittingStats,
    n: float,
    alpha: float,
    beta: float,
    prior: list[InverseGammaParams] | InverseGammaParams,
) -> list[InverseGammaParams]:
    """xi_k | X^n ~ IG(alpha dtau_k + a_k, n beta dX_k + b_k), independent."""
    K = stats.delta_tau.size
    if isinstance(prior, InverseGammaParams):
        prior = [prior] * K
    if len(prior) != K:
        raise DomainError("prior/bins mismatch")
    return [
        InverseGammaParams(
            alpha * stats.delta_tau[k] + prior[k].shape,
            n * beta * stats.delta_x[k] + prior[k].scale,
        )
        for k in range(K)
    ]


def loglik_gsde(stats: HittingStats, xi, n: float, alpha: float, beta: float) -> float:
    """Log-likelihood ratio against the unit-scale reference.

    beta * sum_k (1 - n/xi_k) dX_k - alpha * sum_k dtau_k log(xi_k / n).
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("scale levels must be positive")
    return float(
        beta * np.sum((1.0 - n / xi) * stats.delta_x)
        - alpha * np.sum(stats.delta_tau * np.log(xi / n))
    )


def band_gsde(posterior: list[InverseGammaParams], level: float) -> CredibleBand:
    if not 0 < level < 1:
        raise DomainError("level must be in (0,1)")
    half = (1.0 - level) / 2.0
    lo = np.array([quantile_inverse_gamma(half, p) for p in posterior])
    med = np.array([quantile_inverse_gamma(0.5, p) for p in posterior])
    hi = np.array([quantile_inverse_gamma(1.0 - half, p) for p in posterior])
    return CredibleBand(level, lo, med, hi)


def posterior_median_scale(posterior: list[InverseGammaParams]) -> np.ndarray:
    """Posterior median of the scale level xi_k per bin."""
    return np.array([quantile_inverse_gamma(0.5, p) for p in posterior])
