"""Conjugate volatility estimation from high-frequency diffusion increments.

Independent inverse-gamma levels on time bins give a closed-form per-bin
posterior; the number of increments per bin is selected by maximising the
marginal likelihood.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import (
    BinLayout,
    CredibleBand,
    DomainError,
    InverseGammaParams,
    quantile_inverse_gamma,
)
from .simulate import PathRecord

__all__ = [
    "VolObservations",
    "HistogramPosterior",
    "bin_statistics",
    "posterior_iig",
    "posterior_mean_s2",
    "credible_band_vol",
    "log_marginal_likelihood",
    "select_m_marginal",
    "default_m_grid",
]


@dataclass
class VolObservations:
    """Increments Y_i = X_{t_i} - X_{t_{i-1}} on the uniform grid t_i = i/n."""

    increments: np.ndarray

    def __post_init__(self):
        self.increments = np.asarray(self.increments, dtype=float)

    @property
    def n(self) -> int:
        return self.increments.size

    @classmethod
    def from_path(cls, path: PathRecord, rtol: float = 1e-9) -> "VolObservations":
        t = path.times
        n = t.size - 1
        expected = np.arange(n + 1) / n
        if not np.allclose(t, t[0] + (t[-1] - t[0]) * expected, rtol=0, atol=rtol):
            raise DomainError("vol estimation requires a uniform grid on [0,1]")
        return cls(np.diff(path.values))


def _bin_counts(n: int, m: int) -> np.ndarray:
    if not 1 <= m < n:
        raise DomainError("need 1 <= m < n")
    n_bins = n // m
    r = n - m * n_bins
    mk = np.full(n_bins, m)
    mk[-1] += r
    return mk


def bin_layout_for(n: int, m: int) -> BinLayout:
    mk = _bin_counts(n, m)
    return BinLayout(np.concatenate([[0.0], np.cumsum(mk) / n]))


def bin_statistics(obs: VolObservations, m: int) -> np.ndarray:
    """Per-bin sums of squared increments; the remainder goes to the last bin."""
    mk = _bin_counts(obs.n, m)
    splits = np.cumsum(mk)[:-1]
    return np.array([chunk @ chunk for chunk in np.split(obs.increments, splits)])


@dataclass
class HistogramPosterior:
    """Independent per-bin inverse-gamma posteriors for theta_k = s^2 on B_k."""

    layout: BinLayout
    params: list[InverseGammaParams]

    @property
    def n_bins(self) -> int:
        return self.layout.n_bins


def posterior_iig(
    Z: np.ndarray,
    prior: InverseGammaParams,
    n: int,
    m: int,
) -> HistogramPosterior:
    """theta_k | data ~ IG(alpha + m_k/2, beta + n Z_k/2), independent over bins."""
    mk = _bin_counts(n, m)
    Z = np.asarray(Z, dtype=float)
    if Z.size != mk.size:
        raise DomainError("bin statistic count does not match m")
    params = [
        InverseGammaParams(prior.shape + mki / 2.0, prior.scale + n * zk / 2.0)
        for mki, zk in zip(mk, Z)
    ]
    return HistogramPosterior(bin_layout_for(n, m), params)


def posterior_mean_s2(post: HistogramPosterior) -> np.ndarray:
    return np.array([p.mean for p in post.params])


def credible_band_vol(post: HistogramPosterior, level: float) -> CredibleBand:
    """Central band for s = sqrt(theta); quantiles commute with the square root."""
    if not 0 < level < 1:
        raise DomainError("level must be in (0,1)")
    half = (1.0 - level) / 2.0
    lo = np.array([quantile_inverse_gamma(half, p) for p in post.params])
    hi = np.array([quantile_inverse_gamma(1.0 - half, p) for p in post.params])
    med = np.array([quantile_inverse_gamma(0.5, p) for p in post.params])
    return CredibleBand(level, np.sqrt(lo), np.sqrt(med), np.sqrt(hi))


def log_marginal_likelihood(
    obs: VolObservations, m: int, prior: InverseGammaParams
) -> float:
    """Log of int L_n(s) Pi(ds) for the independent inverse-gamma prior."""
    n = obs.n
    mk = _bin_counts(n, m)
    Z = bin_statistics(obs, m)
    a, b = prior.shape, prior.scale
    per_bin = (
        a * np.log(b)
        - gammaln(a)
        + gammaln(a + mk / 2.0)
        - (a + mk / 2.0) * np.log(b + n * Z / 2.0)
    )
    return float(per_bin.sum() - (n / 2.0) * np.log(2.0 * np.pi / n))


def default_m_grid(n: int) -> list[int]:
    """m = ceil(n/N) for N in 2..ceil(sqrt(n)), deduplicated."""
    top = int(np.ceil(np.sqrt(n)))
    ms = {int(np.ceil(n / N)) for N in range(2, top + 1)}
    return sorted(m for m in ms if 1 <= m < n)


def select_m_marginal(
    obs: VolObservations,
    prior: InverseGammaParams,
    m_grid: list[int] | None = None,
) -> int:
    if m_grid is None:
        m_grid = default_m_grid(obs.n)
    if not m_grid:
        raise DomainError("empty m grid")
    scores = [log_marginal_likelihood(obs, m, prior) for m in m_grid]
    return int(m_grid[int(np.argmax(scores))])
