"""Shared domain types, distribution kernels and special functions.

Conventions used throughout the package: Gamma distributions are
parametrised by (shape, rate), inverse Gamma distributions by
(shape, scale), i.e. X ~ IG(a, b) iff 1/X ~ Gamma(a, rate=b).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.random import Generator, SeedSequence, default_rng
from scipy import special

EULER_GAMMA = 0.5772156649015328606

__all__ = [
    "GammaParams",
    "InverseGammaParams",
    "NormalParams",
    "BetaParams",
    "BinLayout",
    "RngStream",
    "CredibleBand",
    "McmcTrace",
    "logpdf_gamma",
    "logpdf_inverse_gamma",
    "cdf_gamma",
    "cdf_inverse_gamma",
    "quantile_gamma",
    "quantile_inverse_gamma",
    "sample",
    "exp_integral_E1",
]


class DomainError(ValueError):
    """Raised when an argument is outside the mathematical domain."""


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError(f"gamma params must be positive, got {self}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2


@dataclass(frozen=True)
class InverseGammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError(f"inverse gamma params must be positive, got {self}")

    @property
    def mean(self) -> float:
        if self.shape <= 1:
            raise DomainError("inverse gamma mean requires shape > 1")
        return self.scale / (self.shape - 1)

    @property
    def variance(self) -> float:
        if self.shape <= 2:
            raise DomainError("inverse gamma variance requires shape > 2")
        return self.scale**2 / ((self.shape - 1) ** 2 * (self.shape - 2))


@dataclass(frozen=True)
class NormalParams:
    mean: float
    var: float

    def __post_init__(self):
        if not self.var >= 0:
            raise DomainError("normal variance must be nonnegative")


@dataclass(frozen=True)
class BetaParams:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("beta params must be positive")


class BinLayout:
    """Partition of an interval into N bins.

    Bins are right-open except the last one, which is closed:
    B_k = [b_{k-1}, b_k) for k < N and B_N = [b_{N-1}, b_N].
    """

    def __init__(self, endpoints: Sequence[float]):
        pts = np.asarray(endpoints, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DomainError("need at least two endpoints")
        if not np.all(np.diff(pts) > 0):
            raise DomainError("endpoints must be strictly increasing")
        self.endpoints = pts

    @classmethod
    def uniform(cls, a: float, b: float, n_bins: int) -> "BinLayout":
        return cls(np.linspace(a, b, n_bins + 1))

    @property
    def n_bins(self) -> int:
        return self.endpoints.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.endpoints)

    @property
    def left(self) -> np.ndarray:
        return self.endpoints[:-1]

    @property
    def right(self) -> np.ndarray:
        return self.endpoints[1:]

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        w = self.widths
        return bool(np.all(np.abs(w - w[0]) <= rtol * w[0]))

    def locate(self, x) -> np.ndarray:
        """0-based bin index per point; the right endpoint belongs to the last bin."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.endpoints[0]) or np.any(x > self.endpoints[-1]):
            raise DomainError("points outside layout")
        idx = np.searchsorted(self.endpoints, x, side="right") - 1
        return np.minimum(idx, self.n_bins - 1)

    def __eq__(self, other):
        return isinstance(other, BinLayout) and np.array_equal(
            self.endpoints, other.endpoints
        )

    def __repr__(self):
        return f"BinLayout(N={self.n_bins}, [{self.endpoints[0]}, {self.endpoints[-1]}])"


@dataclass
class RngStream:
    """Seeded random stream; equal (seed, stream_id) gives identical draws.

    A single instance must not be shared across threads; spawn a stream
    per chain/replicate instead.
    """

    seed: int
    stream_id: int = 0
    _gen: Generator | None = field(default=None, repr=False, compare=False)

    @property
    def generator(self) -> Generator:
        if self._gen is None:
            self._gen = default_rng(SeedSequence(self.seed, spawn_key=(self.stream_id,)))
        return self._gen

    def substream(self, k: int) -> "RngStream":
        # cheap derived stream: offsets the stream id deterministically
        return RngStream(self.seed, (self.stream_id << 20) + 1 + k)

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def gamma(self, shape, rate=1.0, size=None):
        return self.generator.gamma(shape, size=size) / rate

    def inverse_gamma(self, shape, scale=1.0, size=None):
        return scale / self.generator.gamma(shape, size=size)

    def beta(self, a, b, size=None):
        return self.generator.beta(a, b, size=size)

    def dirichlet_gamma(self, alphas):
        """Dirichlet weights via normalised gamma draws (alphas may be tiny)."""
        g = self.generator.gamma(alphas)
        tot = g.sum()
        if tot == 0.0:  # all-underflow guard for very small shapes
            g = np.zeros_like(g)
            g[self.generator.integers(len(g))] = 1.0
            return g
        return g / tot


@dataclass
class CredibleBand:
    level: float
    lower: np.ndarray
    center: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if not 0 < self.level < 1:
            raise DomainError("level must be in (0,1)")
        self.lower = np.asarray(self.lower, dtype=float)
        self.center = np.asarray(self.center, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if np.any(self.lower > self.center) or np.any(self.center > self.upper):
            raise DomainError("band must satisfy lower <= center <= upper")


@dataclass
class McmcTrace:
    """Iteration-indexed samples of named parameters."""

    names: list[str]
    samples: np.ndarray  # (iterations, n_params)
    seed: int
    burn_in: int = 0
    thinning: int = 1

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.shape[1] != len(self.names):
            raise ValueError("names/samples mismatch")

    def post_burn(self) -> np.ndarray:
        return self.samples[self.burn_in :]

    def column(self, name: str) -> np.ndarray:
        return self.post_burn()[:, self.names.index(name)]


# ---------------------------------------------------------------------------
# densities, cdfs and quantiles
# ---------------------------------------------------------------------------

def logpdf_gamma(x, p: GammaParams):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("gamma density needs x > 0")
    return (
        p.shape * np.log(p.rate)
        - special.gammaln(p.shape)
        + (p.shape - 1) * np.log(x)
        - p.rate * x
    )


def logpdf_inverse_gamma(x, p: InverseGammaParams):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("inverse gamma density needs x > 0")
    return (
        p.shape * np.log(p.scale)
        - special.gammaln(p.shape)
        - (p.shape + 1) * np.log(x)
        - p.scale / x
    )


def cdf_gamma(x, p: GammaParams):
    return special.gammainc(p.shape, p.rate * np.asarray(x, dtype=float))


def cdf_inverse_gamma(x, p: InverseGammaParams):
    # P(X <= x) = P(1/X >= 1/x) = Q(shape, scale/x)
    return special.gammaincc(p.shape, p.scale / np.asarray(x, dtype=float))


def quantile_gamma(p, g: GammaParams):
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or np.any(p >= 1):
        raise DomainError("quantile needs p in (0,1)")
    return special.gammaincinv(g.shape, p) / g.rate


def quantile_inverse_gamma(p, ig: InverseGammaParams):
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or np.any(p >= 1):
        raise DomainError("quantile needs p in (0,1)")
    return 1.0 / quantile_gamma(1.0 - p, GammaParams(ig.shape, ig.scale))


def sample(dist, rng: RngStream, size=None):
    """Seeded draw(s) from one of the supported parameter types."""
    if isinstance(dist, GammaParams):
        return rng.gamma(dist.shape, dist.rate, size=size)
    if isinstance(dist, InverseGammaParams):
        return rng.inverse_gamma(dist.shape, dist.scale, size=size)
    if isinstance(dist, NormalParams):
        return dist.mean + math.sqrt(dist.var) * rng.normal(size)
    if isinstance(dist, BetaParams):
        return rng.beta(dist.a, dist.b, size=size)
    raise DomainError(f"unsupported distribution {type(dist)!r}")


# ---------------------------------------------------------------------------
# exponential integral E1
# ---------------------------------------------------------------------------

_E1_SWITCH = 1.0  # series below, continued fraction above


def _e1_series(z: float) -> float:
    total = -EULER_GAMMA - math.log(z)
    term = 1.0
    for k in range(1, 200):
        term *= -z / k
        contrib = -term / k
        total += contrib
        if abs(contrib) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _e1_lentz(z: float) -> float:
    # modified Lentz evaluation of the continued fraction
    # E1(z) = e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 400):
        a = -i * i
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-z) * h


def exp_integral_E1(z):
    """E1(z) = int_z^inf t^{-1} e^{-t} dt for z > 0, relative error <= 1e-12."""
    scalar = np.isscalar(z)
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz <= 0):
        raise DomainError("E1 needs z > 0")
    out = np.empty_like(zz)
    for i, v in enumerate(zz):
        out[i] = _e1_series(v) if v <= _E1_SWITCH else _e1_lentz(v)
    return float(out[0]) if scalar else out
