"""Monte Carlo rate studies and named experiment presets.

A rate study simulates data at increasing sample sizes, fits the matching
estimator with bins scaling as n^{1/(2 lambda + 1)}, measures the error
against the truth and fits a log-log slope with a seed-level bootstrap
confidence interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BinLayout, DomainError, InverseGammaParams, GammaParams, RngStream
from . import gsde as gsde_mod
from . import poisson as poisson_mod
from . import vol as vol_mod
from .simulate import (
    TestFunction,
    blocks,
    intensity_osc,
    make_s2,
    s1,
    sigma0,
    simulate_diffusion,
    simulate_gamma_sde,
    simulate_poisson,
    zero_drift,
)

__all__ = [
    "RateStudyConfig",
    "RateStudyResult",
    "run_rate_study",
    "l2_error",
    "sup_error",
    "fit_loglog_slope",
    "PRESETS",
    "preset_study",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def l2_error(values, layout: BinLayout, truth) -> float:
    """L2 distance between a piecewise constant estimate and a function.

    Per-bin 16-node Gauss-Legendre quadrature of the squared difference.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (layout.n_bins,):
        raise DomainError("values/layout mismatch")
    f = truth.fn if isinstance(truth, TestFunction) else truth
    total = 0.0
    edges = layout.endpoints
    for k in range(layout.n_bins):
        a, b = edges[k], edges[k + 1]
        x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        d = values[k] - np.asarray(f(x), dtype=float)
        total += 0.5 * (b - a) * float(_GL_WEIGHTS @ (d * d))
    return math.sqrt(total)


def sup_error(values, layout: BinLayout, truth, grid_per_bin: int = 64) -> float:
    values = np.asarray(values, dtype=float)
    f = truth.fn if isinstance(truth, TestFunction) else truth
    worst = 0.0
    edges = layout.endpoints
    for k in range(layout.n_bins):
        x = np.linspace(edges[k], edges[k + 1], grid_per_bin)
        worst = max(worst, float(np.max(np.abs(values[k] - np.asarray(f(x), dtype=float)))))
    return worst


def fit_loglog_slope(ns, errors) -> float:
    lx = np.log(np.asarray(ns, dtype=float))
    ly = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass(frozen=True)
class RateStudyConfig:
    model: str  # "vol" | "poisson" | "gsde"
    truth: TestFunction
    holder: float
    ladder: tuple
    seeds: int
    metric: str  # "l2" | "l2sq" | "sup"
    bins_exponent: float | None = None
    bins_scale: float = 1.0
    base_seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def exponent(self) -> float:
        if self.bins_exponent is not None:
            return self.bins_exponent
        return 1.0 / (2.0 * self.holder + 1.0)


@dataclass
class RateStudyResult:
    ladder: tuple
    errors: dict  # n -> per-seed error array
    mean_error: np.ndarray
    se_mean: np.ndarray
    median_error: np.ndarray
    slope: float
    slope_ci: tuple

    def as_dict(self) -> dict:
        return {
            "ladder": list(self.ladder),
            "mean_error": self.mean_error.tolist(),
            "se_mean": self.se_mean.tolist(),
            "median_error": self.median_error.tolist(),
            "slope": self.slope,
            "slope_ci": list(self.slope_ci),
        }


def _vol_error(config: RateStudyConfig, n: int, rng: RngStream) -> float:
    rec = simulate_diffusion(config.truth, zero_drift, n, rng)
    obs = vol_mod.VolObservations.from_path(rec)
    N = max(2, int(round(config.bins_scale * n**config.exponent)))
    m = max(1, n // N)
    Z = vol_mod.bin_statistics(obs, m)
    prior = config.extra.get("prior", InverseGammaParams(0.1, 0.1))
    post = vol_mod.posterior_iig(Z, prior, n, m)
    est = vol_mod.posterior_mean_s2(post)
    truth_sq = TestFunction(
        config.truth.name + "^2", lambda x: np.asarray(config.truth.fn(x)) ** 2, config.truth.domain
    )
    return l2_error(est, post.layout, truth_sq)


def _poisson_error(config: RateStudyConfig, n: int, rng: RngStream) -> float:
    T = config.truth.domain[1]
    points = simulate_poisson(config.truth, T, n, rng)
    N = max(1, int(round(config.bins_scale * n**config.exponent)))
    data = poisson_mod.PoissonData.from_points(points, T, N)
    prior = config.extra.get("prior", GammaParams(0.1, 0.1))
    post = poisson_mod.posterior_gamma(data, prior)
    est = poisson_mod.posterior_mean_intensity(post)
    err = l2_error(est, data.layout, config.truth)
    return err * err if config.metric == "l2sq" else err


def _gsde_error(config: RateStudyConfig, n: int, rng: RngStream) -> float:
    alpha = config.extra.get("alpha", 1.0)
    beta = config.extra.get("beta", 1.0)
    K = max(2, int(round(config.bins_scale * n**config.exponent)))
    boundaries = np.linspace(1.0 / K, 1.0, K)
    dt = config.extra.get("dt", 1e-3)
    rec = simulate_gamma_sde(
        config.truth, n, alpha, beta, dt, rng, boundaries=boundaries
    )
    obs = gsde_mod.GsdeObservation.from_path(rec, n, alpha, beta, boundaries)
    stats = gsde_mod.hitting_stats(obs)
    prior = config.extra.get("prior", InverseGammaParams(0.1, 0.1))
    post = gsde_mod.posterior_gsde(stats, n, alpha, beta, prior)
    est = gsde_mod.posterior_median_scale(post)
    layout = BinLayout(np.concatenate(([0.0], boundaries)))
    return sup_error(est, layout, config.truth)


_RUNGS = {"vol": _vol_error, "poisson": _poisson_error, "gsde": _gsde_error}


def run_rate_study(config: RateStudyConfig, n_boot: int = 200, jobs: int = 1) -> RateStudyResult:
    if config.model not in _RUNGS:
        raise DomainError(f"unknown model {config.model!r}")
    if tuple(sorted(config.ladder)) != tuple(config.ladder):
        raise DomainError("ladder must be increasing")
    rung = _RUNGS[config.model]
    errors = {}
    for j, n in enumerate(config.ladder):
        errs = np.empty(config.seeds)
        if jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            def one(s):
                return rung(config, n, RngStream(config.base_seed + s, stream_id=j + 1))

            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for s, e in enumerate(pool.map(one, range(config.seeds))):
                    errs[s] = e
        else:
            for s in range(config.seeds):
                rng = RngStream(config.base_seed + s, stream_id=j + 1)
                errs[s] = rung(config, n, rng)
        errors[n] = errs
    mean = np.array([errors[n].mean() for n in config.ladder])
    se = np.array([errors[n].std(ddof=1) / math.sqrt(config.seeds) for n in config.ladder])
    med = np.array([np.median(errors[n]) for n in config.ladder])
    slope = fit_loglog_slope(config.ladder, mean)

    boot_rng = np.random.default_rng(config.base_seed)
    boots = np.empty(n_boot)
    for b in range(n_boot):
        bm = [
            errors[n][boot_rng.integers(config.seeds, size=config.seeds)].mean()
            for n in config.ladder
        ]
        boots[b] = fit_loglog_slope(config.ladder, bm)
    ci = (float(np.quantile(boots, 0.025)), float(np.quantile(boots, 0.975)))
    return RateStudyResult(tuple(config.ladder), errors, mean, se, med, slope, ci)


# ---------------------------------------------------------------------------
# preset registry
# ---------------------------------------------------------------------------

def _study_vol_s1(seeds=20, base_seed=0):
    return RateStudyConfig(
        "vol", s1, 1.0, (1024, 2048, 4096, 8192, 16384, 32768), seeds, "l2",
        base_seed=base_seed,
    )


def _study_vol_s2(seeds=20, base_seed=0):
    return RateStudyConfig(
        "vol", make_s2(seed=1), 0.5, (1024, 4096, 16384), seeds, "l2",
        base_seed=base_seed,
    )


def _study_poisson(seeds=30, base_seed=0):
    return RateStudyConfig(
        "poisson", intensity_osc, 1.0, (5, 20, 80, 320, 1280), seeds, "l2sq",
        bins_exponent=1.0 / 3.0, bins_scale=2.0, base_seed=base_seed,
    )


def _study_gsde(seeds=20, base_seed=0):
    return RateStudyConfig(
        "gsde", sigma0, 1.0, (100, 500, 2500), seeds, "sup",
        bins_exponent=1.0 / 3.0, bins_scale=1.26, base_seed=base_seed,
    )


PRESETS = {
    "vol-s1": {
        "kind": "vol",
        "truth": s1,
        "drift": "zero",
        "n": 32001,
        "prior": (0.1, 0.1),
        "study": _study_vol_s1,
    },
    "vol-s2": {
        "kind": "vol",
        "truth": "s2",
        "drift": "zero",
        "n": 32001,
        "prior": (0.1, 0.1),
        "study": _study_vol_s2,
        "gating": False,
    },
    "vol-blocks-igmc": {
        "kind": "vol-igmc",
        "truth": blocks,
        "n": 16000,
        "bins": 160,
        "alpha1": 0.1,
        "hyperprior": ("ig", 0.3, 0.3),
    },
    "micro-heston": {
        "kind": "micro",
        "n": 4000,
        "bins": 80,
        "eta_v": 1e-6,
    },
    "poisson-osc": {
        "kind": "poisson",
        "truth": intensity_osc,
        "T": 10.0,
        "replicates": 5,
        "prior": (0.1, 0.1),
        "study": _study_poisson,
    },
    "gsde-sigma0": {
        "kind": "gsde",
        "truth": sigma0,
        "n": 500,
        "alpha": 1.0,
        "beta": 1.0,
        "boundaries": tuple(np.round(np.arange(1, 11) * 0.1, 10)),
        "prior": (0.1, 0.1),
        "level": 0.90,
        "study": _study_gsde,
    },
    "subord-twoseg": {
        "kind": "subord",
        "alpha": 1.0,
        "beta": 80.0,
        "alpha1": 1.4,
        "beta1": 60.0,
        "b1": 2.0,
        "n": 300,
        "m": 50,
    },
}


def preset_study(name: str, seeds: int | None = None, base_seed: int = 0) -> RateStudyConfig:
    if name not in PRESETS or "study" not in PRESETS[name]:
        raise DomainError(f"no rate study for preset {name!r}")
    factory = PRESETS[name]["study"]
    if seeds is None:
        return factory(base_seed=base_seed)
    return factory(seeds=seeds, base_seed=base_seed)
