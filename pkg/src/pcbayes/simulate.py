"""Synthetic data generators for every estimation experiment in the package.

All simulators are pure functions of (config, RngStream) and therefore
seed-deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import kernels
from .core import DomainError, RngStream

__all__ = [
    "TestFunction",
    "PathRecord",
    "HestonParams",
    "s1",
    "blocks",
    "sigma0",
    "intensity_osc",
    "make_s2",
    "from_table",
    "simulate_diffusion",
    "simulate_heston",
    "simulate_poisson",
    "simulate_gamma_sde",
    "simulate_subordinator",
]


@dataclass(frozen=True)
class TestFunction:
    """Named scalar test function on a fixed domain."""

    __test__ = False  # keep pytest from collecting this as a test class

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float] = (0.0, 1.0)
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def _s1(t):
    u = 4.0 * t - 2.0
    return 1.5 + np.sin(2.0 * u) + 2.0 * np.exp(-16.0 * u * u)


s1 = TestFunction("s1", _s1)

_BLOCKS_T = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76, 0.78, 0.81])
_BLOCKS_H = np.array([4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])


def _blocks(t):
    t = np.atleast_1d(t)
    steps = 0.5 * (1.0 + np.sign(t[:, None] - _BLOCKS_T[None, :]))
    out = 10.0 + 3.655606 * steps @ _BLOCKS_H
    return out if out.size > 1 else float(out[0])


blocks = TestFunction("blocks", _blocks)

sigma0 = TestFunction("sigma0", lambda x: 1.5 + np.sin(2.0 * np.pi * x))

intensity_osc = TestFunction(
    "intensity-osc",
    lambda x: 2.0 * np.exp(-x / 5.0) * (5.0 + 4.0 * np.cos(x)),
    domain=(0.0, 10.0),
)

zero_drift = TestFunction("zero", lambda x: np.zeros_like(np.asarray(x, dtype=float)))

# affine drift used in the diffusion benchmarks: a(x) = -10 x + 20
drift_a2 = TestFunction("a2", lambda x: -10.0 * x + 20.0)


def make_s2(seed: int, grid_points: int = 4097) -> TestFunction:
    """Volatility given by a frozen Brownian path, shifted to stay positive.

    The path is drawn once from the given seed and then used as a fixed,
    deterministic function of t via linear interpolation.
    """
    rng = RngStream(seed, stream_id=90210)
    grid = np.linspace(0.0, 1.0, grid_points)
    incr = rng.normal(grid_points - 1) * np.sqrt(np.diff(grid))
    path = np.concatenate([[0.0], np.cumsum(incr)]) + 1.0
    lo = path.min()
    if lo <= 0.1:
        path = path - lo + 0.1
    return TestFunction(
        "s2-brownian",
        lambda t: np.interp(t, grid, path),
        params={"seed": seed},
    )


def from_table(xs, ys, name: str = "custom-table") -> TestFunction:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return TestFunction(
        name,
        lambda t: np.interp(t, xs, ys),
        domain=(float(xs[0]), float(xs[-1])),
    )


@dataclass
class PathRecord:
    """A simulated (or ingested) discrete observation record."""

    times: np.ndarray
    values: np.ndarray
    truth_times: np.ndarray | None = None
    truth_values: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.size != self.values.size:
            raise DomainError("times/values length mismatch")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")


# ---------------------------------------------------------------------------
# Brownian-driven diffusion on [0,1]
# ---------------------------------------------------------------------------

def _step_variances(vol: TestFunction, n: int, refine: int = 10) -> np.ndarray:
    """Trapezoid rule for int s^2 over each step on a refine-x subgrid."""
    fine = np.linspace(0.0, 1.0, refine * n + 1)
    sv = vol(fine)
    if np.any(sv <= 0):
        raise DomainError("volatility must be positive on [0,1]")
    s2 = sv**2
    h = 1.0 / (refine * n)
    # trapezoid over each group of `refine` subintervals
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (s2[1:] + s2[:-1]))])
    return np.diff(cum[::refine])


def simulate_diffusion(
    vol: TestFunction,
    drift: TestFunction | None,
    n: int,
    rng: RngStream,
    x0: float = 0.0,
) -> PathRecord:
    """Observations of dX = a(X) dt + s(t) dW on the grid t_i = i/n.

    Gaussian increments use the exact conditional variance int s^2, computed
    by the trapezoid rule on a 10x refined subgrid, so the output is free of
    Euler discretisation bias in the volatility term.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    w = _step_variances(vol, n)
    z = rng.normal(n)
    noise = np.sqrt(w) * z
    times = np.arange(n + 1) / n
    if drift is None or drift.name == "zero":
        x = x0 + np.concatenate([[0.0], np.cumsum(noise)])
    else:
        x = np.empty(n + 1)
        x[0] = x0
        dfn = drift.fn
        for i in range(n):
            x[i + 1] = x[i] + dfn(x[i]) / n + noise[i]
    fine = np.linspace(0.0, 1.0, 10 * n + 1)
    return PathRecord(
        times,
        x,
        truth_times=fine,
        truth_values=vol(fine),
        meta={
            "generator": "diffusion",
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "n": n,
            "vol": vol.name,
            "drift": drift.name if drift is not None else "zero",
        },
    )


# ---------------------------------------------------------------------------
# Heston log-price with microstructure noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HestonParams:
    mu: float = 0.05
    kappa: float = 7.0
    theta: float = 0.04
    sigma: float = 0.6
    rho: float = -0.6


def simulate_heston(
    params: HestonParams,
    eta_v: float,
    n: int,
    rng: RngStream,
    z0: float | None = None,
    x0: float = 0.0,
    refine: int = 10,
) -> PathRecord:
    """Noisy log-price observations Y_i = X_{t_i} + N(0, eta_v), t_i = i/n.

    The CIR variance uses full-truncation Euler on a refine-x grid; the
    returned truth is sqrt(Z) on the observation grid.
    """
    if eta_v < 0:
        raise DomainError("noise variance must be nonnegative")
    p = params
    if z0 is None:
        z0 = p.theta  # stationary mean; paper leaves the start value open
    nf = refine * n
    h = 1.0 / nf
    zb = rng.normal(nf)  # drives the CIR factor
    zw = rng.normal(nf)  # independent component of the price driver
    z = np.empty(nf + 1)
    x = np.empty(nf + 1)
    z[0] = z0
    x[0] = x0
    sq_h = np.sqrt(h)
    rho_c = np.sqrt(1.0 - p.rho**2)
    for j in range(nf):
        zp = max(z[j], 0.0)
        sz = np.sqrt(zp)
        dw = (p.rho * zb[j] + rho_c * zw[j]) * sq_h
        x[j + 1] = x[j] + (p.mu - 0.5 * zp) * h + sz * dw
        z[j + 1] = z[j] + p.kappa * (p.theta - zp) * h + p.sigma * sz * sq_h * zb[j]
    times = np.arange(1, n + 1) / n
    xc = x[refine::refine]
    noise = np.sqrt(eta_v) * rng.normal(n)
    truth = np.sqrt(np.maximum(z[::refine], 0.0))
    return PathRecord(
        times,
        xc + noise,
        truth_times=np.arange(n + 1) / n,
        truth_values=truth,
        meta={
            "generator": "heston",
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "n": n,
            "eta_v": eta_v,
            "x0": x0,
            "z0": z0,
            "params": vars(p) if not isinstance(p, HestonParams) else {
                "mu": p.mu, "kappa": p.kappa, "theta": p.theta,
                "sigma": p.sigma, "rho": p.rho,
            },
        },
    )


# ---------------------------------------------------------------------------
# inhomogeneous Poisson replicates by thinning
# ---------------------------------------------------------------------------

def simulate_poisson(
    intensity: TestFunction,
    T: float,
    n_replicates: int,
    rng: RngStream,
    envelope: float | None = None,
) -> list[np.ndarray]:
    """n_replicates independent point sets on [0,T] with the given intensity."""
    if envelope is None:
        grid = np.linspace(0.0, T, 4001)
        envelope = 1.0000001 * float(np.max(intensity(grid)))
    out = []
    for _ in range(n_replicates):
        count = rng.generator.poisson(envelope * T)
        pts = np.sort(rng.uniform(count) * T)
        lam = intensity(pts)
        if np.any(lam > envelope):
            raise DomainError("intensity exceeds thinning envelope")
        keep = rng.uniform(count) < lam / envelope
        out.append(pts[keep])
    return out


# ---------------------------------------------------------------------------
# gamma-driven SDE dX = (sigma(X)/n) dL
# ---------------------------------------------------------------------------

def simulate_gamma_sde(
    sigma: TestFunction,
    n: int,
    alpha: float,
    beta: float,
    dt: float,
    rng: RngStream,
    boundaries: np.ndarray | None = None,
    x0: float = 0.0,
    max_steps: int = 200_000_000,
    record_stride: int | None = None,
    table_points: int = 20_001,
) -> PathRecord:
    """Path of X <- X + (sigma(X)/n) * G per mesh step, G ~ Gamma(alpha*dt, beta).

    Runs until X crosses the final boundary b_K; the exact mesh-resolution
    crossing times/values of every boundary land in meta["crossings"].
    sigma is evaluated by linear interpolation on a dense table, identically
    in the compiled and fallback kernels.
    """
    if dt <= 0:
        raise DomainError("mesh dt must be positive")
    if boundaries is None:
        boundaries = 0.1 * np.arange(1, 11)
    boundaries = np.asarray(boundaries, dtype=float)
    b_final = boundaries[-1]
    x_max = b_final * 1.5 + 1.0
    table_dx = x_max / (table_points - 1)
    tab = sigma(np.linspace(0.0, x_max, table_points))
    if np.any(tab <= 0):
        raise DomainError("sigma must be positive on the state range")
    if record_stride is None:
        record_stride = max(1, int(round(1e-2 / dt)))

    block = 1 << 16
    cross_t = np.zeros(boundaries.size)
    cross_x = np.zeros(boundaries.size)
    path_block = np.empty(block)
    rec_t: list[np.ndarray] = [np.array([0.0])]
    rec_x: list[np.ndarray] = [np.array([x0])]
    x, t, k = x0, 0.0, 0
    steps = 0
    scale = 1.0 / n
    while steps < max_steps:
        g = rng.gamma(alpha * dt, beta, size=block)
        used, x, t, k = kernels.gamma_sde_scan(
            g, x, t, dt, scale, tab, table_dx, boundaries, k,
            cross_t, cross_x, path_block,
        )
        base = steps
        steps += used
        first = (-base) % record_stride
        idx = np.arange(first, used, record_stride)
        if idx.size:
            rec_t.append((base + idx + 1) * dt)
            rec_x.append(path_block[idx].copy())
        if k == boundaries.size:
            break
    else:
        raise TimeoutError(
            f"gamma SDE failed to cross b_K={b_final} within {max_steps} steps"
        )
    times = np.concatenate(rec_t)
    values = np.concatenate(rec_x)
    # make sure the final crossing point is part of the recorded path
    if times[-1] < t:
        times = np.append(times, t)
        values = np.append(values, x)
    fine = np.linspace(0.0, b_final, 2001)
    return PathRecord(
        times,
        values,
        truth_times=fine,
        truth_values=sigma(fine),
        meta={
            "generator": "gamma-sde",
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "n": n,
            "alpha": alpha,
            "beta": beta,
            "dt": dt,
            "boundaries": boundaries.tolist(),
            "crossings": {
                "tau": cross_t.tolist(),
                "x": cross_x.tolist(),
            },
            "sigma": sigma.name,
        },
    )


# ---------------------------------------------------------------------------
# theta-subordinator increments
# ---------------------------------------------------------------------------

def simulate_subordinator(
    alpha: float,
    beta: float,
    theta,
    n_intervals: int,
    mesh: int,
    rng: RngStream,
) -> PathRecord:
    """Unit-time increments Z_i of a subordinator with Levy density
    (beta/x) exp(-alpha x - theta(x)).

    Small-jump approximation: each of the `mesh` cells per unit interval
    contributes one increment drawn exactly from the normalised density
    x^{beta/mesh - 1} exp(-alpha x - theta(x)), a mixture of truncated
    gammas over the segments of the piecewise-linear theta.
    `theta` is a PiecewiseLinearTheta (or None for a pure gamma process).
    """
    from .subord import PiecewiseLinearTheta

    if theta is None:
        theta = PiecewiseLinearTheta([], [], [])
    delta = 1.0 / mesh
    a = beta * delta
    n_cells = n_intervals * mesh

    # segment k has density factor exp(-rho_k) * exp(-(alpha+slope_k) x)
    edges = np.concatenate([[0.0], theta.breakpoints, [np.inf]])
    rhos = np.concatenate([[0.0], theta.intercepts])
    rates = alpha + np.concatenate([[0.0], theta.slopes])
    if np.any(rates <= 0):
        raise DomainError("alpha + slope must stay positive on every segment")

    lo_p = np.array([special.gammainc(a, r * e) if np.isfinite(e) else 1.0
                     for r, e in zip(rates, edges[:-1])])
    hi_p = np.array([special.gammainc(a, r * e) if np.isfinite(e) else 1.0
                     for r, e in zip(rates, edges[1:])])
    weights = np.exp(-rhos) * rates**-a * (hi_p - lo_p)
    weights = weights / weights.sum()

    seg = rng.generator.choice(weights.size, size=n_cells, p=weights)
    u = rng.uniform(n_cells)
    p = lo_p[seg] + u * (hi_p[seg] - lo_p[seg])
    cells = special.gammaincinv(a, p) / rates[seg]
    cells = np.clip(cells, 1e-300, None)  # tiny-shape quantile underflow guard
    cells = cells.reshape(n_intervals, mesh)
    z = cells.sum(axis=1)
    return PathRecord(
        np.arange(1, n_intervals + 1, dtype=float),
        np.cumsum(z),
        meta={
            "generator": "theta-subordinator",
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "alpha": alpha,
            "beta": beta,
            "mesh": mesh,
            "theta": theta.spec(),
            "increments": z.tolist(),
            "subincrements": cells,
        },
    )
