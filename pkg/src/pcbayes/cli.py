"""Command line entry point: simulate | fit | band | rate-study.

Options may come from a flat key-value config file (--config); explicit
flags override file values. Exit codes: 0 success, 2 configuration error,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as pio
from .core import (
    BinLayout,
    CredibleBand,
    DomainError,
    GammaParams,
    InverseGammaParams,
    RngStream,
)
from . import gsde as gsde_mod
from . import micro as micro_mod
from . import poisson as poisson_mod
from . import subord as subord_mod
from . import vol as vol_mod
from .igmc import BinLikelihood, IgmcHyper, run_igmc, band_from_trace
from .ratelab import PRESETS, preset_study, run_rate_study
from .simulate import (
    HestonParams,
    drift_a2,
    simulate_diffusion,
    simulate_gamma_sde,
    simulate_heston,
    simulate_poisson,
    simulate_subordinator,
    zero_drift,
)

__all__ = ["main"]


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("pcbayes")
    except Exception:
        return "unknown"


class ConfigError(Exception):
    pass


def _parse_pair(text: str, key: str) -> tuple:
    body = text.split(":", 1)[-1]
    parts = body.split(",")
    if len(parts) != 2:
        raise ConfigError(f"bad value for {key}: {text!r} (expected a,b)")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}")


def _need_seed(opts) -> int:
    if opts.get("seed") is not None:
        return int(opts["seed"])
    env = os.environ.get("PCBAYES_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("seed: PCBAYES_SEED is not an integer")
    raise ConfigError("seed: required (flag --seed or PCBAYES_SEED)")


def _merge(args: argparse.Namespace) -> dict:
    opts = {}
    if getattr(args, "config", None):
        opts.update(pio.read_config(args.config))
    for key, val in vars(args).items():
        if key in ("config", "func") or val is None:
            continue
        opts[key] = val
    return opts


def _write_increments(Z, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        for z in Z:
            fh.write(repr(float(z)) + "\n")


def _read_increments(path: str) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line.split(",")[-1]))
            except ValueError:
                continue  # header line
    if not vals:
        raise DomainError(f"no increments found in {path}")
    return np.array(vals)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    opts = _merge(args)
    name = opts.get("preset")
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}")
    preset = PRESETS[name]
    seed = _need_seed(opts)
    rng = RngStream(seed)
    out = opts.get("out") or f"{name}.csv"
    kind = preset["kind"]

    if kind == "vol" or kind == "vol-igmc":
        truth = preset["truth"]
        if truth == "s2":
            from .simulate import make_s2

            truth = make_s2(seed=seed)
        n = int(opts.get("n", preset["n"]))
        drift = drift_a2 if opts.get("drift") == "a2" else zero_drift
        rec = simulate_diffusion(truth, drift, n, rng)
        rec.meta.update({"preset": name, "seed": seed})
        pio.write_path_csv(rec, out)
    elif kind == "micro":
        n = int(opts.get("n", preset["n"]))
        eta_v = float(opts.get("eta_v", preset["eta_v"]))
        rec = simulate_heston(HestonParams(), eta_v, n, rng)
        rec.meta.update({"preset": name, "seed": seed})
        pio.write_path_csv(rec, out)
    elif kind == "poisson":
        reps = int(opts.get("replicates", preset["replicates"]))
        points = simulate_poisson(preset["truth"], preset["T"], reps, rng)
        pio.write_points_csv(points, out)
    elif kind == "gsde":
        n = int(opts.get("n", preset["n"]))
        rec = simulate_gamma_sde(
            preset["truth"],
            n,
            preset["alpha"],
            preset["beta"],
            float(opts.get("dt", 1e-3)),
            rng,
            boundaries=np.array(preset["boundaries"]),
        )
        rec.meta.update({"preset": name, "seed": seed})
        pio.write_path_csv(rec, out)
    elif kind == "subord":
        n = int(opts.get("n", preset["n"]))
        m = int(opts.get("m", preset["m"]))
        rho1 = float(np.log(preset["beta"] / preset["beta1"]))
        slope1 = preset["alpha1"] - preset["alpha"]
        theta = subord_mod.PiecewiseLinearTheta([preset["b1"]], [rho1], [slope1])
        rec = simulate_subordinator(preset["alpha"], preset["beta"], theta, n, m, rng)
        _write_increments(rec.meta["increments"], out)
        pio.write_json(
            {"meta": {"preset": name, "seed": seed, "n": n, "m": m}}, out + ".json"
        )
    else:  # pragma: no cover - registry is closed
        raise ConfigError(f"preset: cannot simulate kind {kind!r}")
    print(out)
    return 0


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _band_outputs(opts, layout, band, level, params=None, extra=None):
    out = opts.get("out") or "band.json"
    base = out[:-5] if out.endswith(".json") else out
    pio.write_summary_json(
        base + ".json" if not out.endswith(".json") else out,
        layout,
        band,
        level,
        params=params,
        extra=extra,
    )
    pio.write_band_csv(band, layout, base + ".csv")


def _fit_vol(opts, rng) -> int:
    rec = pio.read_path_csv(opts["in"])
    obs = vol_mod.VolObservations.from_path(rec)
    a, b = _parse_pair(str(opts.get("prior", "iig:0.1,0.1")), "prior")
    prior = InverseGammaParams(a, b)
    n = obs.n
    if opts.get("bins"):
        m = max(1, n // int(opts["bins"]))
    else:
        m = vol_mod.select_m_marginal(obs, prior)
    Z = vol_mod.bin_statistics(obs, m)
    post = vol_mod.posterior_iig(Z, prior, n, m)
    level = float(opts.get("level", 0.95))
    band = vol_mod.credible_band_vol(post, level)
    _band_outputs(
        opts,
        post.layout,
        band,
        level,
        params=[(p.shape, p.scale) for p in post.params],
        extra={"model": "vol", "m": m},
    )
    return 0


def _fit_vol_igmc(opts, rng) -> int:
    rec = pio.read_path_csv(opts["in"])
    obs = vol_mod.VolObservations.from_path(rec)
    n = obs.n
    N = int(opts.get("bins", 160))
    m = max(1, n // N)
    Z = vol_mod.bin_statistics(obs, m)
    counts = vol_mod._bin_counts(n, m).astype(float)
    data = BinLikelihood.from_vol(counts, Z, n)
    hp = opts.get("hyperprior", "ig:0.3,0.3")
    hyper = IgmcHyper(
        alpha1=float(opts.get("alpha1", 0.1)),
        hyperprior=None if hp in ("none", "fixed") else ("ig",) + _parse_pair(str(hp), "hyperprior"),
    )
    iters = int(opts.get("iterations", 5000))
    trace = run_igmc(data, hyper, iters, rng)
    level = float(opts.get("level", 0.95))
    band = band_from_trace(trace, level, n_bins=len(Z))
    layout = vol_mod.bin_layout_for(n, m)
    out = opts.get("out") or "band.json"
    pio.write_trace_csv(trace, (out[:-5] if out.endswith(".json") else out) + ".trace.csv")
    _band_outputs(opts, layout, band, level, extra={"model": "vol-igmc", "bins": len(Z)})
    return 0


def _fit_micro(opts, rng) -> int:
    rec = pio.read_path_csv(opts["in"])
    keep = int(opts.get("keep_every", 1))
    times = rec.times[::keep]
    values = rec.values[::keep]
    n = times.size - 1
    N = int(opts.get("bins", 80))
    ep = _parse_pair(str(opts.get("eta_prior", "ig:0.1,1e-12")), "eta_prior")
    bin_map = micro_mod.bin_map_uniform(n, N)
    model = micro_mod.StateSpaceModel(
        values[1:],
        np.diff(times),
        float(opts.get("eta_v", 1e-6)),
        float(values[0]),
        float(opts.get("c0", 1.0)),
        bin_map,
    )
    hyper = IgmcHyper(alpha1=0.1, hyperprior=("lognormal", 0.0, 1.0))
    iters = int(opts.get("iterations", 3000))
    trace = micro_mod.run_micro_gibbs(
        model, hyper, InverseGammaParams(*ep), iters, rng
    )
    level = float(opts.get("level", 0.95))
    band = micro_mod.band_sqrt_theta(trace, level, N)
    edges = np.empty(N + 1)
    starts = np.searchsorted(bin_map, np.arange(N))
    edges[:N] = times[starts]
    edges[N] = times[-1]
    layout = BinLayout(edges)
    out = opts.get("out") or "band.json"
    pio.write_trace_csv(trace, (out[:-5] if out.endswith(".json") else out) + ".trace.csv")
    _band_outputs(opts, layout, band, level, extra={"model": "micro", "bins": N})
    return 0


def _fit_poisson(opts, rng) -> int:
    points = pio.read_points_csv(opts["in"])
    T = float(opts.get("T", max(float(np.max(p)) for p in points if len(p))))
    a, b = _parse_pair(str(opts.get("gamma", "g:0.1,0.1")), "gamma")
    prior = GammaParams(a, b)
    level = float(opts.get("level", 0.95))
    if opts.get("bins"):
        N = int(opts["bins"])
    else:
        cands = range(1, int(opts.get("max_bins", 25)) + 1)
        N = poisson_mod.empirical_bayes_select_N(points, T, prior, cands)
    data = poisson_mod.PoissonData.from_points(points, T, N)
    which = str(opts.get("prior", "indep-gamma"))
    if which == "indep-gamma":
        post = poisson_mod.posterior_gamma(data, prior)
        band = poisson_mod.credible_band_poisson(post, level)
        _band_outputs(
            opts,
            data.layout,
            band,
            level,
            params=[(p.shape, p.rate) for p in post],
            extra={"model": "poisson", "bins": N},
        )
    elif which == "gmc":
        hyper = poisson_mod.GmcHyper()
        iters = int(opts.get("iterations", 5000))
        trace = poisson_mod.run_gmc(data, hyper, iters, rng)
        band = poisson_mod.credible_band_poisson(trace, level)
        out = opts.get("out") or "band.json"
        pio.write_trace_csv(trace, (out[:-5] if out.endswith(".json") else out) + ".trace.csv")
        _band_outputs(opts, data.layout, band, level, extra={"model": "poisson-gmc", "bins": N})
    else:
        raise ConfigError(f"prior: unknown poisson prior {which!r}")
    return 0


def _fit_gsde(opts, rng) -> int:
    rec = pio.read_path_csv(opts["in"])
    meta = rec.meta or {}
    n = float(opts.get("n", meta.get("n", 500)))
    alpha = float(opts.get("alpha", meta.get("alpha", 1.0)))
    beta = float(opts.get("beta", meta.get("beta", 1.0)))
    if opts.get("boundaries"):
        bounds = np.array([float(x) for x in str(opts["boundaries"]).split(",")])
    else:
        bounds = np.array(meta.get("boundaries", np.round(np.arange(1, 11) * 0.1, 10)))
    a, b = _parse_pair(str(opts.get("prior", "ig:0.1,0.1")), "prior")
    obs = gsde_mod.GsdeObservation.from_path(rec, n, alpha, beta, bounds)
    stats = gsde_mod.hitting_stats(obs)
    post = gsde_mod.posterior_gsde(stats, n, alpha, beta, InverseGammaParams(a, b))
    level = float(opts.get("level", 0.90))
    band = gsde_mod.band_gsde(post, level)
    layout = BinLayout(np.concatenate(([0.0], bounds)))
    _band_outputs(
        opts,
        layout,
        band,
        level,
        params=[(p.shape, p.scale) for p in post],
        extra={"model": "gsde"},
    )
    return 0


def _fit_subord(opts, rng) -> int:
    Z = _read_increments(opts["in"])
    config = subord_mod.SubordConfig(
        b1=float(opts.get("b1", 2.0)),
        m=int(opts.get("m", 100)),
        iterations=int(opts.get("iterations", 200_000)),
        fix_beta=bool(opts.get("fix_beta", False)),
    )
    trace = subord_mod.subord_mcmc(Z, config, rng)
    out = opts.get("out") or "subord.json"
    base = out[:-5] if out.endswith(".json") else out
    pio.write_trace_csv(trace, base + ".trace.csv")

    draws = trace.post_burn()
    q = {
        name: [float(np.quantile(draws[:, j], p)) for p in (0.025, 0.5, 0.975)]
        for j, name in enumerate(trace.names)
    }
    # posterior quantiles of x -> -log(x v(x)) = -log beta + alpha x + theta(x)
    xs = np.linspace(config.b1 / 20.0, 3.0 * config.b1, 60)
    thin = max(1, draws.shape[0] // 500)
    sub = draws[::thin]
    vals = np.empty((sub.shape[0], xs.size))
    for i, (al, be, al1, be1) in enumerate(sub):
        low = xs < config.b1
        vals[i] = np.where(
            low, -np.log(be) + al * xs, -np.log(be1) + al1 * xs
        )
    curve = {
        "x": xs.tolist(),
        "q025": np.quantile(vals, 0.025, axis=0).tolist(),
        "q50": np.quantile(vals, 0.5, axis=0).tolist(),
        "q975": np.quantile(vals, 0.975, axis=0).tolist(),
    }
    pio.write_json(
        {"model": "subord", "quantiles": q, "neg_log_density": curve},
        base + ".json",
    )
    return 0


_FITTERS = {
    "vol": _fit_vol,
    "vol-igmc": _fit_vol_igmc,
    "micro": _fit_micro,
    "poisson": _fit_poisson,
    "gsde": _fit_gsde,
    "subord": _fit_subord,
}


def _cmd_fit(args) -> int:
    opts = _merge(args)
    model = opts.get("model")
    if model not in _FITTERS:
        raise ConfigError(f"model: unknown model {model!r}")
    if not opts.get("in"):
        raise ConfigError("in: input path required")
    if not os.path.exists(opts["in"]):
        raise ConfigError(f"in: no such file {opts['in']!r}")
    rng = RngStream(_need_seed(opts))
    return _FITTERS[model](opts, rng)


# ---------------------------------------------------------------------------
# band and rate-study
# ---------------------------------------------------------------------------

_NON_BIN = {"alpha", "eta_v", "beta", "alpha1", "beta1"}


def _cmd_band(args) -> int:
    opts = _merge(args)
    if not opts.get("trace"):
        raise ConfigError("trace: trace CSV required")
    if not os.path.exists(opts["trace"]):
        raise ConfigError(f"trace: no such file {opts['trace']!r}")
    trace = pio.read_trace_csv(opts["trace"], burn_in=int(opts.get("burn_in", 0)))
    cols = [j for j, nm in enumerate(trace.names) if nm not in _NON_BIN]
    draws = trace.post_burn()[:, cols]
    if str(opts.get("transform", "none")) == "sqrt":
        draws = np.sqrt(draws)
    level = float(opts.get("level", 0.95))
    half = (1.0 - level) / 2.0
    band = CredibleBand(
        level,
        np.quantile(draws, half, axis=0),
        np.quantile(draws, 0.5, axis=0),
        np.quantile(draws, 1.0 - half, axis=0),
    )
    if opts.get("edges"):
        edges = np.array([float(x) for x in str(opts["edges"]).split(",")])
    else:
        edges = np.linspace(0.0, 1.0, len(cols) + 1)
    pio.write_band_csv(band, BinLayout(edges), opts.get("out") or "band.csv")
    return 0


def _cmd_rate_study(args) -> int:
    opts = _merge(args)
    name = opts.get("preset")
    try:
        config = preset_study(
            name,
            seeds=int(opts["seeds"]) if opts.get("seeds") else None,
            base_seed=int(opts.get("seed", 0) or 0),
        )
    except DomainError as exc:
        raise ConfigError(f"preset: {exc}")
    result = run_rate_study(config, jobs=int(opts.get("jobs", 1)))
    out = opts.get("out") or f"{name}-rate.json"
    pio.write_json({"preset": name, **result.as_dict()}, out)
    print(out)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcbayes")
    p.add_argument("--version", action="version", version=f"pcbayes {_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--jobs", type=int, default=None)

    sp = sub.add_parser("simulate")
    common(sp)
    sp.add_argument("--preset", default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--drift", default=None)
    sp.add_argument("--eta-v", dest="eta_v", type=float, default=None)
    sp.add_argument("--replicates", type=int, default=None)
    sp.add_argument("--dt", type=float, default=None)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("fit")
    common(sp)
    sp.add_argument("--model", default=None)
    sp.add_argument("--in", dest="in", default=None)
    sp.add_argument("--prior", default=None)
    sp.add_argument("--bins", type=int, default=None)
    sp.add_argument("--level", type=float, default=None)
    sp.add_argument("--iterations", type=int, default=None)
    sp.add_argument("--keep-every", dest="keep_every", type=int, default=None)
    sp.add_argument("--gamma", default=None)
    sp.add_argument("--T", type=float, default=None)
    sp.add_argument("--n", type=float, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--boundaries", default=None)
    sp.add_argument("--b1", type=float, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--fix-beta", dest="fix_beta", action="store_const", const=True, default=None)
    sp.add_argument("--hyperprior", default=None)
    sp.add_argument("--alpha1", type=float, default=None)
    sp.add_argument("--eta-v", dest="eta_v", type=float, default=None)
    sp.add_argument("--eta-prior", dest="eta_prior", default=None)
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("band")
    common(sp)
    sp.add_argument("--trace", default=None)
    sp.add_argument("--level", type=float, default=None)
    sp.add_argument("--transform", default=None)
    sp.add_argument("--edges", default=None)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=None)
    sp.set_defaults(func=_cmd_band)

    sp = sub.add_parser("rate-study")
    common(sp)
    sp.add_argument("--preset", default=None)
    sp.add_argument("--seeds", type=int, default=None)
    sp.set_defaults(func=_cmd_rate_study)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
