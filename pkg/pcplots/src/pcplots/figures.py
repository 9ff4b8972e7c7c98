"""The three standard figures, each returning a matplotlib Figure."""
import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .artifacts import ArtifactError, BandTable, RateTable, TraceTable


def _step_xy(edges, values):
    # duplicate interior edges so the band is drawn as a true step function
    x = np.repeat(edges, 2)[1:-1]
    y = np.repeat(values, 2)
    return x, y


def band_overlay(band: BandTable, truth=None, title="credible band"):
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    x, lo = _step_xy(band.edges, band.lower)
    _, hi = _step_xy(band.edges, band.upper)
    _, mid = _step_xy(band.edges, band.center)
    ax.fill_between(x, lo, hi, color="#9ecae1", alpha=0.7, label="band")
    ax.plot(x, mid, color="#08519c", lw=1.2, label="center")
    if truth is not None:
        tt, tv = truth
        ax.plot(tt, tv, color="#d62728", lw=1.0, label="truth")
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    return fig


def trace_panel(trace: TraceTable, name, burn_in=0, title=None):
    y = trace.column(name)
    fig, ax = plt.subplots(figsize=(7.0, 3.0))
    ax.plot(y, color="#7f7f7f", lw=0.6, label=name)
    run = np.cumsum(y) / np.arange(1, y.size + 1)
    ax.plot(run, color="#08519c", lw=1.4, label="running mean")
    if burn_in:
        ax.axvline(burn_in, color="#d62728", lw=0.8, ls="--", label="burn-in")
    ax.set_xlabel("iteration")
    ax.set_title(title or f"trace of {name}")
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    return fig


def rate_slope(rate: RateTable, title="error vs sample size"):
    if np.any(rate.mean_error <= 0) or np.any(rate.ladder <= 0):
        raise ArtifactError("rate study needs positive ladder and errors")
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.errorbar(
        rate.ladder, rate.mean_error, yerr=rate.se_mean, fmt="o", ms=4,
        color="#08519c", capsize=2, label="mean error",
    )
    lx = np.log(rate.ladder)
    anchor = np.log(rate.mean_error[0]) - rate.slope * lx[0]
    ax.plot(rate.ladder, np.exp(anchor + rate.slope * lx), color="#d62728",
            lw=1.0, label=f"slope {rate.slope:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def save_deterministic(fig, path):
    """Write an SVG whose bytes depend only on the figure contents."""
    path = str(path)
    if not path.endswith(".svg"):
        raise ArtifactError("deterministic output is SVG only")
    with matplotlib.rc_context({"svg.hashsalt": "pcplots"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
