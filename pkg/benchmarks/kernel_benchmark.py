"""Timing comparison between the compiled kernels and the pure-Python fallback.

Run with:  python3 benchmarks/kernel_benchmark.py [--n 20000] [--repeats 5]

Both implementations are imported side by side (the package picks the
compiled one automatically when it is available; set PCBAYES_FORCE_FALLBACK=1
to check the dispatch itself), so the numbers come from one process and one
set of inputs.
"""
import argparse
import time

import numpy as np

from pcbayes.core import RngStream
from pcbayes.kernels import IMPLEMENTATION, ffbs_draw, gamma_sde_scan, kalman_filter
from pcbayes.kernels import _ref


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_kalman(n, repeats, rng):
    w = rng.generator.uniform(0.2, 1.5, size=n)
    y = np.cumsum(rng.normal(n))
    t_fast, out_fast = _time(lambda: kalman_filter(y, w, 0.3, 0.0, 1.0), repeats)
    t_ref, out_ref = _time(lambda: _ref.kalman_filter(y, w, 0.3, 0.0, 1.0), repeats)
    assert np.allclose(out_fast[2], out_ref[2])
    return "kalman_filter", t_fast, t_ref, (out_fast[0], out_fast[1], w)


def bench_ffbs(state, repeats, rng):
    m, C, w = state
    z = rng.normal(m.size)
    t_fast, x_fast = _time(lambda: ffbs_draw(m, C, w, z), repeats)
    t_ref, x_ref = _time(lambda: _ref.ffbs_draw(m, C, w, z), repeats)
    assert np.allclose(x_fast, x_ref)
    return "ffbs_draw", t_fast, t_ref, None


def bench_scan(n, repeats, rng):
    # small increments so the scan runs its full length without hitting
    # the last boundary early
    g = rng.gamma(np.full(n, 1.0), 1e6)
    table = 1.5 + np.sin(2.0 * np.pi * np.linspace(0.0, 3.0, 20001))
    boundaries = np.arange(1, 11) * 0.1

    def run(impl):
        cross_t = np.zeros(boundaries.size)
        cross_x = np.zeros(boundaries.size)
        path = np.zeros(n + 1)
        return impl(g, 0.0, 0.0, 1e-4, 1.0, table, 3.0 / 20000, boundaries,
                    0, cross_t, cross_x, path)

    t_fast, out_fast = _time(lambda: run(gamma_sde_scan), repeats)
    t_ref, out_ref = _time(lambda: run(_ref.gamma_sde_scan), repeats)
    assert out_fast[0] == out_ref[0] and np.isclose(out_fast[1], out_ref[1])
    return "gamma_sde_scan", t_fast, t_ref, None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = RngStream(0)
    print(f"active implementation: {IMPLEMENTATION}")
    print(f"n = {args.n}, best of {args.repeats} runs\n")
    print(f"{'kernel':<16} {'compiled':>12} {'fallback':>12} {'speedup':>9}")
    name, tf, tr, state = bench_kalman(args.n, args.repeats, rng)
    rows = [(name, tf, tr)]
    name, tf, tr, _ = bench_ffbs(state, args.repeats, rng)
    rows.append((name, tf, tr))
    name, tf, tr, _ = bench_scan(args.n, args.repeats, rng)
    rows.append((name, tf, tr))
    for name, tf, tr in rows:
        print(f"{name:<16} {tf * 1e3:>10.2f}ms {tr * 1e3:>10.2f}ms {tr / tf:>8.1f}x")


if __name__ == "__main__":
    main()
