"""Command line entry point: pcplots <figure> [options]."""
import argparse
import sys

from .artifacts import ArtifactError, read_band, read_rate_study, read_trace, read_truth
from .figures import band_overlay, rate_slope, save_deterministic, trace_panel


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="pcplots")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("band", help="band overlay from a band CSV")
    sp.add_argument("band_csv")
    sp.add_argument("--truth-path", default=None, help="path CSV with a truth column or sidecar")
    sp.add_argument("--title", default="credible band")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("trace", help="trace with running average from a trace CSV")
    sp.add_argument("trace_csv")
    sp.add_argument("--column", required=True)
    sp.add_argument("--burn-in", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("rate", help="log-log error decay from a rate-study JSON")
    sp.add_argument("rate_json")
    sp.add_argument("--title", default="error vs sample size")
    sp.add_argument("--out", required=True)

    args = p.parse_args(argv)
    try:
        if args.cmd == "band":
            truth = read_truth(args.truth_path) if args.truth_path else None
            fig = band_overlay(read_band(args.band_csv), truth=truth, title=args.title)
        elif args.cmd == "trace":
            fig = trace_panel(read_trace(args.trace_csv), args.column, burn_in=args.burn_in)
        else:
            fig = rate_slope(read_rate_study(args.rate_json), title=args.title)
        save_deterministic(fig, args.out)
    except (ArtifactError, OSError) as exc:
        print(f"pcplots: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
