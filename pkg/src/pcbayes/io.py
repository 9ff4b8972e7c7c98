"""Artifact I/O: path/points/band/trace CSV files, JSON summaries and the
flat key-value config format used by the command line.

All numbers are written with repr-level precision and no locale
dependence, so identical inputs produce byte-identical artifacts.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np

from .core import BinLayout, CredibleBand, DomainError, McmcTrace
from .simulate import PathRecord

__all__ = [
    "write_path_csv",
    "read_path_csv",
    "write_points_csv",
    "read_points_csv",
    "write_band_csv",
    "read_band_csv",
    "write_summary_json",
    "write_trace_csv",
    "read_trace_csv",
    "write_json",
    "read_config",
    "parse_scalar",
]


def _fmt(x) -> str:
    return repr(float(x))


def write_json(obj, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_path_csv(record: PathRecord, path: str) -> None:
    """Columns time,value and, when the truth shares the grid, truth.

    A JSON sidecar <path>.json carries the generator metadata and any
    off-grid truth samples.
    """
    with_truth = (
        record.truth_times is not None
        and record.truth_values is not None
        and np.array_equal(record.truth_times, record.times)
    )
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if with_truth:
            w.writerow(["time", "value", "truth"])
            for t, v, s in zip(record.times, record.values, record.truth_values):
                w.writerow([_fmt(t), _fmt(v), _fmt(s)])
        else:
            w.writerow(["time", "value"])
            for t, v in zip(record.times, record.values):
                w.writerow([_fmt(t), _fmt(v)])
    side = {"meta": _jsonable(record.meta)}
    if record.truth_times is not None and not with_truth:
        side["truth_times"] = _jsonable(record.truth_times)
        side["truth_values"] = _jsonable(record.truth_values)
    write_json(side, path + ".json")


def read_path_csv(path: str) -> PathRecord:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "time":
        raise DomainError(f"not a path CSV (expected 'time' header): {path}")
    header = rows[0]
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    truth = data[:, 2] if "truth" in header else None
    meta = {}
    sidecar = path + ".json"
    if os.path.exists(sidecar):
        with open(sidecar) as fh:
            meta = json.load(fh).get("meta", {})
    return PathRecord(
        data[:, 0],
        data[:, 1],
        truth_times=data[:, 0] if truth is not None else None,
        truth_values=truth,
        meta=meta,
    )


def write_points_csv(point_sets, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "location"])
        for j, pts in enumerate(point_sets):
            for x in np.sort(np.asarray(pts, dtype=float)):
                w.writerow([j, _fmt(x)])


def read_points_csv(path: str) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["replicate", "location"]:
        raise DomainError(f"not a points CSV (expected replicate,location): {path}")
    sets: dict[int, list] = {}
    for r in rows[1:]:
        sets.setdefault(int(r[0]), []).append(float(r[1]))
    if not sets:
        return []
    n = max(sets) + 1
    return [np.array(sets.get(j, []), dtype=float) for j in range(n)]


def write_band_csv(band: CredibleBand, layout: BinLayout, path: str) -> None:
    if band.lower.size != layout.n_bins:
        raise DomainError("band/layout mismatch")
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "lower", "center", "upper"])
        for k in range(layout.n_bins):
            w.writerow(
                [
                    _fmt(layout.endpoints[k]),
                    _fmt(layout.endpoints[k + 1]),
                    _fmt(band.lower[k]),
                    _fmt(band.center[k]),
                    _fmt(band.upper[k]),
                ]
            )


def read_band_csv(path: str):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    expect = ["bin_left", "bin_right", "lower", "center", "upper"]
    if not rows or rows[0] != expect:
        raise DomainError(f"not a band CSV (expected {','.join(expect)}): {path}")
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    layout = BinLayout(np.concatenate([data[:, 0], data[-1:, 1]]))
    return CredibleBand(0.5, data[:, 2], data[:, 3], data[:, 4]), layout, data


def write_summary_json(
    path: str,
    layout: BinLayout,
    band: CredibleBand,
    level: float,
    params=None,
    extra=None,
) -> None:
    """PosteriorSummary JSON: bins, per-bin posterior params, band."""
    obj = {
        "bins": _jsonable(layout.endpoints),
        "level": level,
        "band": {
            "lower": _jsonable(band.lower),
            "center": _jsonable(band.center),
            "upper": _jsonable(band.upper),
        },
    }
    if params is not None:
        obj["ig_params"] = _jsonable(params)
    if extra:
        obj.update(_jsonable(extra))
    write_json(obj, path)


def write_trace_csv(trace: McmcTrace, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration"] + list(trace.names))
        for i, row in enumerate(trace.samples):
            w.writerow([i] + [_fmt(v) for v in row])


def read_trace_csv(path: str, burn_in: int = 0) -> McmcTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "iteration":
        raise DomainError(f"not a trace CSV (expected 'iteration' header): {path}")
    names = rows[0][1:]
    data = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    return McmcTrace(names, data, seed=0, burn_in=burn_in)


def parse_scalar(text: str):
    t = text.strip()
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    return t


def read_config(path: str) -> dict:
    """Flat key-value text: one `key = value` (or `key value`) per line,
    # comments allowed."""
    out = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise DomainError(f"bad config line {ln}: {raw.rstrip()}")
                key, val = parts
            out[key.strip()] = parse_scalar(val)
    return out
