"""Readers for the artifact files (plain csv/json, no estimation imports)."""
import csv
import json
from dataclasses import dataclass

import numpy as np


class ArtifactError(ValueError):
    pass


@dataclass
class BandTable:
    edges: np.ndarray  # n_bins + 1 endpoints
    lower: np.ndarray
    center: np.ndarray
    upper: np.ndarray

    @property
    def n_bins(self):
        return self.lower.size


def read_band(path) -> BandTable:
    """Band CSV: bin_left,bin_right,lower,center,upper."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["bin_left", "bin_right", "lower", "center", "upper"]:
        raise ArtifactError(f"not a band CSV: {path}")
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    if data.size == 0:
        raise ArtifactError(f"empty band CSV: {path}")
    edges = np.concatenate([data[:, 0], data[-1:, 1]])
    return BandTable(edges, data[:, 2], data[:, 3], data[:, 4])


@dataclass
class TraceTable:
    names: list
    samples: np.ndarray  # (iterations, columns)

    def column(self, name) -> np.ndarray:
        if name not in self.names:
            raise ArtifactError(f"no trace column {name!r}")
        return self.samples[:, self.names.index(name)]


def read_trace(path) -> TraceTable:
    """Trace CSV: iteration,<name>,<name>,..."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["iteration"]:
        raise ArtifactError(f"not a trace CSV: {path}")
    names = rows[0][1:]
    samples = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    return TraceTable(names, samples)


def read_truth(path_csv):
    """True function samples for an overlay, if the simulator recorded them.

    Looks first for a `truth` column in the path CSV, then for
    truth_times/truth_values in the JSON sidecar. Returns (times, values)
    or None.
    """
    with open(path_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and "truth" in rows[0]:
        j = rows[0].index("truth")
        t = np.array([float(r[0]) for r in rows[1:]])
        v = np.array([float(r[j]) for r in rows[1:]])
        return t, v
    try:
        with open(str(path_csv) + ".json") as fh:
            side = json.load(fh)
    except OSError:
        return None
    if "truth_times" in side and "truth_values" in side:
        return np.asarray(side["truth_times"], float), np.asarray(side["truth_values"], float)
    return None


@dataclass
class RateTable:
    ladder: np.ndarray
    mean_error: np.ndarray
    se_mean: np.ndarray
    slope: float
    slope_ci: tuple


def read_rate_study(path) -> RateTable:
    with open(path) as fh:
        d = json.load(fh)
    for key in ("ladder", "mean_error", "slope"):
        if key not in d:
            raise ArtifactError(f"rate-study JSON missing {key!r}: {path}")
    return RateTable(
        np.asarray(d["ladder"], float),
        np.asarray(d["mean_error"], float),
        np.asarray(d.get("se_mean", np.zeros(len(d["ladder"]))), float),
        float(d["slope"]),
        tuple(d.get("slope_ci", (float("nan"), float("nan")))),
    )
