"""Figures for piecewise-constant posterior artifacts.

This package is deliberately decoupled from the estimation code: it only
understands the CSV/JSON files the pcbayes command line tool writes.
"""
from .artifacts import BandTable, RateTable, TraceTable, read_band, read_rate_study, read_trace, read_truth
from .figures import band_overlay, rate_slope, save_deterministic, trace_panel

__all__ = [
    "BandTable",
    "TraceTable",
    "RateTable",
    "read_band",
    "read_trace",
    "read_rate_study",
    "read_truth",
    "band_overlay",
    "trace_panel",
    "rate_slope",
    "save_deterministic",
]
