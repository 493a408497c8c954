"""Execution engines: baseline object interpreter, flat kernels, benchmark."""

from .baseline import run_baseline
from .bench import BenchReport, benchmark, report_table, reports_to_json, time_engine
from .histogram import Histogram, HistogramSpec, empty_histograms, merge, merge_maps
from .jobs import ENGINES, QueryJob
from .kernels import DEFAULT_KERNEL, HAVE_COMPILED, available_kernels, run_flat

__all__ = [
    "BenchReport",
    "DEFAULT_KERNEL",
    "ENGINES",
    "HAVE_COMPILED",
    "Histogram",
    "HistogramSpec",
    "QueryJob",
    "available_kernels",
    "benchmark",
    "empty_histograms",
    "merge",
    "merge_maps",
    "report_table",
    "reports_to_json",
    "run_baseline",
    "run_flat",
    "time_engine",
]
