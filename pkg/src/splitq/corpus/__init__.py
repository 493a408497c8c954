"""Bundled analysis queries over the muon schema.

The four benchmark queries exercise distinct shapes: a per-event running
maximum, maximizing one attribute while plotting another (with a None
guard), pairwise iteration with the dimuon mass
sqrt(2 * pt1 * pt2 * (cosh(eta1 - eta2) - cos(phi1 - phi2))), and the same
pair loop with a cheap body. ``all_pt`` is a plain fill of every muon's pt,
the canonical flattenable query.
"""

from __future__ import annotations

from importlib import resources

from ..engine.histogram import HistogramSpec

BENCH_QUERIES = ("max_pt", "eta_of_best", "mass_of_pairs", "pt_sum_of_pairs")
ALL_QUERIES = BENCH_QUERIES + ("all_pt",)

DEFAULT_SPECS = {
    "max_pt": HistogramSpec("max_pt", 100, 0.0, 200.0),
    "eta_of_best": HistogramSpec("eta_of_best", 100, -2.5, 2.5),
    "mass_of_pairs": HistogramSpec("mass_of_pairs", 120, 0.0, 120.0),
    "pt_sum_of_pairs": HistogramSpec("pt_sum_of_pairs", 100, 0.0, 200.0),
    "all_pt": HistogramSpec("all_pt", 100, 0.0, 200.0),
}


def query_source(name: str) -> str:
    if name not in ALL_QUERIES:
        raise KeyError(f"unknown corpus query {name!r} (have {', '.join(ALL_QUERIES)})")
    return resources.files(__package__).joinpath(f"{name}.q").read_text()


def default_spec(name: str) -> HistogramSpec:
    return DEFAULT_SPECS[name]
