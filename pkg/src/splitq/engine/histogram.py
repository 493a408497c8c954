"""Fixed-bin 1-D histograms, the unit of query output.

Binning contract (identical in every engine, compiled or not): NaN counts as
overflow; v < lo as underflow; v >= hi as overflow; otherwise the bin is
``int((v - lo) / width)`` with ``width = (hi - lo) / num_bins``, clamped to
the last bin if float rounding lands exactly on num_bins. Every fill,
including under/overflow, increments num_fills, so
``sum(counts) + underflow + overflow == num_fills`` always holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AggregationError


@dataclass(frozen=True)
class HistogramSpec:
    name: str
    num_bins: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.num_bins < 1:
            raise ValueError("num_bins must be >= 1")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not self.lo < self.hi:
            raise ValueError("lo must be < hi")

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.num_bins

    @classmethod
    def parse(cls, text: str) -> "HistogramSpec":
        """Parse the CLI form ``name:bins:lo:hi``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"histogram spec {text!r} is not name:bins:lo:hi")
        name, bins, lo, hi = parts
        return cls(name, int(bins), float(lo), float(hi))

    def to_json(self) -> dict:
        return {"name": self.name, "num_bins": self.num_bins, "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_json(cls, obj: dict) -> "HistogramSpec":
        return cls(obj["name"], obj["num_bins"], obj["lo"], obj["hi"])


class Histogram:
    """Mutable histogram owned by a single executor; merge after running."""

    __slots__ = ("spec", "counts", "underflow", "overflow", "num_fills")

    def __init__(self, spec: HistogramSpec, counts=None, underflow=0, overflow=0, num_fills=0):
        self.spec = spec
        self.counts = (
            np.zeros(spec.num_bins, dtype=np.int64)
            if counts is None
            else np.asarray(counts, dtype=np.int64).copy()
        )
        if len(self.counts) != spec.num_bins:
            raise ValueError("counts length disagrees with spec")
        self.underflow = int(underflow)
        self.overflow = int(overflow)
        self.num_fills = int(num_fills)

    def fill(self, v: float) -> None:
        v = float(v)
        spec = self.spec
        if v != v:  # NaN
            self.overflow += 1
        elif v < spec.lo:
            self.underflow += 1
        elif v >= spec.hi:
            self.overflow += 1
        else:
            idx = int((v - spec.lo) / spec.width)
            if idx >= spec.num_bins:
                idx = spec.num_bins - 1
            self.counts[idx] += 1
        self.num_fills += 1

    def is_conserving(self) -> bool:
        return int(self.counts.sum()) + self.underflow + self.overflow == self.num_fills

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.counts, other.counts)
            and self.underflow == other.underflow
            and self.overflow == other.overflow
            and self.num_fills == other.num_fills
        )

    def __repr__(self) -> str:
        return (
            f"Histogram({self.spec.name!r}, fills={self.num_fills}, "
            f"under={self.underflow}, over={self.overflow})"
        )

    def copy(self) -> "Histogram":
        return Histogram(self.spec, self.counts, self.underflow, self.overflow, self.num_fills)

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "counts": [int(c) for c in self.counts],
            "underflow": self.underflow,
            "overflow": self.overflow,
            "num_fills": self.num_fills,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Histogram":
        return cls(
            HistogramSpec.from_json(obj["spec"]),
            obj["counts"],
            obj["underflow"],
            obj["overflow"],
            obj["num_fills"],
        )


def merge(a: Histogram, b: Histogram) -> Histogram:
    """Bin-wise sum of two histograms with identical specs."""
    if a.spec != b.spec:
        raise AggregationError(f"cannot merge {a.spec} with {b.spec}")
    return Histogram(
        a.spec,
        a.counts + b.counts,
        a.underflow + b.underflow,
        a.overflow + b.overflow,
        a.num_fills + b.num_fills,
    )


def merge_maps(maps: list[dict[str, Histogram]], specs: dict[str, HistogramSpec]) -> dict[str, Histogram]:
    """Merge histogram maps; absent names contribute nothing."""
    out = {name: Histogram(spec) for name, spec in specs.items()}
    for m in maps:
        for name, h in m.items():
            out[name] = merge(out[name], h)
    return out


def empty_histograms(specs: dict[str, HistogramSpec]) -> dict[str, Histogram]:
    return {name: Histogram(spec) for name, spec in specs.items()}
