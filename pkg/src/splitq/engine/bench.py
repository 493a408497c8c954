"""Benchmark harness: events/second per engine on in-memory datasets.

Single-threaded wall-clock timing; one warm-up repetition is discarded and
the median of the remaining repetitions is reported, along with speedup
ratios against the baseline engine and a fill-count cross-check.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from statistics import median

from ..store.columnar import ColumnarDataset
from .histogram import HistogramSpec
from .jobs import QueryJob

DEFAULT_ENGINES = ("baseline", "flat", "flat-flattened")


@dataclass
class EngineResult:
    engine: str
    kernel: str | None
    times: list[float]
    events_per_sec: float
    num_fills: int

    def to_json(self) -> dict:
        return {
            "engine": self.engine,
            "kernel": self.kernel,
            "times_sec": self.times,
            "events_per_sec": self.events_per_sec,
            "num_fills": self.num_fills,
        }


@dataclass
class BenchReport:
    query_name: str
    num_events: int
    repetitions: int
    flattened_applies: bool
    results: list[EngineResult] = field(default_factory=list)

    def result(self, engine: str, kernel: str | None = None) -> EngineResult:
        for r in self.results:
            if r.engine == engine and (kernel is None or r.kernel == kernel):
                return r
        raise KeyError(f"{engine}/{kernel} not in report")

    def speedup(self, engine: str, kernel: str | None = None, base: str = "baseline") -> float:
        return self.result(engine, kernel).events_per_sec / self.result(base).events_per_sec

    def fills_consistent(self) -> bool:
        return len({r.num_fills for r in self.results}) == 1

    def to_json(self) -> dict:
        out = {
            "query": self.query_name,
            "num_events": self.num_events,
            "repetitions": self.repetitions,
            "flattened_applies": self.flattened_applies,
            "fills_consistent": self.fills_consistent(),
            "engines": [r.to_json() for r in self.results],
        }
        base = next((r for r in self.results if r.engine == "baseline"), None)
        if base is not None:
            out["speedup_vs_baseline"] = {
                f"{r.engine}" + (f"[{r.kernel}]" if r.kernel else ""): r.events_per_sec / base.events_per_sec
                for r in self.results
                if r is not base
            }
        return out


def time_engine(
    job: QueryJob,
    dataset: ColumnarDataset,
    engine: str,
    kernel: str = "auto",
    repetitions: int = 3,
    warmup: bool = True,
) -> EngineResult:
    """Time one engine; the warm-up run is discarded."""
    if warmup:
        job.run(dataset, engine=engine, kernel=kernel)
    times = []
    num_fills = 0
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        hists, _ = job.run(dataset, engine=engine, kernel=kernel)
        times.append(time.perf_counter() - t0)
        num_fills = sum(h.num_fills for h in hists.values())
    med = median(times)
    return EngineResult(
        engine=engine,
        kernel=None if engine == "baseline" else kernel,
        times=times,
        events_per_sec=dataset.num_entries / med if med > 0 else float("inf"),
        num_fills=num_fills,
    )


def benchmark(
    job: QueryJob,
    dataset: ColumnarDataset,
    engines=DEFAULT_ENGINES,
    repetitions: int = 3,
    warmup: bool = True,
    kernels: tuple[str, ...] = ("auto",),
    query_name: str = "query",
) -> BenchReport:
    """Run the full engine grid for one query over one dataset."""
    report = BenchReport(
        query_name=query_name,
        num_events=dataset.num_entries,
        repetitions=repetitions,
        flattened_applies=job.flattened_program.flattened,
    )
    for engine in engines:
        if engine == "baseline":
            report.results.append(
                time_engine(job, dataset, engine, repetitions=repetitions, warmup=warmup)
            )
            continue
        for kernel in kernels:
            report.results.append(
                time_engine(
                    job, dataset, engine, kernel=kernel, repetitions=repetitions, warmup=warmup
                )
            )
    return report


def report_table(reports: list[BenchReport]) -> str:
    """Aligned text table across queries and engines."""
    headers = ["query", "events", "engine", "kernel", "events/sec", "speedup", "fills"]
    rows = []
    for rep in reports:
        try:
            base = rep.result("baseline").events_per_sec
        except KeyError:
            base = None
        for r in rep.results:
            speed = "" if base is None or r.engine == "baseline" else f"{r.events_per_sec / base:.2f}x"
            rows.append(
                [
                    rep.query_name,
                    str(rep.num_events),
                    r.engine,
                    r.kernel or "-",
                    f"{r.events_per_sec:,.0f}",
                    speed,
                    str(r.num_fills),
                ]
            )
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def reports_to_json(reports: list[BenchReport]) -> str:
    return json.dumps({"reports": [r.to_json() for r in reports]}, indent=2)
