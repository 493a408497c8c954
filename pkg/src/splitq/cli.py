"""Command-line entry point.

Subcommands: ``generate`` (synthetic dataset to disk), ``inspect`` (manifest
summary and validation), ``query`` (run one query, or print its lowered loop
program with --emit-ir), ``bench`` (engine comparison over the bundled
corpus), ``simulate`` (distributed-processing simulation), and ``repl``
(interactive query loop).

Exit codes: 0 success, 2 usage or configuration, 3 query diagnostics,
4 data errors. Machine output is JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus
from .cluster.sim import ClusterConfig, QueryArrival, RegisteredData, simulate
from .compiler.ir import emit_text
from .config import Config
from .engine.bench import benchmark, report_table, reports_to_json
from .engine.histogram import HistogramSpec
from .engine.jobs import ENGINES, QueryJob
from .engine.kernels import available_kernels
from .errors import (
    ConfigError,
    DatasetFormatError,
    ExecutionError,
    ProtocolError,
    QueryError,
    SchemaError,
    SplitQError,
    ValidationError,
)
from .store.columnar import validate
from .store.generator import GeneratorParams, generate_events
from .store.io import read_dataset, write_dataset

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_QUERY = 3
EXIT_DATA = 4


def _specs_from_args(hist_args, fallback: str) -> dict[str, HistogramSpec]:
    texts = hist_args if hist_args else [fallback]
    specs = {}
    for text in texts:
        spec = HistogramSpec.parse(text)
        specs[spec.name] = spec
    return specs


def _load_query_source(args) -> tuple[str, str]:
    """(name, source) from --query FILE or --corpus NAME."""
    if getattr(args, "corpus_query", None):
        return args.corpus_query, corpus.query_source(args.corpus_query)
    path = Path(args.query)
    return path.stem, path.read_text()


def _histograms_json(hists) -> str:
    return json.dumps(
        {"histograms": {name: h.to_json() for name, h in sorted(hists.items())}}, indent=2
    )


# --- subcommands ------------------------------------------------------------


def cmd_generate(args, config: Config) -> int:
    params = GeneratorParams(
        mean_multiplicity=args.mean_multiplicity,
        max_multiplicity=args.max_multiplicity,
        pt_mean=args.pt_mean,
        pt_min=args.pt_min,
        eta_max=args.eta_max,
    )
    dataset = generate_events(args.events, args.seed, params)
    manifest = write_dataset(dataset, args.out)
    summary = {
        "out": str(args.out),
        "num_entries": manifest["num_entries"],
        "arrays": len(manifest["arrays"]),
        "total_bytes": manifest["total_bytes"],
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_inspect(args, config: Config) -> int:
    dataset = read_dataset(args.data)
    violations = validate(dataset)
    info = {
        "num_entries": dataset.num_entries,
        "offsets_arrays": {p: int(len(a)) for p, a in sorted(dataset.offsets.items())},
        "attribute_arrays": {p: int(len(a)) for p, a in sorted(dataset.attributes.items())},
        "total_bytes": dataset.nbytes,
        "violations": [str(v) for v in violations],
    }
    print(json.dumps(info, indent=2))
    return EXIT_OK if not violations else EXIT_DATA


def cmd_query(args, config: Config) -> int:
    name, source = _load_query_source(args)
    if not args.hist and getattr(args, "corpus_query", None):
        specs = {name: corpus.default_spec(name)}
    else:
        specs = _specs_from_args(args.hist, config.default_hist)
    dataset = read_dataset(args.data)
    job = QueryJob.prepare(source, dataset.schema, specs)
    if args.emit_ir:
        program = job.flattened_program if args.engine == "flat-flattened" else job.program
        sys.stdout.write(emit_text(program))
        return EXIT_OK
    hists, _ = job.run(dataset, engine=args.engine, kernel=args.kernel)
    print(_histograms_json(hists))
    return EXIT_OK


def cmd_bench(args, config: Config) -> int:
    dataset = read_dataset(args.data)
    if args.query:
        names_sources = [_load_query_source(args)]
    else:
        names_sources = [(n, corpus.query_source(n)) for n in corpus.BENCH_QUERIES]
    kernels = tuple(available_kernels()) if args.kernels == "both" else (args.kernels,)
    reports = []
    for name, source in names_sources:
        specs = {name: corpus.default_spec(name)} if name in corpus.DEFAULT_SPECS else _specs_from_args(
            args.hist, config.default_hist
        )
        job = QueryJob.prepare(source, dataset.schema, specs)
        reports.append(
            benchmark(
                job,
                dataset,
                engines=tuple(args.engines),
                repetitions=args.reps,
                kernels=kernels,
                query_name=name,
            )
        )
    print(report_table(reports))
    if args.json_out:
        Path(args.json_out).write_text(reports_to_json(reports))
        print(f"wrote {args.json_out}")
    if args.csv_out:
        lines = ["query,engine,kernel,events_per_sec,num_fills"]
        for rep in reports:
            for r in rep.results:
                lines.append(
                    f"{rep.query_name},{r.engine},{r.kernel or ''},{r.events_per_sec},{r.num_fills}"
                )
        Path(args.csv_out).write_text("\n".join(lines) + "\n")
        print(f"wrote {args.csv_out}")
    return EXIT_OK


def _build_simulation_inputs(args, config: Config):
    if args.workload:
        obj = json.loads(Path(args.workload).read_text())
        datasets = {}
        for d in obj.get("datasets", []):
            data = generate_events(d["events"], d.get("seed", 0))
            datasets[d["id"]] = RegisteredData(data, d["partitions"])
        arrivals = []
        for q in obj.get("queries", []):
            q = dict(q)
            if "corpus" in q:
                cname = q.pop("corpus")
                q["query"] = corpus.query_source(cname)
                q.setdefault("hists", [f"{cname}:{s.num_bins}:{s.lo}:{s.hi}" for s in [corpus.default_spec(cname)]])
            arrivals.append(QueryArrival.from_json(q))
        return datasets, arrivals

    name = args.query_name
    source = corpus.query_source(name)
    spec = corpus.default_spec(name)
    data = generate_events(args.events, args.dataset_seed)
    datasets = {"data": RegisteredData(data, args.partitions)}
    arrivals = [
        QueryArrival(
            time=round(i * args.interval, 9),
            source=source,
            dataset_id="data",
            specs={name: spec},
        )
        for i in range(args.queries)
    ]
    return datasets, arrivals


def cmd_simulate(args, config: Config) -> int:
    datasets, arrivals = _build_simulation_inputs(args, config)
    cluster = ClusterConfig(
        num_workers=args.workers,
        cache_bytes=int(args.cache_mb * 1024 * 1024),
        policy=args.policy,
        payload=args.payload,
        round2_delay=args.round2_delay,
        straggler_prob=args.straggler_prob,
    )
    metrics = simulate(cluster, arrivals, datasets, seed=args.seed)
    summary = {
        "policy": metrics.policy,
        "seed": metrics.seed,
        "workers": metrics.num_workers,
        "queries": len(metrics.queries),
        "completed": sum(1 for q in metrics.queries if q["completed"] is not None),
        "cache_hit_rate": metrics.cache_hit_rate,
        "bytes_loaded": metrics.bytes_loaded,
        "makespan": metrics.makespan,
    }
    print(json.dumps(summary, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(metrics.to_json_text())
        (out / "events.csv").write_text(metrics.events_csv())
        print(f"wrote {out / 'metrics.json'} and {out / 'events.csv'}")
    return EXIT_OK


def _sparkline(counts) -> str:
    blocks = " ▁▂▃▄▅▆▇█"
    top = max(counts) if len(counts) and max(counts) > 0 else 1
    return "".join(blocks[min(8, int(9 * c / top))] if c else blocks[0] for c in counts)


def _print_summary(hists) -> None:
    for name, h in sorted(hists.items()):
        spec = h.spec
        total_in = int(h.counts.sum())
        if total_in:
            centers = [spec.lo + (i + 0.5) * spec.width for i in range(spec.num_bins)]
            mean = sum(c * n for c, n in zip(centers, h.counts)) / total_in
            peak = int(h.counts.argmax())
            peak_text = (
                f"peak bin {peak} [{spec.lo + peak * spec.width:.3g}, "
                f"{spec.lo + (peak + 1) * spec.width:.3g}) x{int(h.counts[peak])}"
            )
            mean_text = f"mean~{mean:.4g}"
        else:
            peak_text = "no in-range fills"
            mean_text = "mean~n/a"
        print(
            f"{name}: fills={h.num_fills} under={h.underflow} over={h.overflow} "
            f"{mean_text} {peak_text}"
        )
        print(f"  {_sparkline(h.counts.tolist())}")


def cmd_repl(args, config: Config) -> int:
    dataset = read_dataset(args.data)
    specs = _specs_from_args(args.hist, config.default_hist)
    engine = args.engine
    print(f"dataset: {dataset.num_entries} events; engine: {engine}")
    print("enter a query, blank line to run; :engine NAME, :cancel, :quit")
    buffer: list[str] = []
    while True:
        try:
            line = input(". " if buffer else "> ")
        except EOFError:
            print()
            return EXIT_OK
        stripped = line.strip()
        if stripped.startswith(":"):
            parts = stripped[1:].split()
            cmd = parts[0] if parts else ""
            if cmd == "quit":
                return EXIT_OK
            if cmd == "cancel":
                buffer = []
                print("(input cleared)")
                continue
            if cmd == "engine":
                if len(parts) == 2 and parts[1] in ENGINES:
                    engine = parts[1]
                    print(f"engine: {engine}")
                else:
                    print(f"usage: :engine {{{','.join(ENGINES)}}}")
                continue
            print(f"unknown directive {stripped!r}")
            continue
        if stripped == "":
            if not buffer:
                continue
            source = "\n".join(buffer)
            buffer = []
            try:
                job = QueryJob.prepare(source, dataset.schema, specs)
                hists, _ = job.run(dataset, engine=engine)
            except (QueryError, ExecutionError) as exc:
                print(f"error: {exc}")
                continue
            _print_summary(hists)
            continue
        buffer.append(line)


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitq",
        description="Desk-scale query engine for nested event data.",
    )
    parser.add_argument("--config", help="JSON config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic dataset directory")
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--mean-multiplicity", type=float, default=2.5)
    p.add_argument("--max-multiplicity", type=int, default=16)
    p.add_argument("--pt-mean", type=float, default=30.0)
    p.add_argument("--pt-min", type=float, default=3.0)
    p.add_argument("--eta-max", type=float, default=2.5)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("inspect", help="print a dataset's manifest summary and validate it")
    p.add_argument("--data", required=True)
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("query", help="run one query over a dataset directory")
    p.add_argument("--data", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--query", help="query source file (.q)")
    group.add_argument("--corpus", dest="corpus_query", choices=corpus.ALL_QUERIES)
    p.add_argument("--engine", choices=ENGINES, default="flat")
    p.add_argument("--kernel", choices=("auto", "compiled", "python"), default="auto")
    p.add_argument("--hist", action="append", default=[], help="histogram spec name:bins:lo:hi")
    p.add_argument("--emit-ir", action="store_true", help="print the lowered loop program and exit")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("bench", help="benchmark engines over the bundled corpus")
    p.add_argument("--data", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--corpus", action="store_true", help="run the four-query corpus (default)")
    group.add_argument("--query", help="benchmark one query file instead")
    p.add_argument("--hist", action="append", default=[])
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--engines", nargs="+", default=list(ENGINES), choices=ENGINES)
    p.add_argument("--kernels", choices=("auto", "compiled", "python", "both"), default="both")
    p.add_argument("--json-out")
    p.add_argument("--csv-out")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("simulate", help="simulate distributed query processing")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--cache-mb", type=float, default=64.0)
    p.add_argument("--policy", choices=("two-round-pull", "any-pull-no-affinity", "round-robin-push", "least-busy-push"), default="two-round-pull")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--payload", choices=("real", "delay"), default="real")
    p.add_argument("--round2-delay", type=float, default=0.2)
    p.add_argument("--straggler-prob", type=float, default=0.0)
    p.add_argument("--workload", help="workload JSON file (overrides the flags below)")
    p.add_argument("--queries", type=int, default=20)
    p.add_argument("--interval", type=float, default=0.05)
    p.add_argument("--partitions", type=int, default=10)
    p.add_argument("--events", type=int, default=20000)
    p.add_argument("--dataset-seed", type=int, default=0)
    p.add_argument("--query-name", choices=corpus.ALL_QUERIES, default="max_pt")
    p.add_argument("--out", help="directory for metrics.json and events.csv")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("repl", help="interactive query loop over one dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--hist", action="append", default=[])
    p.add_argument("--engine", choices=ENGINES, default="flat")
    p.set_defaults(fn=cmd_repl)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        config = Config.load(args.config)
        return args.fn(args, config)
    except (QueryError, ExecutionError) as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except (DatasetFormatError, ValidationError, SchemaError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, ProtocolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SplitQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
