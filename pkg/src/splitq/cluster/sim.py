"""Deterministic discrete-event simulation of distributed query processing.

Workers pull subtasks from the coordinator with a preference for partitions
already in their cache: an idle worker first asks for cache-local work only,
and if there is none it re-polls after a short delay, this time accepting
any subtask (which costs a cache load and possible LRU evictions). Push
policies (round-robin, least-busy) are provided for comparison, as is an
affinity-blind pull. Completions store partial histograms; an aggregator
merges whatever is available at a fixed interval so results accumulate
while a query runs; leases re-advertise work lost to stragglers or dead
workers.

All state transitions are serialized on a virtual clock (heap of
(time, seq) events), and every random draw comes from one seeded stream, so
a simulation is replayable byte for byte in its metrics output.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import random
from dataclasses import dataclass, field, fields, replace

from ..engine.histogram import HistogramSpec
from ..errors import ConfigError, ProtocolError
from ..store.columnar import ColumnarDataset
from .board import PartitionKey, Subtask
from .coordinator import Coordinator
from .workers import WorkerCache

POLICIES = ("two-round-pull", "any-pull-no-affinity", "round-robin-push", "least-busy-push")
PAYLOADS = ("real", "delay")


@dataclass(frozen=True)
class ClusterConfig:
    num_workers: int = 4
    cache_bytes: int = 64 * 1024 * 1024
    policy: str = "two-round-pull"
    payload: str = "real"
    round2_delay: float = 0.2
    lease_timeout: float | None = None  # None: 10x the expected subtask duration
    aggregate_interval: float = 0.25
    seconds_per_event: float = 2e-6
    compute_base: float = 0.002
    load_bandwidth: float = 200e6  # bytes/second
    load_latency: float = 0.002
    delay_mean: float = 0.05  # payload="delay" compute time
    straggler_prob: float = 0.0
    straggler_factor: float = 10.0
    worker_death: tuple[int, float] | None = None  # (worker index, time)

    def __post_init__(self):
        if self.num_workers < 1:
            raise ConfigError("num_workers must be >= 1")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r} (choose from {', '.join(POLICIES)})")
        if self.payload not in PAYLOADS:
            raise ConfigError(f"unknown payload {self.payload!r} (real or delay)")
        if self.round2_delay < 0 or self.aggregate_interval <= 0:
            raise ConfigError("delays and intervals must be positive")

    @classmethod
    def from_json(cls, obj: dict) -> "ClusterConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown cluster config keys: {sorted(unknown)}")
        if "worker_death" in obj and obj["worker_death"] is not None:
            obj = dict(obj)
            obj["worker_death"] = tuple(obj["worker_death"])
        return cls(**obj)


@dataclass(frozen=True)
class QueryArrival:
    time: float
    source: str
    dataset_id: str
    specs: dict[str, HistogramSpec]
    num_partitions: int | None = None

    @classmethod
    def from_json(cls, obj: dict) -> "QueryArrival":
        known = {"time", "query", "dataset", "hists", "num_partitions"}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown workload keys: {sorted(unknown)}")
        specs = {}
        for text in obj.get("hists", []):
            spec = HistogramSpec.parse(text)
            specs[spec.name] = spec
        return cls(
            time=float(obj["time"]),
            source=obj["query"],
            dataset_id=obj["dataset"],
            specs=specs,
            num_partitions=obj.get("num_partitions"),
        )


@dataclass
class RegisteredData:
    """Dataset made available to the simulated cluster."""

    data: ColumnarDataset | None
    num_partitions: int
    partition_bytes: int | None = None  # required when data is None


@dataclass
class SimMetrics:
    policy: str
    payload: str
    seed: int
    num_workers: int
    makespan: float = 0.0
    executed_subtasks: int = 0
    cache_hits: int = 0
    bytes_loaded: int = 0
    queries: list[dict] = field(default_factory=list)
    worker_busy: dict[str, float] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    final_results: dict[str, dict] = field(default_factory=dict)

    @property
    def cache_hit_rate(self) -> float:
        return self.cache_hits / self.executed_subtasks if self.executed_subtasks else 0.0

    def utilization(self) -> dict[str, float]:
        if self.makespan <= 0:
            return {w: 0.0 for w in self.worker_busy}
        return {w: busy / self.makespan for w, busy in self.worker_busy.items()}

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "payload": self.payload,
            "seed": self.seed,
            "num_workers": self.num_workers,
            "makespan": self.makespan,
            "executed_subtasks": self.executed_subtasks,
            "cache_hits": self.cache_hits,
            "cache_hit_rate": self.cache_hit_rate,
            "bytes_loaded": self.bytes_loaded,
            "queries": self.queries,
            "worker_busy_seconds": self.worker_busy,
            "worker_utilization": self.utilization(),
            "final_results": self.final_results,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def events_csv(self) -> str:
        """Event log as CSV (the simulation time series)."""
        columns = ["t", "kind", "worker", "query", "dataset", "partition", "detail"]
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(columns)
        for e in self.events:
            writer.writerow([e.get(c, "") for c in columns])
        return out.getvalue()


class _WorkerSim:
    def __init__(self, wid: str, index: int, cache_bytes: int):
        self.wid = wid
        self.index = index
        self.cache = WorkerCache(cache_bytes)
        self.alive = True
        self.busy: Subtask | None = None
        self.waiting_round2 = False
        self.queue: list[Subtask] = []  # push policies only
        self.busy_seconds = 0.0


class Simulation:
    """One simulation run; build, call run(), read .metrics."""

    MAX_EVENTS = 5_000_000

    def __init__(
        self,
        config: ClusterConfig,
        workload: list[QueryArrival],
        datasets: dict[str, RegisteredData],
        seed: int = 0,
    ):
        self.config = config
        self.rng = random.Random(seed)
        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self.metrics = SimMetrics(
            policy=config.policy,
            payload=config.payload,
            seed=seed,
            num_workers=config.num_workers,
        )

        lease = config.lease_timeout
        if lease is None:
            lease = 10.0 * self._expected_subtask_seconds(datasets)
        self.coordinator = Coordinator(lease_timeout=lease)
        for dataset_id, reg in datasets.items():
            self.coordinator.register_dataset(
                dataset_id, reg.data, reg.num_partitions, reg.partition_bytes
            )

        self.workers = [
            _WorkerSim(f"w{idx}", idx, config.cache_bytes) for idx in range(config.num_workers)
        ]
        self.workload = sorted(workload, key=lambda q: q.time)
        self._rr_next = 0
        self._tick_scheduled = False
        self._arrivals_pending = len(self.workload)

        for arrival in self.workload:
            self._schedule(arrival.time, self._on_arrival, arrival)
        if config.worker_death is not None:
            widx, t = config.worker_death
            if not 0 <= widx < config.num_workers:
                raise ConfigError("worker_death index out of range")
            self._schedule(t, self._on_death, self.workers[widx])

    def _expected_subtask_seconds(self, datasets: dict[str, RegisteredData]) -> float:
        cfg = self.config
        if cfg.payload == "delay":
            compute = cfg.delay_mean
        else:
            entries = []
            for reg in datasets.values():
                if reg.data is not None and reg.num_partitions:
                    entries.append(reg.data.num_entries / reg.num_partitions)
            mean_entries = sum(entries) / len(entries) if entries else 0.0
            compute = cfg.compute_base + cfg.seconds_per_event * mean_entries
        sizes = [
            reg.partition_bytes
            if reg.data is None
            else (reg.data.nbytes / max(reg.num_partitions, 1))
            for reg in datasets.values()
        ]
        mean_bytes = sum(sizes) / len(sizes) if sizes else 0.0
        load = cfg.load_latency + mean_bytes / cfg.load_bandwidth
        return max(compute + load, 1e-6)

    # --- event plumbing -----------------------------------------------------

    def _schedule(self, t: float, fn, *args) -> None:
        heapq.heappush(self._heap, (t, self._seq, fn, args))
        self._seq += 1

    def _log(self, kind: str, **kw) -> None:
        event = {"t": round(self.now, 9), "kind": kind}
        event.update(kw)
        self.metrics.events.append(event)

    def run(self) -> SimMetrics:
        processed = 0
        while self._heap:
            t, _, fn, args = heapq.heappop(self._heap)
            self.now = max(self.now, t)
            fn(*args)
            processed += 1
            if processed > self.MAX_EVENTS:
                raise ProtocolError("simulation exceeded its event budget; likely not terminating")
        self._finish()
        return self.metrics

    # --- arrival / aggregation ------------------------------------------------

    def _on_arrival(self, arrival: QueryArrival) -> None:
        self._arrivals_pending -= 1
        qid = self.coordinator.submit_query(
            arrival.source,
            arrival.dataset_id,
            arrival.specs,
            num_partitions=arrival.num_partitions,
            now=self.now,
        )
        self._log("submit", query=qid, dataset=arrival.dataset_id)
        self._dispatch_new_work()
        if not self._tick_scheduled:
            self._tick_scheduled = True
            self._schedule(self.now + self.config.aggregate_interval, self._on_tick)

    def _on_tick(self) -> None:
        self._tick_scheduled = False
        active = self.coordinator.active_queries()
        for qid in active:
            merged, fraction = self.coordinator.aggregate(qid, now=self.now)
            fills = sum(h.num_fills for h in merged.values())
            self._log("snapshot", query=qid, detail=f"fraction={fraction:.4f};fills={fills}")
        if active or self._arrivals_pending:
            self._tick_scheduled = True
            self._schedule(self.now + self.config.aggregate_interval, self._on_tick)

    # --- scheduling policies ----------------------------------------------------

    def _dispatch_new_work(self) -> None:
        if self.config.policy in ("round-robin-push", "least-busy-push"):
            self._push_assign()
        else:
            for w in self.workers:
                self._wake(w)

    def _wake(self, w: _WorkerSim) -> None:
        """New work became visible; let an idle pull-mode worker react."""
        if not w.alive or w.busy is not None:
            return
        if self.config.policy == "any-pull-no-affinity":
            a = self.coordinator.pull_work(
                w.wid, w.cache.keys(), allow_remote=True, now=self.now, prefer_local=False
            )
            if a is not None:
                self._start(w, a)
            return
        # two-round-pull: local work is claimed immediately; anything else
        # only after the round-two delay.
        a = self.coordinator.pull_work(w.wid, w.cache.keys(), allow_remote=False, now=self.now)
        if a is not None:
            self._start(w, a)
            return
        if not w.waiting_round2:
            w.waiting_round2 = True
            self._schedule(self.now + self.config.round2_delay, self._on_round2, w)

    def _on_round2(self, w: _WorkerSim) -> None:
        w.waiting_round2 = False
        if not w.alive or w.busy is not None:
            return
        a = self.coordinator.pull_work(w.wid, w.cache.keys(), allow_remote=True, now=self.now)
        if a is not None:
            self._start(w, a)

    def _push_assign(self) -> None:
        """Assign every advertised subtask to a live worker queue."""
        while True:
            live = [w for w in self.workers if w.alive]
            if not live:
                return
            if self.config.policy == "round-robin-push":
                w = None
                for _ in range(len(self.workers)):
                    cand = self.workers[self._rr_next % len(self.workers)]
                    self._rr_next += 1
                    if cand.alive:
                        w = cand
                        break
            else:  # least-busy-push: shortest queue (the busy slot counts)
                w = min(live, key=lambda c: (len(c.queue) + (c.busy is not None), c.index))
            a = self.coordinator.pull_work(
                w.wid, w.cache.keys(), allow_remote=True, now=self.now, prefer_local=False
            )
            if a is None:
                return
            self._schedule_lease_check(a)
            w.queue.append(replace(a))
            self._log("assign", worker=w.wid, query=a.query_id,
                      dataset=a.dataset_id, partition=a.partition_index)
            if w.busy is None:
                self._start(w, w.queue.pop(0))

    # --- subtask execution ----------------------------------------------------------

    def _start(self, w: _WorkerSim, a: Subtask) -> None:
        # The worker runs its own snapshot: the board may bump the canonical
        # subtask's attempt if the lease expires while this one is running.
        self._schedule_lease_check(a)
        a = replace(a)
        w.busy = a
        hit = a.partition in w.cache
        self.metrics.executed_subtasks += 1
        if hit:
            self.metrics.cache_hits += 1
            w.cache.touch(a.partition)
        self._log(
            "claim",
            worker=w.wid,
            query=a.query_id,
            dataset=a.dataset_id,
            partition=a.partition_index,
            detail="local" if hit else "remote",
        )
        started = self.now
        if hit:
            self._begin_compute(w, a, started)
        else:
            load_s = self.config.load_latency + a.nbytes / self.config.load_bandwidth
            self.metrics.bytes_loaded += a.nbytes
            self._schedule(self.now + load_s, self._on_loaded, w, a, started)

    def _on_loaded(self, w: _WorkerSim, a: Subtask, started: float) -> None:
        if not w.alive or w.busy is not a:
            return
        evicted = w.cache.add(a.partition, a.nbytes)
        self._log("load", worker=w.wid, dataset=a.dataset_id, partition=a.partition_index)
        for old in evicted:
            self._log("evict", worker=w.wid, dataset=old[0], partition=old[1])
        self._begin_compute(w, a, started)

    def _begin_compute(self, w: _WorkerSim, a: Subtask, started: float) -> None:
        if self.config.payload == "delay":
            compute_s = self.rng.expovariate(1.0 / self.config.delay_mean)
        else:
            entries = a.entry_range[1] - a.entry_range[0]
            compute_s = self.config.compute_base + self.config.seconds_per_event * entries
        if self.config.straggler_prob > 0 and self.rng.random() < self.config.straggler_prob:
            compute_s *= self.config.straggler_factor
        self._schedule(self.now + compute_s, self._on_complete, w, a, started)

    def _on_complete(self, w: _WorkerSim, a: Subtask, started: float) -> None:
        if not w.alive or w.busy is not a:
            return
        record = self.coordinator.queries[a.query_id]
        if self.config.payload == "real" and not record.cancelled:
            data = self.coordinator.datasets[a.dataset_id].slice_for(a.partition_index)
            partials, _ = record.job.run(data, engine="flat")
        else:
            partials = {}
        ack = self.coordinator.complete_subtask(
            w.wid, a.query_id, a.partition_index, a.attempt, partials, now=self.now
        )
        w.busy = None
        w.busy_seconds += self.now - started
        self._log(
            "complete",
            worker=w.wid,
            query=a.query_id,
            partition=a.partition_index,
            detail=ack,
        )
        if ack == "accepted" and self.coordinator.is_complete(a.query_id):
            merged, fraction = self.coordinator.aggregate(a.query_id, now=self.now)
            self._log("query-done", query=a.query_id, detail=f"fraction={fraction:.4f}")
        # Keep pulling (or drain the push queue).
        if self.config.policy in ("round-robin-push", "least-busy-push"):
            if w.queue:
                self._start(w, w.queue.pop(0))
        else:
            self._wake(w)

    # --- leases and failures -----------------------------------------------------------

    def _schedule_lease_check(self, a: Subtask) -> None:
        if a.lease_expiry is not None:
            self._schedule(a.lease_expiry, self._on_lease_check)

    def _on_lease_check(self) -> None:
        expired = self.coordinator.expire_leases(self.now)
        if not expired:
            return
        for s in expired:
            self._log(
                "lease-expired",
                query=s.query_id,
                partition=s.partition_index,
                detail=f"attempt={s.attempt}",
            )
        self._dispatch_new_work()

    def _on_death(self, w: _WorkerSim) -> None:
        w.alive = False
        w.busy = None
        w.queue.clear()
        w.cache.clear()
        self._log("death", worker=w.wid)

    # --- wrap-up ------------------------------------------------------------------------

    def _finish(self) -> None:
        m = self.metrics
        m.makespan = self.now
        for w in self.workers:
            m.worker_busy[w.wid] = round(w.busy_seconds, 9)
        for qid, record in self.coordinator.queries.items():
            merged, fraction = self.coordinator.aggregate(qid, now=self.now)
            m.queries.append(
                {
                    "query": qid,
                    "dataset": record.dataset_id,
                    "submitted": record.submit_time,
                    "completed": record.complete_time,
                    "latency": None
                    if record.complete_time is None
                    else round(record.complete_time - record.submit_time, 9),
                    "cancelled": record.cancelled,
                    "fraction_complete": fraction,
                }
            )
            m.final_results[qid] = {
                "fraction_complete": fraction,
                "histograms": {name: h.to_json() for name, h in merged.items()},
            }


def simulate(
    config: ClusterConfig,
    workload: list[QueryArrival],
    datasets: dict[str, RegisteredData],
    seed: int = 0,
) -> SimMetrics:
    """Run one deterministic simulation and return its metrics."""
    return Simulation(config, workload, datasets, seed=seed).run()
