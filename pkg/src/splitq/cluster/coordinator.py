"""In-process coordinator: query registry, task board, and result store.

The coordinator owns all shared scheduling state behind a strict
request/response interface (submit, pull, complete, aggregate, cancel), so
it could sit behind a transport without semantic changes. Every public
method takes the caller's clock; the coordinator holds no timer of its own.
Workers keep their own caches; the coordinator learns what is cached only
from the partition set a worker sends with each pull.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..engine.histogram import Histogram, HistogramSpec, merge_maps
from ..engine.jobs import QueryJob
from ..errors import ProtocolError
from ..store.columnar import ColumnarDataset, Partition, make_partitions, slice_entries
from .board import PartitionKey, Subtask, SubtaskKey, TaskBoard
from .results import ResultStore


@dataclass
class DatasetEntry:
    dataset_id: str
    partitions: list[Partition]
    data: ColumnarDataset | None = None
    _slices: dict[int, ColumnarDataset] = field(default_factory=dict)

    def slice_for(self, partition_index: int) -> ColumnarDataset:
        if self.data is None:
            raise ProtocolError(f"dataset {self.dataset_id!r} has no payload data")
        if partition_index not in self._slices:
            lo, hi = self.partitions[partition_index].entry_range
            self._slices[partition_index] = slice_entries(self.data, lo, hi)
        return self._slices[partition_index]


@dataclass
class QueryRecord:
    query_id: str
    source: str
    dataset_id: str
    specs: dict[str, HistogramSpec]
    num_subtasks: int
    submit_time: float
    job: QueryJob | None = None
    cancelled: bool = False
    complete_time: float | None = None


class Coordinator:
    """Deterministic scheduling state machine; methods are atomic."""

    def __init__(self, lease_timeout: float = 60.0):
        self.lease_timeout = lease_timeout
        self.board = TaskBoard()
        self.results = ResultStore()
        self.datasets: dict[str, DatasetEntry] = {}
        self.queries: dict[str, QueryRecord] = {}
        self._qcount = 0
        self._lock = threading.RLock()

    # --- datasets -------------------------------------------------------------

    def register_dataset(
        self,
        dataset_id: str,
        data: ColumnarDataset | None,
        num_partitions: int,
        partition_bytes: int | None = None,
    ) -> list[Partition]:
        """Register a dataset with a fixed partitioning.

        With real data the partition ranges and byte sizes are computed from
        the arrays; a metadata-only registration (data None) needs an explicit
        per-partition byte size and supports only delay payloads.
        """
        with self._lock:
            if dataset_id in self.datasets:
                raise ProtocolError(f"dataset {dataset_id!r} already registered")
            if data is not None:
                partitions = make_partitions(data, dataset_id, num_partitions)
            else:
                if partition_bytes is None:
                    raise ProtocolError("metadata-only registration needs partition_bytes")
                partitions = [
                    Partition(dataset_id, i, (0, 0), int(partition_bytes))
                    for i in range(num_partitions)
                ]
            self.datasets[dataset_id] = DatasetEntry(dataset_id, partitions, data)
            return partitions

    # --- queries ---------------------------------------------------------------

    def submit_query(
        self,
        source: str,
        dataset_id: str,
        specs: dict[str, HistogramSpec],
        num_partitions: int | None = None,
        now: float = 0.0,
    ) -> str:
        """Advertise one subtask per partition; parse/type errors raise here."""
        with self._lock:
            entry = self.datasets.get(dataset_id)
            if entry is None:
                raise ProtocolError(f"unknown dataset {dataset_id!r}")
            if num_partitions is not None and num_partitions != len(entry.partitions):
                raise ProtocolError(
                    f"dataset {dataset_id!r} is partitioned {len(entry.partitions)} ways; "
                    f"queries must use all of them (got num_partitions={num_partitions})"
                )
            job = None
            if entry.data is not None:
                job = QueryJob.prepare(source, entry.data.schema, specs)
            qid = f"q{self._qcount:05d}"
            self._qcount += 1
            record = QueryRecord(
                query_id=qid,
                source=source,
                dataset_id=dataset_id,
                specs=dict(specs),
                num_subtasks=len(entry.partitions),
                submit_time=now,
                job=job,
            )
            self.queries[qid] = record
            for p in entry.partitions:
                self.board.advertise(
                    Subtask(
                        query_id=qid,
                        dataset_id=dataset_id,
                        partition_index=p.partition_index,
                        entry_range=p.entry_range,
                        nbytes=p.byte_size,
                    )
                )
            return qid

    def _query(self, query_id: str) -> QueryRecord:
        record = self.queries.get(query_id)
        if record is None:
            raise ProtocolError(f"unknown query {query_id!r}")
        return record

    # --- worker protocol ----------------------------------------------------------

    def pull_work(
        self,
        worker_id: str,
        cached_partitions: set[PartitionKey],
        allow_remote: bool,
        now: float,
        prefer_local: bool = True,
    ) -> Subtask | None:
        with self._lock:
            return self.board.claim(
                worker_id,
                cached_partitions,
                allow_remote=allow_remote,
                prefer_local=prefer_local,
                lease_until=now + self.lease_timeout,
            )

    def complete_subtask(
        self,
        worker_id: str,
        query_id: str,
        partition_index: int,
        attempt: int,
        partials: dict[str, Histogram],
        now: float,
    ) -> str:
        """Record a completion; returns 'accepted', 'duplicate', or 'cancelled'."""
        with self._lock:
            record = self._query(query_id)
            key: SubtaskKey = (query_id, partition_index)
            known = (
                key in self.board.done
                or key in self.board.in_progress
                or key in self.board.advertised
            )
            if not known and partition_index >= record.num_subtasks:
                raise ProtocolError(f"unknown subtask {key}")
            if record.cancelled:
                return "cancelled"
            if not self.board.accept_completion(key, worker_id, attempt, now):
                return "duplicate"
            self.results.put_partial(query_id, partition_index, partials)
            if len(self.results.partials_for(query_id)) == record.num_subtasks:
                record.complete_time = now
            return "accepted"

    def expire_leases(self, now: float) -> list[Subtask]:
        with self._lock:
            return self.board.expire_leases(now)

    def next_lease_expiry(self) -> float | None:
        with self._lock:
            return self.board.next_lease_expiry()

    # --- results --------------------------------------------------------------------

    def aggregate(self, query_id: str, now: float = 0.0) -> tuple[dict[str, Histogram], float]:
        """Merge whatever partials exist now; fraction_complete in [0, 1]."""
        with self._lock:
            record = self._query(query_id)
            partials = self.results.partials_for(query_id)
            merged = merge_maps(list(partials.values()), record.specs)
            fraction = len(partials) / record.num_subtasks if record.num_subtasks else 1.0
            self.results.put_snapshot(query_id, now, fraction, merged)
            return merged, fraction

    def cancel_query(self, query_id: str, now: float = 0.0) -> None:
        """Withdraw remaining subtasks; later completions are discarded."""
        with self._lock:
            record = self._query(query_id)
            if record.cancelled:
                return
            record.cancelled = True
            self.board.withdraw_query(query_id)
            self.results.drop_query(query_id)

    def is_complete(self, query_id: str) -> bool:
        with self._lock:
            return self._query(query_id).complete_time is not None

    def active_queries(self) -> list[str]:
        with self._lock:
            return [
                q.query_id
                for q in self.queries.values()
                if not q.cancelled and q.complete_time is None
            ]
