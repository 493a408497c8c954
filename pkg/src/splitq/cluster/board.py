"""Task board: advertised subtasks, leases, and the completion log.

One subtask per (query, partition). Workers claim advertised subtasks;
claims carry a lease, and expired leases re-advertise the subtask with a
bumped attempt counter. The first accepted completion wins: a Done subtask
is never re-advertised and later completions are discarded, so exactly one
result per subtask ever enters an aggregate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ProtocolError

ADVERTISED = "advertised"
IN_PROGRESS = "in-progress"
DONE = "done"

SubtaskKey = tuple[str, int]  # (query_id, partition_index)
PartitionKey = tuple[str, int]  # (dataset_id, partition_index)


@dataclass
class Subtask:
    query_id: str
    dataset_id: str
    partition_index: int
    entry_range: tuple[int, int]
    nbytes: int
    state: str = ADVERTISED
    attempt: int = 0
    worker: str | None = None
    lease_expiry: float | None = None
    advert_seq: int = 0

    @property
    def key(self) -> SubtaskKey:
        return (self.query_id, self.partition_index)

    @property
    def partition(self) -> PartitionKey:
        return (self.dataset_id, self.partition_index)


@dataclass(frozen=True)
class CompletionRecord:
    worker: str
    attempt: int
    time: float


@dataclass
class TaskBoard:
    advertised: dict[SubtaskKey, Subtask] = field(default_factory=dict)
    in_progress: dict[SubtaskKey, Subtask] = field(default_factory=dict)
    done: set[SubtaskKey] = field(default_factory=set)
    completion_log: dict[SubtaskKey, CompletionRecord] = field(default_factory=dict)
    _seq: int = 0

    def advertise(self, subtask: Subtask) -> None:
        if subtask.key in self.done:
            raise ProtocolError(f"subtask {subtask.key} is done and cannot be re-advertised")
        subtask.state = ADVERTISED
        subtask.worker = None
        subtask.lease_expiry = None
        subtask.advert_seq = self._seq
        self._seq += 1
        self.advertised[subtask.key] = subtask

    def withdraw_query(self, query_id: str) -> list[Subtask]:
        """Remove a query's advertised subtasks and stop tracking its leases.

        In-progress work keeps running on its worker; discarding the lease
        here just stops re-advertisement, and the eventual completion is
        rejected upstream because the query is cancelled.
        """
        removed = [s for k, s in self.advertised.items() if k[0] == query_id]
        for s in removed:
            del self.advertised[s.key]
        for k in [k for k in self.in_progress if k[0] == query_id]:
            del self.in_progress[k]
        return removed

    def claim(
        self,
        worker: str,
        cached_partitions: set[PartitionKey],
        allow_remote: bool,
        prefer_local: bool,
        lease_until: float,
    ) -> Subtask | None:
        """Atomically claim one advertised subtask for ``worker``.

        Local work (partition already cached by the worker) is always taken
        first when prefer_local is set; a remote subtask is taken only when
        allow_remote is set and no local one exists.
        """
        choice: Subtask | None = None
        if prefer_local:
            for s in self.advertised.values():
                if s.partition in cached_partitions:
                    choice = s
                    break
        if choice is None and allow_remote:
            for s in self.advertised.values():
                choice = s
                break
        if choice is None:
            return None
        del self.advertised[choice.key]
        choice.state = IN_PROGRESS
        choice.worker = worker
        choice.lease_expiry = lease_until
        self.in_progress[choice.key] = choice
        return choice

    def accept_completion(self, key: SubtaskKey, worker: str, attempt: int, now: float) -> bool:
        """Mark a subtask done; False when a result was already accepted."""
        if key in self.done:
            return False
        self.in_progress.pop(key, None)
        self.advertised.pop(key, None)
        self.done.add(key)
        self.completion_log[key] = CompletionRecord(worker, attempt, now)
        return True

    def expire_leases(self, now: float) -> list[Subtask]:
        """Re-advertise every in-progress subtask whose lease has expired."""
        expired = [
            s for s in self.in_progress.values() if s.lease_expiry is not None and s.lease_expiry <= now
        ]
        for s in expired:
            del self.in_progress[s.key]
            s.attempt += 1
            self.advertise(s)
        return expired

    def next_lease_expiry(self) -> float | None:
        expiries = [s.lease_expiry for s in self.in_progress.values() if s.lease_expiry is not None]
        return min(expiries) if expiries else None
