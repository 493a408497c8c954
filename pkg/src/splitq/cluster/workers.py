"""Worker-side partition cache: byte-budgeted LRU.

A partition is marked cached only once its load completes; eviction removes
least-recently-used partitions until the new one fits. Touching a partition
on every execution keeps hot partitions resident.
"""

from __future__ import annotations

from collections import OrderedDict

from .board import PartitionKey


class WorkerCache:
    def __init__(self, capacity_bytes: int):
        self.capacity_bytes = int(capacity_bytes)
        self._entries: OrderedDict[PartitionKey, int] = OrderedDict()
        self.used_bytes = 0

    def __contains__(self, partition: PartitionKey) -> bool:
        return partition in self._entries

    def keys(self) -> set[PartitionKey]:
        return set(self._entries)

    def touch(self, partition: PartitionKey) -> None:
        self._entries.move_to_end(partition)

    def add(self, partition: PartitionKey, nbytes: int) -> list[PartitionKey]:
        """Insert a loaded partition, returning what was evicted to make room."""
        evicted: list[PartitionKey] = []
        if partition in self._entries:
            self.touch(partition)
            return evicted
        nbytes = int(nbytes)
        while self._entries and self.used_bytes + nbytes > self.capacity_bytes:
            old, old_bytes = self._entries.popitem(last=False)
            self.used_bytes -= old_bytes
            evicted.append(old)
        self._entries[partition] = nbytes
        self.used_bytes += nbytes
        return evicted

    def clear(self) -> None:
        self._entries.clear()
        self.used_bytes = 0
