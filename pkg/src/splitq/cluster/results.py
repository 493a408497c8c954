"""Keyed store for partial histograms and aggregation snapshots.

In-memory stand-in for a document store: partials are keyed by
(query, partition) and written once (first accepted completion wins
upstream); snapshots record what the aggregator saw at each point in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..engine.histogram import Histogram


@dataclass(frozen=True)
class Snapshot:
    time: float
    fraction_complete: float
    num_fills: int


@dataclass
class ResultStore:
    _partials: dict[str, dict[int, dict[str, Histogram]]] = field(default_factory=dict)
    _snapshots: dict[str, list[Snapshot]] = field(default_factory=dict)

    def put_partial(self, query_id: str, partition_index: int, partials: dict[str, Histogram]) -> None:
        per_query = self._partials.setdefault(query_id, {})
        if partition_index in per_query:
            raise AssertionError(f"partial for {(query_id, partition_index)} stored twice")
        per_query[partition_index] = partials

    def partials_for(self, query_id: str) -> dict[int, dict[str, Histogram]]:
        return self._partials.get(query_id, {})

    def put_snapshot(self, query_id: str, time: float, fraction: float, merged: dict[str, Histogram]) -> None:
        fills = sum(h.num_fills for h in merged.values())
        self._snapshots.setdefault(query_id, []).append(Snapshot(time, fraction, fills))

    def snapshots_for(self, query_id: str) -> list[Snapshot]:
        return list(self._snapshots.get(query_id, []))

    def drop_query(self, query_id: str) -> None:
        self._partials.pop(query_id, None)
