"""Scheduler: coordinator, cache-affine work pulling, and the simulator."""

from .board import Subtask, TaskBoard
from .coordinator import Coordinator, DatasetEntry, QueryRecord
from .results import ResultStore, Snapshot
from .sim import (
    PAYLOADS,
    POLICIES,
    ClusterConfig,
    QueryArrival,
    RegisteredData,
    SimMetrics,
    Simulation,
    simulate,
)
from .workers import WorkerCache

__all__ = [
    "ClusterConfig",
    "Coordinator",
    "DatasetEntry",
    "PAYLOADS",
    "POLICIES",
    "QueryArrival",
    "QueryRecord",
    "RegisteredData",
    "ResultStore",
    "SimMetrics",
    "Simulation",
    "Snapshot",
    "Subtask",
    "TaskBoard",
    "WorkerCache",
    "simulate",
]
