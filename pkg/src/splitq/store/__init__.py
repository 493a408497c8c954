"""Columnar store: schema, exploded arrays, disk format, event generator."""

from .columnar import (
    ColumnarDataset,
    Partition,
    Violation,
    assert_valid,
    concat_datasets,
    explode,
    make_partitions,
    materialize,
    materialize_entry,
    partition_byte_size,
    partition_ranges,
    slice_entries,
    validate,
)
from .generator import GeneratorParams, generate_events, muon_schema
from .io import read_dataset, read_manifest, write_dataset
from .schema import (
    CHAR,
    FLOAT64,
    INT64,
    ITEM_STEP,
    ListNode,
    Primitive,
    RecordNode,
    Schema,
    SchemaNode,
    join_path,
    list_of,
    record,
)

__all__ = [
    "CHAR",
    "ColumnarDataset",
    "FLOAT64",
    "GeneratorParams",
    "INT64",
    "ITEM_STEP",
    "ListNode",
    "Partition",
    "Primitive",
    "RecordNode",
    "Schema",
    "SchemaNode",
    "Violation",
    "assert_valid",
    "concat_datasets",
    "explode",
    "generate_events",
    "join_path",
    "list_of",
    "make_partitions",
    "materialize",
    "materialize_entry",
    "muon_schema",
    "partition_byte_size",
    "partition_ranges",
    "read_dataset",
    "read_manifest",
    "record",
    "slice_entries",
    "validate",
    "write_dataset",
]
