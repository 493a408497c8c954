"""Query compilation: type inference, lowering to flat loops, flattening."""

from .flatten import flatten
from .infer import DATASET_NAME, TypedQuery, infer_types
from .ir import (
    AssignIR,
    BinIR,
    CallIR,
    ConstIR,
    FillIR,
    FlatLoopIR,
    FlatProgram,
    ForOffsetsIR,
    ForRangeIR,
    IfIR,
    LoadIR,
    NotIR,
    NumEntriesIR,
    OffsetIR,
    VarIR,
    emit_text,
)
from .transform import NONE_SENTINEL, transform
from .types import (
    BOOL,
    F64,
    I64,
    NONE,
    DatasetType,
    ListType,
    OptionalRecordRefType,
    RecordRefType,
    ScalarType,
    is_numeric,
    join_types,
)

__all__ = [
    "AssignIR",
    "BinIR",
    "BOOL",
    "CallIR",
    "ConstIR",
    "DATASET_NAME",
    "DatasetType",
    "F64",
    "FillIR",
    "FlatLoopIR",
    "FlatProgram",
    "ForOffsetsIR",
    "ForRangeIR",
    "I64",
    "IfIR",
    "ListType",
    "LoadIR",
    "NONE",
    "NONE_SENTINEL",
    "NotIR",
    "NumEntriesIR",
    "OffsetIR",
    "OptionalRecordRefType",
    "RecordRefType",
    "ScalarType",
    "TypedQuery",
    "VarIR",
    "emit_text",
    "flatten",
    "infer_types",
    "is_numeric",
    "join_types",
    "transform",
]
