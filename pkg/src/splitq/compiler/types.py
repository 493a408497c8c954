"""Types propagated through query code during inference.

Structured values are typed by the schema path of their node: a list value
is ``ListType(path)``, a record reference ``RecordRefType(path)``. A record
variable that may also hold None is ``OptionalRecordRefType(path)``. Scalars
are float64, int64, or bool; ``NONE`` types the literal None itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..store.schema import Schema


@dataclass(frozen=True)
class DatasetType:
    schema: Schema

    def __str__(self) -> str:
        return "dataset"


@dataclass(frozen=True)
class ListType:
    path: str

    def __str__(self) -> str:
        return f"list({self.path})"


@dataclass(frozen=True)
class RecordRefType:
    path: str

    def __str__(self) -> str:
        return f"record({self.path})"


@dataclass(frozen=True)
class OptionalRecordRefType:
    path: str

    def __str__(self) -> str:
        return f"optional record({self.path})"


@dataclass(frozen=True)
class ScalarType:
    kind: str  # f64 | i64 | bool | none

    def __str__(self) -> str:
        return {"f64": "float64", "i64": "int64", "bool": "bool", "none": "None"}[self.kind]


F64 = ScalarType("f64")
I64 = ScalarType("i64")
BOOL = ScalarType("bool")
NONE = ScalarType("none")


def is_numeric(t) -> bool:
    return t is F64 or t is I64


def join_types(a, b):
    """Least upper bound of two variable types; None when incompatible.

    None merged with a record reference (in either order, possibly already
    optional) widens to an optional reference. Everything else must match
    exactly; numeric kinds deliberately do not merge, so a variable keeps one
    register type for its whole life.
    """
    if a == b:
        return a
    pair = {type(a), type(b)}
    if pair == {ScalarType, RecordRefType} or pair == {ScalarType, OptionalRecordRefType}:
        scalar = a if isinstance(a, ScalarType) else b
        ref = b if isinstance(a, ScalarType) else a
        if scalar is NONE:
            return OptionalRecordRefType(ref.path)
        return None
    if pair == {RecordRefType, OptionalRecordRefType}:
        if a.path == b.path:
            return OptionalRecordRefType(a.path)
        return None
    return None
