"""Exploded columnar encoding of nested values.

A nested value (lists of records of lists of ...) is stored as flat arrays:

* every list node below the root owns an *offsets* array: for a node with N
  instances the array has N+1 non-decreasing int64 entries starting at 0, and
  instance j spans child indices ``[offsets[j], offsets[j+1])``;
* every primitive node owns an *attribute* array holding all of its values
  across the whole dataset, in entry order;
* the root list is described only by ``num_entries``.

``explode`` and ``materialize`` convert between logical Python values (lists,
dicts, floats, ints, one-char strings) and this representation and are exact
inverses of each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaError, ValidationError
from .schema import (
    CHAR,
    FLOAT64,
    INT64,
    ITEM_STEP,
    ListNode,
    Primitive,
    RecordNode,
    Schema,
    join_path,
)

_NUMPY_DTYPE = {FLOAT64: np.float64, INT64: np.int64, CHAR: np.uint8}


@dataclass(eq=False)
class ColumnarDataset:
    """Immutable columnar form of a nested dataset.

    ``offsets`` maps list-node paths to int64 arrays, ``attributes`` maps
    primitive-node paths to value arrays. Arrays are marked read-only so the
    dataset can be shared freely across concurrent readers.
    """

    schema: Schema
    offsets: dict[str, np.ndarray]
    attributes: dict[str, np.ndarray]
    num_entries: int

    def __post_init__(self):
        self.num_entries = int(self.num_entries)
        self.offsets = {p: np.ascontiguousarray(a, dtype=np.int64) for p, a in self.offsets.items()}
        self.attributes = {
            p: np.ascontiguousarray(a) for p, a in self.attributes.items()
        }
        for arr in self.offsets.values():
            arr.setflags(write=False)
        for arr in self.attributes.values():
            arr.setflags(write=False)

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in self.offsets.values()) + sum(
            a.nbytes for a in self.attributes.values()
        )

    def equals(self, other: "ColumnarDataset") -> bool:
        """Array-for-array equality (schema, entry count, and every array)."""
        if self.schema != other.schema or self.num_entries != other.num_entries:
            return False
        if set(self.offsets) != set(other.offsets) or set(self.attributes) != set(other.attributes):
            return False
        for p, a in self.offsets.items():
            if not np.array_equal(a, other.offsets[p]):
                return False
        for p, a in self.attributes.items():
            b = other.attributes[p]
            if a.dtype != b.dtype or not np.array_equal(a, b, equal_nan=True):
                return False
        return True


@dataclass(frozen=True)
class Violation:
    """One failed dataset invariant, locating the array and rule that failed."""

    path: str
    rule: str
    index: int | None = None
    message: str = ""

    def __str__(self) -> str:
        where = f"{self.path or '<root>'}"
        if self.index is not None:
            where += f"[{self.index}]"
        return f"{where}: {self.rule}" + (f" ({self.message})" if self.message else "")


@dataclass(frozen=True)
class Partition:
    """A contiguous range of root entries of a registered dataset."""

    dataset_id: str
    partition_index: int
    entry_range: tuple[int, int]
    byte_size: int

    @property
    def num_entries(self) -> int:
        return self.entry_range[1] - self.entry_range[0]


def explode(value, schema: Schema) -> ColumnarDataset:
    """Encode a logical nested value into flat offsets/attribute arrays.

    Raises SchemaError naming the offending path if the value does not
    conform to the schema.
    """
    off: dict[str, list[int]] = {p: [0] for p in schema.offsets_paths()}
    att: dict[str, list] = {p: [] for p, _ in schema.attribute_paths()}

    def put(node, path, v):
        if isinstance(node, ListNode):
            if not isinstance(v, list):
                raise SchemaError(f"expected a list, got {type(v).__name__}", path)
            if path != "":
                off[path].append(off[path][-1] + len(v))
            child = join_path(path, ITEM_STEP)
            for x in v:
                put(node.item, child, x)
        elif isinstance(node, RecordNode):
            if not isinstance(v, dict):
                raise SchemaError(f"expected a record (dict), got {type(v).__name__}", path)
            if set(v) != set(node.field_names):
                missing = set(node.field_names) - set(v)
                extra = set(v) - set(node.field_names)
                raise SchemaError(
                    f"record fields mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}",
                    path,
                )
            for name, child in node.fields:
                put(child, join_path(path, name), v[name])
        else:
            att[path].append(_check_primitive(node.kind, path, v))

    if not isinstance(value, list):
        raise SchemaError("dataset value must be a list of events", "")
    num_entries = len(value)
    child = join_path("", ITEM_STEP)
    for x in value:
        put(schema.root.item, child, x)

    offsets = {p: np.asarray(v, dtype=np.int64) for p, v in off.items()}
    attributes = {
        p: np.asarray(att[p], dtype=_NUMPY_DTYPE[kind]) for p, kind in schema.attribute_paths()
    }
    return ColumnarDataset(schema, offsets, attributes, num_entries)


def _check_primitive(kind, path, v):
    if kind == FLOAT64:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"expected float64, got {type(v).__name__}", path)
        return float(v)
    if kind == INT64:
        if isinstance(v, bool) or not isinstance(v, int):
            raise SchemaError(f"expected int64, got {type(v).__name__}", path)
        if not -(2**63) <= v < 2**63:
            raise SchemaError(f"integer {v} out of int64 range", path)
        return v
    if isinstance(v, str) and len(v) == 1 and ord(v) < 256:
        return ord(v)
    raise SchemaError(f"expected a one-character string (latin-1), got {v!r}", path)


def materialize_entry(dataset: ColumnarDataset, i: int):
    """Build the logical value of root entry ``i`` as plain Python objects."""
    schema = dataset.schema
    off = dataset.offsets
    att = dataset.attributes

    def build(node, path, idx):
        if isinstance(node, Primitive):
            v = att[path][idx]
            if node.kind == FLOAT64:
                return float(v)
            if node.kind == INT64:
                return int(v)
            return chr(v)
        if isinstance(node, RecordNode):
            return {name: build(child, join_path(path, name), idx) for name, child in node.fields}
        o = off[path]
        child = join_path(path, ITEM_STEP)
        return [build(node.item, child, j) for j in range(o[idx], o[idx + 1])]

    return build(schema.root.item, ITEM_STEP, i)


def materialize(dataset: ColumnarDataset) -> list:
    """Inverse of :func:`explode`. Validates first; raises ValidationError."""
    assert_valid(dataset)
    return [materialize_entry(dataset, i) for i in range(dataset.num_entries)]


def validate(dataset: ColumnarDataset) -> list[Violation]:
    """Check all structural invariants; returns violations instead of raising."""
    out: list[Violation] = []
    schema = dataset.schema

    if dataset.num_entries < 0:
        out.append(Violation("", "num_entries must be non-negative"))

    expected_off = set(schema.offsets_paths())
    expected_att = {p for p, _ in schema.attribute_paths()}
    for p in sorted(expected_off - set(dataset.offsets)):
        out.append(Violation(p, "missing offsets array"))
    for p in sorted(set(dataset.offsets) - expected_off):
        out.append(Violation(p, "offsets array not in schema"))
    for p in sorted(expected_att - set(dataset.attributes)):
        out.append(Violation(p, "missing attribute array"))
    for p in sorted(set(dataset.attributes) - expected_att):
        out.append(Violation(p, "attribute array not in schema"))

    kinds = dict(schema.attribute_paths())
    for p, arr in dataset.attributes.items():
        want = _NUMPY_DTYPE.get(kinds.get(p))
        if want is not None and arr.dtype != np.dtype(want):
            out.append(Violation(p, "wrong dtype", message=f"{arr.dtype} != {np.dtype(want)}"))

    # Walk the tree propagating expected instance counts. Where an offsets
    # array is malformed we still descend using its actual terminal value so
    # one mistake does not cascade into spurious child violations.
    def walk(node, path, count):
        if isinstance(node, Primitive):
            arr = dataset.attributes.get(path)
            if arr is not None and len(arr) != count:
                out.append(
                    Violation(path, "attribute length disagrees with parent count",
                              message=f"len {len(arr)} != {count}")
                )
            return
        if isinstance(node, RecordNode):
            for name, child in node.fields:
                walk(child, join_path(path, name), count)
            return
        # list node
        if path == "":
            walk(node.item, join_path(path, ITEM_STEP), count)
            return
        arr = dataset.offsets.get(path)
        if arr is None:
            return
        if len(arr) != count + 1:
            out.append(
                Violation(path, "offsets length must be instance count + 1",
                          message=f"len {len(arr)} != {count + 1}")
            )
        if len(arr) == 0:
            return
        if arr[0] != 0:
            out.append(Violation(path, "offsets must start at 0", index=0))
        if len(arr) > 1:
            steps = np.diff(arr)
            bad = np.where(steps < 0)[0]
            if bad.size:
                out.append(Violation(path, "offsets must be non-decreasing", index=int(bad[0]) + 1))
        child_count = int(arr[-1])
        expected_child = _child_count(dataset, node.item, join_path(path, ITEM_STEP))
        if expected_child is not None and child_count != expected_child:
            out.append(
                Violation(path, "terminal offset disagrees with child element count",
                          index=len(arr) - 1, message=f"{child_count} != {expected_child}")
            )
        walk(node.item, join_path(path, ITEM_STEP), child_count)

    walk(schema.root, "", dataset.num_entries)
    return out


def _child_count(dataset, node, path):
    """Actual element count of the level below a list, if its arrays exist."""
    if isinstance(node, Primitive):
        arr = dataset.attributes.get(path)
        return None if arr is None else len(arr)
    if isinstance(node, ListNode):
        arr = dataset.offsets.get(path)
        return None if arr is None else len(arr) - 1
    for name, child in node.fields:
        n = _child_count(dataset, child, join_path(path, name))
        if n is not None:
            return n
    return None


def assert_valid(dataset: ColumnarDataset) -> None:
    violations = validate(dataset)
    if violations:
        raise ValidationError(violations)


def slice_entries(dataset: ColumnarDataset, start: int, stop: int) -> ColumnarDataset:
    """Dataset holding root entries [start, stop), offsets re-based to 0."""
    if not 0 <= start <= stop <= dataset.num_entries:
        raise IndexError(
            f"entry range [{start}, {stop}) out of bounds for {dataset.num_entries} entries"
        )
    offsets: dict[str, np.ndarray] = {}
    attributes: dict[str, np.ndarray] = {}

    def walk(node, path, lo, hi):
        if isinstance(node, Primitive):
            attributes[path] = dataset.attributes[path][lo:hi].copy()
            return
        if isinstance(node, RecordNode):
            for name, child in node.fields:
                walk(child, join_path(path, name), lo, hi)
            return
        arr = dataset.offsets[path]
        offsets[path] = (arr[lo : hi + 1] - arr[lo]).astype(np.int64)
        walk(node.item, join_path(path, ITEM_STEP), int(arr[lo]), int(arr[hi]))

    root_item = dataset.schema.root.item
    walk(root_item, ITEM_STEP, start, stop)
    return ColumnarDataset(dataset.schema, offsets, attributes, stop - start)


def concat_datasets(datasets: list[ColumnarDataset]) -> ColumnarDataset:
    """Concatenate datasets of identical schema in order."""
    if not datasets:
        raise ValueError("need at least one dataset")
    schema = datasets[0].schema
    for d in datasets[1:]:
        if d.schema != schema:
            raise SchemaError("cannot concatenate datasets with different schemas")
    offsets: dict[str, np.ndarray] = {}
    for p in schema.offsets_paths():
        parts = [np.asarray([0], dtype=np.int64)]
        base = 0
        for d in datasets:
            arr = d.offsets[p]
            parts.append(arr[1:] + base)
            base += int(arr[-1])
        offsets[p] = np.concatenate(parts)
    attributes = {
        p: np.concatenate([d.attributes[p] for d in datasets])
        for p, _ in schema.attribute_paths()
    }
    return ColumnarDataset(schema, offsets, attributes, sum(d.num_entries for d in datasets))


def partition_byte_size(dataset: ColumnarDataset, start: int, stop: int) -> int:
    """Byte size of the arrays covering entries [start, stop), without slicing."""
    total = 0

    def walk(node, path, lo, hi):
        nonlocal total
        if isinstance(node, Primitive):
            total += (hi - lo) * dataset.attributes[path].itemsize
            return
        if isinstance(node, RecordNode):
            for name, child in node.fields:
                walk(child, join_path(path, name), lo, hi)
            return
        arr = dataset.offsets[path]
        total += (hi - lo + 1) * arr.itemsize
        walk(node.item, join_path(path, ITEM_STEP), int(arr[lo]), int(arr[hi]))

    walk(dataset.schema.root.item, ITEM_STEP, start, stop)
    return total


def partition_ranges(num_entries: int, num_partitions: int) -> list[tuple[int, int]]:
    """Split [0, num_entries) into contiguous near-equal ranges."""
    if num_partitions < 1:
        raise ValueError("num_partitions must be >= 1")
    base, rem = divmod(num_entries, num_partitions)
    ranges = []
    start = 0
    for i in range(num_partitions):
        n = base + (1 if i < rem else 0)
        ranges.append((start, start + n))
        start += n
    return ranges


def make_partitions(dataset: ColumnarDataset, dataset_id: str, num_partitions: int) -> list[Partition]:
    """Partition metadata (ranges and byte sizes) for a dataset."""
    return [
        Partition(dataset_id, i, (lo, hi), partition_byte_size(dataset, lo, hi))
        for i, (lo, hi) in enumerate(partition_ranges(dataset.num_entries, num_partitions))
    ]
