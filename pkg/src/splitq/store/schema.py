"""Schema tree for nested list/record event data.

A dataset is always a list of events, so every schema root is a list node.
Nodes are addressed by dotted string paths: descending into a list element
appends the step ``item``, descending into a record field appends the field
name. The root has the empty path. These paths key the flat arrays of a
:class:`~splitq.store.columnar.ColumnarDataset` and name its on-disk files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SchemaError

PATH_SEP = "."
ITEM_STEP = "item"

FLOAT64 = "float64"
INT64 = "int64"
CHAR = "char"

_PRIMITIVE_KINDS = (FLOAT64, INT64, CHAR)
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def join_path(path: str, step: str) -> str:
    return step if path == "" else path + PATH_SEP + step


class SchemaNode:
    """Base class for schema tree nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Primitive(SchemaNode):
    kind: str

    def __post_init__(self):
        if self.kind not in _PRIMITIVE_KINDS:
            raise SchemaError(f"unknown primitive kind {self.kind!r}")


@dataclass(frozen=True)
class ListNode(SchemaNode):
    item: SchemaNode


@dataclass(frozen=True)
class RecordNode(SchemaNode):
    fields: tuple[tuple[str, SchemaNode], ...]

    def __post_init__(self):
        names = [n for n, _ in self.fields]
        if not names:
            raise SchemaError("record must have at least one field")
        for n in names:
            if not _NAME_RE.match(n):
                raise SchemaError(f"record field name {n!r} is not a valid identifier")
        if len(set(names)) != len(names):
            raise SchemaError("record field names must be unique")

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.fields)

    def field(self, name: str) -> SchemaNode:
        for n, node in self.fields:
            if n == name:
                return node
        raise SchemaError(f"record has no field {name!r}")


def record(fields) -> RecordNode:
    """Build a RecordNode from a dict or an iterable of (name, node) pairs."""
    if isinstance(fields, dict):
        fields = fields.items()
    return RecordNode(tuple(fields))


def list_of(item: SchemaNode) -> ListNode:
    return ListNode(item)


@dataclass(frozen=True)
class Schema:
    """A validated schema whose root is a list of events."""

    root: SchemaNode

    def __post_init__(self):
        if not isinstance(self.root, ListNode):
            raise SchemaError("schema root must be a list (a dataset is a list of events)")
        # Constructing the node dataclasses already validates records, so a
        # full walk here only guards against non-node payloads.
        for _, node in self.walk():
            if not isinstance(node, (Primitive, ListNode, RecordNode)):
                raise SchemaError(f"not a schema node: {node!r}")

    def walk(self):
        """Yield (path, node) pairs in preorder, root first."""
        stack = [("", self.root)]
        while stack:
            path, node = stack.pop()
            yield path, node
            if isinstance(node, ListNode):
                stack.append((join_path(path, ITEM_STEP), node.item))
            elif isinstance(node, RecordNode):
                for name, child in reversed(node.fields):
                    stack.append((join_path(path, name), child))

    def node_at(self, path: str) -> SchemaNode:
        node = self.root
        if path == "":
            return node
        for step in path.split(PATH_SEP):
            if isinstance(node, ListNode):
                if step != ITEM_STEP:
                    raise SchemaError(f"expected step {ITEM_STEP!r}, got {step!r}", path)
                node = node.item
            elif isinstance(node, RecordNode):
                node = node.field(step)
            else:
                raise SchemaError("path descends below a primitive", path)
        return node

    def offsets_paths(self) -> list[str]:
        """Paths of all list nodes that carry an offsets array (every list but the root)."""
        return [p for p, n in self.walk() if isinstance(n, ListNode) and p != ""]

    def attribute_paths(self) -> list[tuple[str, str]]:
        """(path, kind) for every primitive node."""
        return [(p, n.kind) for p, n in self.walk() if isinstance(n, Primitive)]

    def to_json(self):
        return {"version": 1, "root": _node_to_json(self.root)}

    @classmethod
    def from_json(cls, obj) -> "Schema":
        if not isinstance(obj, dict) or "root" not in obj:
            raise SchemaError("schema JSON must be an object with a 'root' key")
        return cls(_node_from_json(obj["root"]))


def _node_to_json(node: SchemaNode):
    if isinstance(node, Primitive):
        return {"kind": node.kind}
    if isinstance(node, ListNode):
        return {"kind": "list", "item": _node_to_json(node.item)}
    if isinstance(node, RecordNode):
        return {
            "kind": "record",
            "fields": [{"name": n, "type": _node_to_json(c)} for n, c in node.fields],
        }
    raise SchemaError(f"not a schema node: {node!r}")


def _node_from_json(obj) -> SchemaNode:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError(f"bad schema node JSON: {obj!r}")
    kind = obj["kind"]
    if kind in _PRIMITIVE_KINDS:
        return Primitive(kind)
    if kind == "list":
        return ListNode(_node_from_json(obj["item"]))
    if kind == "record":
        try:
            fields = tuple((f["name"], _node_from_json(f["type"])) for f in obj["fields"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad record fields JSON: {exc}") from exc
        return RecordNode(fields)
    raise SchemaError(f"unknown schema node kind {kind!r}")
