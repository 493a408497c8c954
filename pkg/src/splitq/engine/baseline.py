"""Baseline object interpreter: the deliberately slow reference path.

Each event is materialized as a tree of plain Python objects (dicts and
lists), then the AST is interpreted over those objects. This is the engine
the flat path is measured against, and it is the independent correctness
oracle: its fill sequence must match the flat engines bit for bit.

Arithmetic semantics shared with the flat kernels: division by zero and math
domain errors (sqrt of a negative, log of a non-positive) produce a quiet
NaN rather than raising, so malformed arithmetic shows up as histogram
overflow instead of aborting a distributed job.
"""

from __future__ import annotations

import math

from ..errors import ExecutionError
from ..qlang.astnodes import (
    Assign,
    AttrAccess,
    BinOp,
    BoolOp,
    Fill,
    ForEach,
    ForRange,
    If,
    IndexExpr,
    IsNone,
    IsNotNone,
    LenExpr,
    MathCall,
    Name,
    NoneLit,
    NotOp,
    NumLit,
)
from ..compiler.infer import DATASET_NAME, TypedQuery
from ..store.columnar import ColumnarDataset, materialize_entry
from .histogram import Histogram, HistogramSpec

NAN = float("nan")


def resolve_fill_names(fill_names, specs: dict[str, HistogramSpec]) -> dict[str | None, str]:
    """Map each Fill label (None = sole histogram) to a declared spec name."""
    mapping: dict[str | None, str] = {}
    used: set[str] = set()
    for label in fill_names:
        if label is None:
            if len(specs) != 1:
                raise ExecutionError(
                    "fill_histogram(value) without a label needs exactly one "
                    f"declared histogram, got {len(specs)}"
                )
            name = next(iter(specs))
        else:
            if label not in specs:
                raise ExecutionError(f"fill references undeclared histogram {label!r}")
            name = label
        mapping[label] = name
        used.add(name)
    if used != set(specs):
        unused = sorted(set(specs) - used)
        raise ExecutionError(f"declared histograms never filled: {unused}")
    return mapping


def _div(a, b):
    b = float(b)
    if b == 0.0:
        return NAN
    return float(a) / b


def _sqrt(x):
    x = float(x)
    if x < 0.0:
        return NAN
    return math.sqrt(x)


def _log(x):
    x = float(x)
    if x <= 0.0:
        return NAN
    return math.log(x)


MATH_IMPL = {
    "sqrt": _sqrt,
    "cosh": math.cosh,
    "cos": math.cos,
    "sin": math.sin,
    "exp": math.exp,
    "log": _log,
    "abs": abs,
}


class _DatasetIter:
    """Sentinel bound to the reserved dataset name; materializes per event."""

    def __init__(self, dataset: ColumnarDataset):
        self.dataset = dataset

    def __iter__(self):
        for i in range(self.dataset.num_entries):
            yield materialize_entry(self.dataset, i)


def run_baseline(
    typed: TypedQuery,
    dataset: ColumnarDataset,
    specs: dict[str, HistogramSpec],
    record_fills: bool = False,
):
    """Interpret the query over materialized events.

    Returns (histograms, fills) where fills is a list of (spec_name, value)
    in fill order when record_fills is set, else None.
    """
    if typed.schema != dataset.schema:
        raise ExecutionError("query was type-checked against a different schema")
    binding = resolve_fill_names(typed.ast.fill_names(), specs)
    hists = {name: Histogram(spec) for name, spec in specs.items()}
    fills: list[tuple[str, float]] | None = [] if record_fills else None

    env: dict[str, object] = {DATASET_NAME: _DatasetIter(dataset)}

    def ev(e):
        if isinstance(e, Name):
            return env[e.id]
        if isinstance(e, NumLit):
            return e.value
        if isinstance(e, AttrAccess):
            return ev(e.obj)[e.field_name]
        if isinstance(e, BinOp):
            return _binop(e)
        if isinstance(e, MathCall):
            return MATH_IMPL[e.func](ev(e.arg))
        if isinstance(e, LenExpr):
            return len(ev(e.arg))
        if isinstance(e, IndexExpr):
            return ev(e.obj)[ev(e.index)]
        if isinstance(e, BoolOp):
            if e.op == "and":
                return ev(e.left) and ev(e.right)
            return ev(e.left) or ev(e.right)
        if isinstance(e, NotOp):
            return not ev(e.operand)
        if isinstance(e, IsNone):
            return ev(e.operand) is None
        if isinstance(e, IsNotNone):
            return ev(e.operand) is not None
        if isinstance(e, NoneLit):
            return None
        raise ExecutionError(f"cannot evaluate {type(e).__name__}")

    def _binop(e):
        a = ev(e.left)
        b = ev(e.right)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return _div(a, b)
        if op == ">":
            return a > b
        if op == "<":
            return a < b
        if op == ">=":
            return a >= b
        if op == "<=":
            return a <= b
        if op == "==":
            return a == b
        return a != b

    def run(stmts):
        for s in stmts:
            if isinstance(s, Assign):
                env[s.target] = ev(s.value)
            elif isinstance(s, Fill):
                v = float(ev(s.value))
                name = binding[s.hist]
                hists[name].fill(v)
                if fills is not None:
                    fills.append((name, v))
            elif isinstance(s, If):
                if ev(s.cond):
                    run(s.body)
                else:
                    run(s.orelse)
            elif isinstance(s, ForEach):
                for item in ev(s.iterable):
                    env[s.var] = item
                    run(s.body)
            elif isinstance(s, ForRange):
                for i in range(ev(s.start), ev(s.stop)):
                    env[s.var] = i
                    run(s.body)
            else:
                raise ExecutionError(f"cannot execute {type(s).__name__}")

    run(typed.ast.statements)
    return hists, fills
