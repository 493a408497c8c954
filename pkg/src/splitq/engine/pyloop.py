"""Pure-Python fallback executor for flat programs.

Instead of walking the IR tree per event, the program is rendered once into
a plain Python function (loops stay loops, expressions stay expressions) and
executed with the dataset arrays converted to Python lists. This keeps the
fallback a straight-line interpreter-friendly path while avoiding per-node
dispatch in the hot loop. Arithmetic matches the compiled VM bit for bit:
floats are IEEE doubles either way, division by zero and sqrt/log domain
errors produce the canonical quiet NaN, and histogram binning uses the same
formula.
"""

from __future__ import annotations

import math

from ..compiler.ir import (
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
)
from ..errors import ExecutionError
from .baseline import NAN, _div, _log, _sqrt

_GLOBALS = {
    "_div": _div,
    "_sqrt": _sqrt,
    "_log": _log,
    "_cosh": math.cosh,
    "_cos": math.cos,
    "_sin": math.sin,
    "_exp": math.exp,
    "_NAN": NAN,
}

_CALL_TEXT = {
    "sqrt": "_sqrt",
    "cosh": "_cosh",
    "cos": "_cos",
    "sin": "_sin",
    "exp": "_exp",
    "log": "_log",
    "abs": "abs",
    "i2f": "float",
}

_PREC = {
    "or": 1,
    "and": 2,
    "==": 4,
    "!=": 4,
    ">": 4,
    "<": 4,
    ">=": 4,
    "<=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
}


class _Codegen:
    def __init__(self, program: FlatProgram, hist_specs, hist_ids, record: bool):
        self.program = program
        self.hist_ids = hist_ids
        self.record = record
        self.lines: list[str] = []
        self.offsets_args: dict[str, str] = {}
        self.values_args: dict[str, str] = {}
        self.counter = 0
        self.specs = hist_specs  # list of HistogramSpec in hist-id order

    def temp(self, prefix: str) -> str:
        self.counter += 1
        return f"_{prefix}{self.counter}"

    def out(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)

    def array_arg(self, table: dict, key: str, prefix: str) -> str:
        if key not in table:
            table[key] = f"_{prefix}{len(table)}"
        return table[key]

    # expressions

    def expr(self, e, min_prec: int = 0) -> str:
        if isinstance(e, VarIR):
            return f"v_{e.name}"
        if isinstance(e, ConstIR):
            return repr(e.value)
        if isinstance(e, NumEntriesIR):
            return "_NE"
        if isinstance(e, OffsetIR):
            arr = self.array_arg(self.offsets_args, e.array, "o")
            return f"{arr}[{self.expr(e.index)}]"
        if isinstance(e, LoadIR):
            arr = self.array_arg(self.values_args, e.array, "a")
            return f"{arr}[{self.expr(e.index)}]"
        if isinstance(e, NotIR):
            text = f"not {self.expr(e.operand, 3)}"
            return f"({text})" if min_prec > 3 else text
        if isinstance(e, CallIR):
            if e.func == "i2f" and e.arg.dtype == "i64" and isinstance(e.arg, ConstIR):
                return repr(float(e.arg.value))
            return f"{_CALL_TEXT[e.func]}({self.expr(e.arg)})"
        if isinstance(e, BinIR):
            if e.op == "/":
                return f"_div({self.expr(e.left)}, {self.expr(e.right)})"
            p = _PREC[e.op]
            text = f"{self.expr(e.left, p)} {e.op} {self.expr(e.right, p + 1)}"
            return f"({text})" if p < min_prec else text
        raise ExecutionError(f"cannot generate code for {type(e).__name__}")

    # statements

    def stmts(self, statements, depth: int) -> None:
        for s in statements:
            self.stmt(s, depth)

    def stmt(self, s, depth: int) -> None:
        if isinstance(s, AssignIR):
            self.out(depth, f"v_{s.var} = {self.expr(s.value)}")
            return
        if isinstance(s, FillIR):
            h = self.hist_ids[s.hist]
            val = self.expr(s.value)
            if s.value.dtype == "i64":
                val = f"float({val})"
            v = self.temp("v")
            spec = self.specs[h]
            self.out(depth, f"{v} = {val}")
            self.out(depth, f"if {v} != {v}:")
            self.out(depth + 1, f"_ov{h} += 1")
            self.out(depth, f"elif {v} < {spec.lo!r}:")
            self.out(depth + 1, f"_un{h} += 1")
            self.out(depth, f"elif {v} >= {spec.hi!r}:")
            self.out(depth + 1, f"_ov{h} += 1")
            self.out(depth, "else:")
            self.out(depth + 1, f"_i = int(({v} - {spec.lo!r}) / {spec.width!r})")
            self.out(depth + 1, f"if _i >= {spec.num_bins}: _i = {spec.num_bins - 1}")
            self.out(depth + 1, f"_ct{h}[_i] += 1")
            self.out(depth, f"_nf{h} += 1")
            if self.record:
                self.out(depth, f"_fills.append(({h}, {v}))")
            return
        if isinstance(s, IfIR):
            self.out(depth, f"if {self.expr(s.cond)}:")
            self.stmts(s.then, depth + 1)
            if s.orelse:
                self.out(depth, "else:")
                self.stmts(s.orelse, depth + 1)
            return
        if isinstance(s, ForOffsetsIR):
            v = f"v_{s.var}"
            if s.offsets is None:
                self.out(depth, f"for {v} in range(_NE):")
            else:
                arr = self.array_arg(self.offsets_args, s.offsets, "o")
                parent = self.expr(s.parent)
                b = self.temp("b")
                self.out(depth, f"{b} = {parent}")
                self.out(depth, f"for {v} in range({arr}[{b}], {arr}[{b} + 1]):")
            self.stmts(s.body, depth + 1)
            return
        if isinstance(s, ForRangeIR):
            v = f"v_{s.var}"
            self.out(depth, f"for {v} in range({self.expr(s.start)}, {self.expr(s.stop)}):")
            self.stmts(s.body, depth + 1)
            return
        if isinstance(s, FlatLoopIR):
            v = f"v_{s.var}"
            self.out(depth, f"for {v} in range({self.expr(s.count)}):")
            self.stmts(s.body, depth + 1)
            return
        raise ExecutionError(f"cannot generate code for {type(s).__name__}")


def compile_program(program: FlatProgram, specs_in_order, hist_ids, record: bool):
    """Render the program to a Python function.

    Returns (function, offsets_keys, values_keys, source). The function takes
    (num_entries, *offset_lists, *value_lists) and returns
    (per-hist (counts, under, over, nfills) tuples, fills or None).
    """
    gen = _Codegen(program, specs_in_order, hist_ids, record)
    gen.stmts(program.statements, 1)
    body = gen.lines or ["    pass"]

    header_args = ["_NE"]
    header_args += [gen.offsets_args[k] for k in gen.offsets_args]
    header_args += [gen.values_args[k] for k in gen.values_args]

    prologue = []
    for h, spec in enumerate(specs_in_order):
        prologue.append(f"    _ct{h} = [0] * {spec.num_bins}")
        prologue.append(f"    _un{h} = 0; _ov{h} = 0; _nf{h} = 0")
    prologue.append("    _fills = [] if {} else None".format("True" if record else "False"))

    results = ", ".join(
        f"(_ct{h}, _un{h}, _ov{h}, _nf{h})" for h in range(len(specs_in_order))
    )
    epilogue = [f"    return ({results},), _fills" if len(specs_in_order) == 1
                else f"    return ({results}), _fills"]

    src = "\n".join(
        [f"def _flat_run({', '.join(header_args)}):"] + prologue + body + epilogue
    )
    namespace = dict(_GLOBALS)
    exec(compile(src, "<splitq-flatloop>", "exec"), namespace)  # noqa: S102
    return namespace["_flat_run"], list(gen.offsets_args), list(gen.values_args), src


def as_lists(dataset, offsets_keys, values_keys):
    """Dataset arrays as Python lists, cached on the dataset instance."""
    cache = getattr(dataset, "_pyloop_list_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(dataset, "_pyloop_list_cache", cache)
    out = []
    for kind, key in [("o", k) for k in offsets_keys] + [("a", k) for k in values_keys]:
        ck = (kind, key)
        if ck not in cache:
            arr = dataset.offsets[key] if kind == "o" else dataset.attributes[key]
            cache[ck] = arr.tolist()
        out.append(cache[ck])
    return out
