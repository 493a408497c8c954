"""Flat loop IR: programs over offsets arrays, attribute arrays, and scalars.

After lowering, no statement or expression refers to a list or record as a
value. Record references are integer indices into attribute arrays (with -1
as the None sentinel for optional references), list traversal is an integer
loop bounded by an offsets array, and ``len`` is an offsets difference.

``emit_text`` renders a stable, C-flavored form of a program, used for
golden tests and the ``--emit-ir`` CLI flag:

    for (event = 0; event < num_entries; event++) {
      for (muon = offsets[item.muons][event]; muon < offsets[item.muons][event + 1]; muon++) {
        fill(*, values[item.muons.item.pt][muon])
      }
    }

``fill(*, ...)`` denotes a fill bound to the query's sole histogram;
named fills render as ``fill(name, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..store.schema import Schema

F64 = "f64"
I64 = "i64"
BOOL = "bool"


# --- expressions -------------------------------------------------------------


@dataclass(eq=True)
class IExpr:
    pass


@dataclass(eq=True)
class VarIR(IExpr):
    name: str
    dtype: str


@dataclass(eq=True)
class ConstIR(IExpr):
    value: float | int
    dtype: str


@dataclass(eq=True)
class LoadIR(IExpr):
    """Attribute-array element: values[array][index]."""

    array: str
    index: IExpr
    dtype: str


@dataclass(eq=True)
class OffsetIR(IExpr):
    """Offsets-array element: offsets[array][index]; always int64."""

    array: str
    index: IExpr

    @property
    def dtype(self) -> str:
        return I64


@dataclass(eq=True)
class NumEntriesIR(IExpr):
    """The dataset's root entry count."""

    @property
    def dtype(self) -> str:
        return I64


@dataclass(eq=True)
class BinIR(IExpr):
    op: str  # + - * / > < >= <= == != and or
    left: IExpr
    right: IExpr
    dtype: str


@dataclass(eq=True)
class NotIR(IExpr):
    operand: IExpr

    @property
    def dtype(self) -> str:
        return BOOL


@dataclass(eq=True)
class CallIR(IExpr):
    func: str
    arg: IExpr
    dtype: str


# --- statements ---------------------------------------------------------------


@dataclass(eq=True)
class IRStmt:
    pass


@dataclass(eq=True)
class AssignIR(IRStmt):
    var: str
    dtype: str
    value: IExpr


@dataclass(eq=True)
class FillIR(IRStmt):
    hist: str | None
    value: IExpr


@dataclass(eq=True)
class IfIR(IRStmt):
    cond: IExpr
    then: list[IRStmt]
    orelse: list[IRStmt]


@dataclass(eq=True)
class ForOffsetsIR(IRStmt):
    """Integer loop over one list level.

    With ``offsets`` None the loop runs over [0, num_entries); otherwise it
    runs over [offsets[array][parent], offsets[array][parent + 1]).
    """

    var: str
    offsets: str | None
    parent: IExpr | None
    body: list[IRStmt]


@dataclass(eq=True)
class ForRangeIR(IRStmt):
    var: str
    start: IExpr
    stop: IExpr
    body: list[IRStmt]


@dataclass(eq=True)
class FlatLoopIR(IRStmt):
    """Collapsed total-sequential nest: a single loop over [0, count)."""

    var: str
    count: IExpr
    body: list[IRStmt]


@dataclass
class FlatProgram:
    """A lowered query: loop statements over flat arrays plus metadata.

    ``var_dtypes`` lists every scalar/index variable with its register type;
    ``fill_names`` are the histogram labels of fills in program order (None
    meaning the sole declared histogram).
    """

    schema: Schema
    statements: list[IRStmt]
    var_dtypes: dict[str, str]
    fill_names: tuple[str | None, ...]
    flattened: bool = False
    source: str | None = field(default=None, compare=False)

    def iter_statements(self):
        def walk(stmts):
            for s in stmts:
                yield s
                if isinstance(s, (ForOffsetsIR, ForRangeIR, FlatLoopIR)):
                    yield from walk(s.body)
                elif isinstance(s, IfIR):
                    yield from walk(s.then)
                    yield from walk(s.orelse)

        yield from walk(self.statements)

    def iter_exprs(self):
        def walk_expr(e):
            yield e
            if isinstance(e, BinIR):
                yield from walk_expr(e.left)
                yield from walk_expr(e.right)
            elif isinstance(e, NotIR):
                yield from walk_expr(e.operand)
            elif isinstance(e, CallIR):
                yield from walk_expr(e.arg)
            elif isinstance(e, (LoadIR, OffsetIR)):
                yield from walk_expr(e.index)

        for s in self.iter_statements():
            if isinstance(s, AssignIR):
                yield from walk_expr(s.value)
            elif isinstance(s, FillIR):
                yield from walk_expr(s.value)
            elif isinstance(s, IfIR):
                yield from walk_expr(s.cond)
            elif isinstance(s, ForOffsetsIR):
                if s.parent is not None:
                    yield from walk_expr(s.parent)
            elif isinstance(s, ForRangeIR):
                yield from walk_expr(s.start)
                yield from walk_expr(s.stop)
            elif isinstance(s, FlatLoopIR):
                yield from walk_expr(s.count)

    def offsets_refs(self) -> list[str]:
        """Offsets arrays the program reads, in first-use order."""
        seen: dict[str, None] = {}
        for s in self.iter_statements():
            if isinstance(s, ForOffsetsIR) and s.offsets is not None:
                seen.setdefault(s.offsets)
        for e in self.iter_exprs():
            if isinstance(e, OffsetIR):
                seen.setdefault(e.array)
        return list(seen)

    def attribute_refs(self) -> list[str]:
        """Attribute arrays the program reads, in first-use order."""
        seen: dict[str, None] = {}
        for e in self.iter_exprs():
            if isinstance(e, LoadIR):
                seen.setdefault(e.array)
        return list(seen)


# --- textual form --------------------------------------------------------------

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
_TEXT_OP = {"and": "&&", "or": "||"}


def _emit_expr(e: IExpr, min_prec: int = 0) -> str:
    if isinstance(e, VarIR):
        return e.name
    if isinstance(e, ConstIR):
        return repr(e.value)
    if isinstance(e, NumEntriesIR):
        return "num_entries"
    if isinstance(e, LoadIR):
        return f"values[{e.array}][{_emit_expr(e.index)}]"
    if isinstance(e, OffsetIR):
        return f"offsets[{e.array}][{_emit_expr(e.index)}]"
    if isinstance(e, NotIR):
        return f"!{_emit_expr(e.operand, 7)}"
    if isinstance(e, CallIR):
        return f"{e.func}({_emit_expr(e.arg)})"
    if isinstance(e, BinIR):
        p = _PREC[e.op]
        op = _TEXT_OP.get(e.op, e.op)
        text = f"{_emit_expr(e.left, p)} {op} {_emit_expr(e.right, p + 1)}"
        return f"({text})" if p < min_prec else text
    raise TypeError(f"cannot emit {e!r}")


def _emit_stmts(stmts, depth: int, lines: list[str]) -> None:
    pad = "  " * depth
    for s in stmts:
        if isinstance(s, AssignIR):
            lines.append(f"{pad}{s.var} = {_emit_expr(s.value)}")
        elif isinstance(s, FillIR):
            label = "*" if s.hist is None else s.hist
            lines.append(f"{pad}fill({label}, {_emit_expr(s.value)})")
        elif isinstance(s, IfIR):
            lines.append(f"{pad}if ({_emit_expr(s.cond)}) {{")
            _emit_stmts(s.then, depth + 1, lines)
            if s.orelse:
                lines.append(f"{pad}}} else {{")
                _emit_stmts(s.orelse, depth + 1, lines)
            lines.append(f"{pad}}}")
        elif isinstance(s, ForOffsetsIR):
            v = s.var
            if s.offsets is None:
                head = f"for ({v} = 0; {v} < num_entries; {v}++)"
            else:
                lo = f"offsets[{s.offsets}][{_emit_expr(s.parent)}]"
                hi = f"offsets[{s.offsets}][{_emit_expr(s.parent, 6)} + 1]"
                head = f"for ({v} = {lo}; {v} < {hi}; {v}++)"
            lines.append(f"{pad}{head} {{")
            _emit_stmts(s.body, depth + 1, lines)
            lines.append(f"{pad}}}")
        elif isinstance(s, ForRangeIR):
            v = s.var
            head = f"for ({v} = {_emit_expr(s.start)}; {v} < {_emit_expr(s.stop)}; {v}++)"
            lines.append(f"{pad}{head} {{")
            _emit_stmts(s.body, depth + 1, lines)
            lines.append(f"{pad}}}")
        elif isinstance(s, FlatLoopIR):
            v = s.var
            head = f"for ({v} = 0; {v} < {_emit_expr(s.count)}; {v}++)"
            lines.append(f"{pad}{head} {{")
            _emit_stmts(s.body, depth + 1, lines)
            lines.append(f"{pad}}}")
        else:
            raise TypeError(f"cannot emit {s!r}")


def emit_text(program: FlatProgram) -> str:
    """Stable textual rendering of a program (golden-test format)."""
    lines = [
        "flat-program v1",
        f"flattened: {'true' if program.flattened else 'false'}",
    ]
    _emit_stmts(program.statements, 0, lines)
    return "\n".join(lines) + "\n"
