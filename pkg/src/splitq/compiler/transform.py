"""Lowering of typed object-style ASTs into flat loop programs.

Three rewrite rules remove every object reference:

1. list elimination: ``for x in L`` becomes an integer loop over
   ``[offsets_L[parent], offsets_L[parent + 1])`` (the loop over the whole
   dataset runs over ``[0, num_entries)``);
2. record elimination: a record-typed variable becomes an integer index,
   ``x.attr`` becomes ``attr_array[index_of_x]``, None becomes the sentinel
   index -1 and ``x is not None`` becomes ``index_of_x != -1``;
3. length overloading: ``len(L)`` becomes ``offsets_L[j + 1] - offsets_L[j]``
   and ``L[i]`` becomes the element index ``offsets_L[j] + i``.

The result references only integer loop counters, scalars, and array loads.
"""

from __future__ import annotations

from ..errors import QueryTypeError
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
from ..qlang.printer import print_ast
from ..store.schema import CHAR, FLOAT64, INT64, ITEM_STEP, ListNode, Primitive, RecordNode, join_path
from .infer import DATASET_NAME, TypedQuery
from .ir import (
    AssignIR,
    BinIR,
    CallIR,
    ConstIR,
    FillIR,
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
)

NONE_SENTINEL = -1

_SCALAR_DTYPE = {F64: "f64", I64: "i64", BOOL: "bool", NONE: "i64"}


class _DatasetVal:
    """The reserved dataset identifier (only iterable)."""


class _ListVal:
    """A list value: its node path plus the instance index expression."""

    def __init__(self, path: str, index):
        self.path = path
        self.index = index


class _Lowerer:
    def __init__(self, typed: TypedQuery):
        self.schema = typed.schema
        self.var_types = typed.var_types
        self.used_names = set(typed.var_types)
        self.fill_names: list[str | None] = []
        self.var_dtypes: dict[str, str] = {}

    def fresh(self, base: str) -> str:
        name = base
        n = 1
        while name in self.used_names:
            n += 1
            name = f"{base}_{n}"
        self.used_names.add(name)
        return name

    def declare(self, name: str, dtype: str) -> str:
        self.var_dtypes[name] = dtype
        return name

    # --- statements --------------------------------------------------------

    def lower_stmts(self, stmts, env: dict) -> list:
        out = []
        for s in stmts:
            out.extend(self.lower_stmt(s, env))
        return out

    def lower_stmt(self, s, env: dict) -> list:
        if isinstance(s, Assign):
            return self._lower_assign(s, env)
        if isinstance(s, Fill):
            self.fill_names.append(s.hist)
            return [FillIR(s.hist, self.scalar(s.value, env))]
        if isinstance(s, If):
            cond = self.scalar(s.cond, env)
            return [IfIR(cond, self.lower_stmts(s.body, dict(env)), self.lower_stmts(s.orelse, dict(env)))]
        if isinstance(s, ForEach):
            return self._lower_foreach(s, env)
        if isinstance(s, ForRange):
            start = self.scalar(s.start, env)
            stop = self.scalar(s.stop, env)
            var = self.declare(self._bind_name(s.var, env), "i64")
            body_env = dict(env)
            body_env[s.var] = VarIR(var, "i64")
            body = self.lower_stmts(s.body, body_env)
            return [ForRangeIR(var, start, stop, body)]
        raise QueryTypeError(f"cannot lower statement {type(s).__name__}", s.span)

    def _bind_name(self, user_name: str, env: dict) -> str:
        # Reuse the user's name unless it is already live (shadowing).
        if user_name in env:
            return self.fresh(user_name)
        self.used_names.add(user_name)
        return user_name

    def _lower_assign(self, s: Assign, env: dict) -> list:
        final_ty = self.var_types[s.target]
        value_ty = s.value.ty
        if s.target in env:
            target = env[s.target].name
        else:
            if isinstance(final_ty, (RecordRefType, OptionalRecordRefType, ListType)):
                dtype = "i64"
            else:
                dtype = _SCALAR_DTYPE[final_ty]
            target = self.declare(s.target, dtype)
            env[s.target] = VarIR(target, dtype)
        if isinstance(value_ty, ScalarType) and value_ty is NONE:
            return [AssignIR(target, "i64", ConstIR(NONE_SENTINEL, "i64"))]
        if isinstance(value_ty, (RecordRefType,)):
            return [AssignIR(target, "i64", self.record_index(s.value, env))]
        if isinstance(value_ty, OptionalRecordRefType):
            # Copying one optional reference into another variable.
            return [AssignIR(target, "i64", self.record_index(s.value, env))]
        if isinstance(value_ty, ListType):
            lst = self.list_value(s.value, env)
            return [AssignIR(target, "i64", lst.index)]
        dtype = env[s.target].dtype
        return [AssignIR(target, dtype, self.scalar(s.value, env, want=dtype))]

    def _lower_foreach(self, s: ForEach, env: dict) -> list:
        it_ty = s.iterable.ty
        if isinstance(it_ty, DatasetType):
            elem_path = join_path("", ITEM_STEP)
            offsets = None
            parent = None
        else:
            lst = self.list_value(s.iterable, env)
            elem_path = join_path(lst.path, ITEM_STEP)
            offsets = lst.path
            parent = lst.index
        var = self.declare(self._bind_name(s.var, env), "i64")
        body_env = dict(env)
        node = self.schema.node_at(elem_path)
        if isinstance(node, RecordNode):
            body_env[s.var] = VarIR(var, "i64")
        elif isinstance(node, ListNode):
            body_env[s.var] = _ListVal(elem_path, VarIR(var, "i64"))
        else:
            dtype = "f64" if node.kind == FLOAT64 else "i64"
            body_env[s.var] = LoadIR(elem_path, VarIR(var, "i64"), dtype)
        body = self.lower_stmts(s.body, body_env)
        return [ForOffsetsIR(var, offsets, parent, body)]

    # --- expressions --------------------------------------------------------

    def list_value(self, e, env: dict) -> _ListVal:
        ty = e.ty
        assert isinstance(ty, ListType), f"expected list expression, got {ty}"
        if isinstance(e, Name):
            bound = env[e.id]
            if isinstance(bound, _ListVal):
                return bound
            # A list snapshot variable holds the list's instance index.
            return _ListVal(ty.path, bound)
        if isinstance(e, AttrAccess):
            # The field's list instances share the owning record's index space.
            return _ListVal(ty.path, self.record_index(e.obj, env))
        if isinstance(e, IndexExpr):
            outer = self.list_value(e.obj, env)
            idx = self._element_index(outer, e.index, env)
            return _ListVal(ty.path, idx)
        raise QueryTypeError(f"cannot lower list expression {type(e).__name__}", e.span)

    def record_index(self, e, env: dict):
        """Lower an expression of record-reference type to its index expression."""
        ty = e.ty
        if isinstance(e, Name):
            if isinstance(ty, (RecordRefType, OptionalRecordRefType)):
                return env[e.id]
        if isinstance(e, NoneLit):
            return ConstIR(NONE_SENTINEL, "i64")
        if isinstance(e, AttrAccess):
            # Nested record field: same instance space as the owner.
            return self.record_index(e.obj, env)
        if isinstance(e, IndexExpr):
            lst = self.list_value(e.obj, env)
            return self._element_index(lst, e.index, env)
        raise QueryTypeError(f"cannot lower record expression {type(e).__name__}", e.span)

    def _element_index(self, lst: _ListVal, index_expr, env: dict):
        base = OffsetIR(lst.path, lst.index)
        return BinIR("+", base, self.scalar(index_expr, env, want="i64"), "i64")

    def scalar(self, e, env: dict, want: str | None = None):
        out = self._scalar(e, env)
        if want is not None and out.dtype != want:
            if out.dtype == "i64" and want == "f64":
                out = CallIR("i2f", out, "f64")
            else:
                raise QueryTypeError(f"internal dtype mismatch {out.dtype} -> {want}", e.span)
        return out

    def _scalar(self, e, env: dict):
        ty = e.ty
        if isinstance(e, NumLit):
            return ConstIR(e.value, "i64" if isinstance(e.value, int) else "f64")
        if isinstance(e, Name):
            bound = env[e.id]
            if isinstance(bound, (VarIR, LoadIR)):
                return bound
            raise QueryTypeError(f"{e.id!r} is not a scalar here", e.span)
        if isinstance(e, AttrAccess):
            owner = self.record_index(e.obj, env)
            path = join_path(e.obj.ty.path, e.field_name)
            node = self.schema.node_at(path)
            assert isinstance(node, Primitive) and node.kind != CHAR
            return LoadIR(path, owner, "f64" if node.kind == FLOAT64 else "i64")
        if isinstance(e, IndexExpr):
            lst = self.list_value(e.obj, env)
            elem_path = join_path(lst.path, ITEM_STEP)
            node = self.schema.node_at(elem_path)
            assert isinstance(node, Primitive)
            idx = self._element_index(lst, e.index, env)
            return LoadIR(elem_path, idx, "f64" if node.kind == FLOAT64 else "i64")
        if isinstance(e, LenExpr):
            lst = self.list_value(e.arg, env)
            hi = OffsetIR(lst.path, BinIR("+", lst.index, ConstIR(1, "i64"), "i64"))
            lo = OffsetIR(lst.path, lst.index)
            return BinIR("-", hi, lo, "i64")
        if isinstance(e, BinOp):
            return self._lower_binop(e, env)
        if isinstance(e, BoolOp):
            return BinIR(
                e.op, self.scalar(e.left, env), self.scalar(e.right, env), "bool"
            )
        if isinstance(e, NotOp):
            return NotIR(self.scalar(e.operand, env))
        if isinstance(e, MathCall):
            arg = self.scalar(e.arg, env)
            if e.func == "abs":
                return CallIR("abs", arg, arg.dtype)
            return CallIR(e.func, self.scalar(e.arg, env, want="f64"), "f64")
        if isinstance(e, IsNone):
            return BinIR("==", self.record_index(e.operand, env), ConstIR(NONE_SENTINEL, "i64"), "bool")
        if isinstance(e, IsNotNone):
            return BinIR("!=", self.record_index(e.operand, env), ConstIR(NONE_SENTINEL, "i64"), "bool")
        raise QueryTypeError(f"cannot lower expression {type(e).__name__}", e.span)

    def _lower_binop(self, e: BinOp, env: dict):
        lt, rt = e.left.ty, e.right.ty
        if e.op in (">", "<", ">=", "<=", "==", "!="):
            if F64 in (lt, rt):
                want = "f64"
            else:
                want = "i64"
            return BinIR(e.op, self.scalar(e.left, env, want=want),
                         self.scalar(e.right, env, want=want), "bool")
        if e.op == "/":
            return BinIR("/", self.scalar(e.left, env, want="f64"),
                         self.scalar(e.right, env, want="f64"), "f64")
        want = "f64" if F64 in (lt, rt) else "i64"
        return BinIR(e.op, self.scalar(e.left, env, want=want),
                     self.scalar(e.right, env, want=want), want)


def transform(typed: TypedQuery) -> FlatProgram:
    """Lower a typed query into a FlatProgram over offsets/attribute arrays."""
    low = _Lowerer(typed)
    statements = low.lower_stmts(typed.ast.statements, {})
    return FlatProgram(
        schema=typed.schema,
        statements=statements,
        var_dtypes=low.var_dtypes,
        fill_names=tuple(low.fill_names),
        flattened=False,
        source=print_ast(typed.ast),
    )
