"""Type inference over query ASTs.

Walks the program against a schema, annotating every expression node with an
inferred type and collecting the final type of every variable. Control flow
is handled by joining environments at branch merges and iterating loop bodies
to a fixpoint, which is what turns a variable assigned both None and a record
reference into an optional reference. ``x is not None`` narrows an optional
variable inside the guarded branch, and attribute access on an unguarded
optional is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

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
    QueryAst,
)
from ..store.schema import CHAR, FLOAT64, ITEM_STEP, ListNode, Primitive, RecordNode, Schema, join_path
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

DATASET_NAME = "dataset"

_MAX_LOOP_PASSES = 16


@dataclass
class TypedQuery:
    """A type-checked query: the annotated AST plus final variable types."""

    ast: QueryAst
    schema: Schema
    var_types: dict[str, object]


def infer_types(ast: QueryAst, schema: Schema) -> TypedQuery:
    """Annotate the AST in place and return it wrapped with variable types."""
    checker = _Checker(schema)
    checker.check_stmts(ast.statements, {})
    return TypedQuery(ast, schema, checker.var_types)


class _Checker:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.var_types: dict[str, object] = {}
        self.active_loop_vars: set[str] = set()

    def _record_binding(self, name, ty, span):
        prev = self.var_types.get(name)
        joined = ty if prev is None else join_types(prev, ty)
        if joined is None:
            raise QueryTypeError(
                f"variable {name!r} cannot hold both {prev} and {ty}; "
                "reassignment must keep the same type",
                span,
            )
        self.var_types[name] = joined

    # --- statements ---------------------------------------------------------

    def check_stmts(self, stmts, env: dict) -> dict:
        for s in stmts:
            env = self.check_stmt(s, env)
        return env

    def check_stmt(self, s, env: dict) -> dict:
        if isinstance(s, Assign):
            return self._check_assign(s, env)
        if isinstance(s, Fill):
            t = self.expr(s.value, env)
            if not is_numeric(t):
                raise QueryTypeError(
                    f"fill_histogram needs a number, got {t}", s.value.span or s.span
                )
            return env
        if isinstance(s, If):
            return self._check_if(s, env)
        if isinstance(s, ForEach):
            return self._check_foreach(s, env)
        if isinstance(s, ForRange):
            return self._check_forrange(s, env)
        raise QueryTypeError(f"unsupported statement {type(s).__name__}", s.span)

    def _check_assign(self, s: Assign, env: dict) -> dict:
        if s.target == DATASET_NAME:
            raise QueryTypeError("'dataset' is reserved and cannot be assigned", s.span)
        if s.target in self.active_loop_vars:
            raise QueryTypeError(
                f"loop variable {s.target!r} cannot be reassigned inside its loop", s.span
            )
        t = self.expr(s.value, env)
        if isinstance(t, DatasetType):
            raise QueryTypeError("the whole dataset cannot be assigned to a variable", s.span)
        self._record_binding(s.target, t, s.span)
        env = dict(env)
        env[s.target] = t
        return env

    def _check_if(self, s: If, env: dict) -> dict:
        t = self.expr(s.cond, env)
        if t is not BOOL:
            raise QueryTypeError(f"if condition must be boolean, got {t}", s.cond.span or s.span)
        then_env, else_env = dict(env), dict(env)
        self._narrow(s.cond, then_env, else_env)
        t_out = self.check_stmts(s.body, then_env)
        e_out = self.check_stmts(s.orelse, else_env)
        return self._merge(t_out, e_out, s)

    def _merge(self, a: dict, b: dict, s) -> dict:
        out = {}
        for k in a:
            if k not in b:
                continue  # defined on one path only: not usable afterwards
            j = join_types(a[k], b[k])
            if j is None:
                raise QueryTypeError(
                    f"variable {k!r} has incompatible types on the two branches "
                    f"({a[k]} vs {b[k]})",
                    s.span,
                )
            out[k] = j
            self._record_binding(k, j, s.span)
        return out

    def _narrow(self, cond, then_env: dict, else_env: dict) -> None:
        if isinstance(cond, IsNotNone) and isinstance(cond.operand, Name):
            v = cond.operand.id
            t = then_env.get(v)
            if isinstance(t, OptionalRecordRefType):
                then_env[v] = RecordRefType(t.path)
        elif isinstance(cond, IsNone) and isinstance(cond.operand, Name):
            v = cond.operand.id
            t = else_env.get(v)
            if isinstance(t, OptionalRecordRefType):
                else_env[v] = RecordRefType(t.path)

    def _check_loop_body(self, s, env_in: dict, bind_var: str, bind_ty) -> dict:
        """Type a loop body to fixpoint; returns the environment after the loop."""
        if bind_var == DATASET_NAME:
            raise QueryTypeError("'dataset' is reserved and cannot be a loop variable", s.span)
        if bind_var in env_in:
            raise QueryTypeError(
                f"loop variable {bind_var!r} shadows a variable already in scope", s.span
            )
        self._record_binding(bind_var, bind_ty, s.span)
        self.active_loop_vars.add(bind_var)
        try:
            cur = dict(env_in)
            cur[bind_var] = bind_ty
            for _ in range(_MAX_LOOP_PASSES):
                out = self.check_stmts(s.body, dict(cur))
                joined = {}
                for k in cur:
                    j = join_types(cur[k], out[k])
                    if j is None:
                        raise QueryTypeError(
                            f"variable {k!r} changes type across loop iterations "
                            f"({cur[k]} vs {out[k]})",
                            s.span,
                        )
                    joined[k] = j
                if joined == cur:
                    break
                cur = joined
            else:
                raise QueryTypeError("loop typing did not converge", s.span)
        finally:
            self.active_loop_vars.discard(bind_var)
        # Zero iterations are possible: join with the pre-loop environment and
        # drop the loop variable and anything first bound inside the body.
        after = {}
        for k in env_in:
            j = join_types(env_in[k], cur[k])
            if j is None:
                raise QueryTypeError(
                    f"variable {k!r} would change type if the loop body never ran "
                    f"({env_in[k]} vs {cur[k]})",
                    s.span,
                )
            after[k] = j
            self._record_binding(k, j, s.span)
        return after

    def _check_foreach(self, s: ForEach, env: dict) -> dict:
        t = self.expr(s.iterable, env)
        if isinstance(t, DatasetType):
            elem = self._element_type(join_path("", ITEM_STEP), s.iterable.span)
        elif isinstance(t, ListType):
            elem = self._element_type(join_path(t.path, ITEM_STEP), s.iterable.span)
        else:
            raise QueryTypeError(f"cannot iterate over {t}", s.iterable.span or s.span)
        return self._check_loop_body(s, env, s.var, elem)

    def _check_forrange(self, s: ForRange, env: dict) -> dict:
        for bound in (s.start, s.stop):
            t = self.expr(bound, env)
            if t is not I64:
                raise QueryTypeError(f"range bounds must be integers, got {t}", bound.span)
        return self._check_loop_body(s, env, s.var, I64)

    def _element_type(self, path: str, span):
        node = self.schema.node_at(path)
        if isinstance(node, ListNode):
            return ListType(path)
        if isinstance(node, RecordNode):
            return RecordRefType(path)
        return self._primitive_type(node, path, span)

    def _primitive_type(self, node: Primitive, path: str, span):
        if node.kind == CHAR:
            raise QueryTypeError(
                "char attributes cannot be used in query expressions", span
            )
        return F64 if node.kind == FLOAT64 else I64

    # --- expressions ---------------------------------------------------------

    def expr(self, e, env: dict):
        t = self._expr(e, env)
        e.ty = t
        return t

    def _expr(self, e, env: dict):
        if isinstance(e, NumLit):
            return I64 if isinstance(e.value, int) else F64
        if isinstance(e, NoneLit):
            return NONE
        if isinstance(e, Name):
            if e.id == DATASET_NAME:
                return DatasetType(self.schema)
            if e.id not in env:
                raise QueryTypeError(f"undefined name {e.id!r}", e.span)
            return env[e.id]
        if isinstance(e, AttrAccess):
            return self._attr(e, env)
        if isinstance(e, IndexExpr):
            return self._index(e, env)
        if isinstance(e, LenExpr):
            t = self.expr(e.arg, env)
            if not isinstance(t, ListType):
                raise QueryTypeError(f"len() needs a list, got {t}", e.span)
            return I64
        if isinstance(e, BinOp):
            return self._binop(e, env)
        if isinstance(e, BoolOp):
            for side in (e.left, e.right):
                t = self.expr(side, env)
                if t is not BOOL:
                    raise QueryTypeError(f"'{e.op}' needs boolean operands, got {t}", side.span)
            return BOOL
        if isinstance(e, NotOp):
            t = self.expr(e.operand, env)
            if t is not BOOL:
                raise QueryTypeError(f"'not' needs a boolean operand, got {t}", e.operand.span)
            return BOOL
        if isinstance(e, MathCall):
            t = self.expr(e.arg, env)
            if not is_numeric(t):
                raise QueryTypeError(f"{e.func}() needs a number, got {t}", e.arg.span or e.span)
            if e.func == "abs":
                return t
            return F64
        if isinstance(e, (IsNone, IsNotNone)):
            t = self.expr(e.operand, env)
            if not isinstance(t, OptionalRecordRefType):
                raise QueryTypeError(
                    f"'is None' checks apply only to possibly-None record references, got {t}",
                    e.operand.span or e.span,
                )
            return BOOL
        raise QueryTypeError(f"unsupported expression {type(e).__name__}", e.span)

    def _attr(self, e: AttrAccess, env: dict):
        t = self.expr(e.obj, env)
        if isinstance(t, OptionalRecordRefType):
            raise QueryTypeError(
                f"value may be None here; guard with 'is not None' before accessing "
                f".{e.field_name}",
                e.span,
            )
        if not isinstance(t, RecordRefType):
            raise QueryTypeError(f"{t} has no attributes", e.span)
        node = self.schema.node_at(t.path)
        assert isinstance(node, RecordNode)
        if e.field_name not in node.field_names:
            raise QueryTypeError(
                f"record has no attribute {e.field_name!r} "
                f"(available: {', '.join(node.field_names)})",
                e.span,
            )
        child = node.field(e.field_name)
        path = join_path(t.path, e.field_name)
        if isinstance(child, ListNode):
            return ListType(path)
        if isinstance(child, RecordNode):
            return RecordRefType(path)
        return self._primitive_type(child, path, e.span)

    def _index(self, e: IndexExpr, env: dict):
        t = self.expr(e.obj, env)
        if not isinstance(t, ListType):
            raise QueryTypeError(f"only lists can be indexed, got {t}", e.span)
        ti = self.expr(e.index, env)
        if ti is not I64:
            raise QueryTypeError(f"list index must be an integer, got {ti}", e.index.span)
        return self._element_type(join_path(t.path, ITEM_STEP), e.span)

    def _binop(self, e: BinOp, env: dict):
        tl = self.expr(e.left, env)
        tr = self.expr(e.right, env)
        for t, side in ((tl, e.left), (tr, e.right)):
            if t is NONE:
                raise QueryTypeError("None cannot be used in arithmetic or comparisons", side.span)
            if not is_numeric(t):
                raise QueryTypeError(
                    f"operator '{e.op}' needs numbers, got {t}", side.span or e.span
                )
        if e.op in (">", "<", ">=", "<=", "==", "!="):
            return BOOL
        if e.op == "/":
            return F64
        return F64 if F64 in (tl, tr) else I64
