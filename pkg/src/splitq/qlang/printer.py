"""Canonical pretty-printer; parse(print_ast(ast)) == ast."""

from __future__ import annotations

from ..errors import SplitQError
from .astnodes import (
    Assign,
    AttrAccess,
    BinOp,
    BoolOp,
    Expr,
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

INDENT = "    "

# Precedence levels; postfix/atoms are highest.
_OR, _AND, _NOT, _CMP, _ADD, _MUL, _UNARY, _POSTFIX = range(1, 9)

_BINOP_PREC = {
    "+": _ADD,
    "-": _ADD,
    "*": _MUL,
    "/": _MUL,
    ">": _CMP,
    "<": _CMP,
    ">=": _CMP,
    "<=": _CMP,
    "==": _CMP,
    "!=": _CMP,
}


def _prec(e: Expr) -> int:
    if isinstance(e, BoolOp):
        return _OR if e.op == "or" else _AND
    if isinstance(e, NotOp):
        return _NOT
    if isinstance(e, (IsNone, IsNotNone)):
        return _CMP
    if isinstance(e, BinOp):
        return _BINOP_PREC[e.op]
    if isinstance(e, NumLit) and not isinstance(e.value, bool) and e.value < 0:
        return _UNARY
    return _POSTFIX


def _emit(e: Expr, min_prec: int) -> str:
    p = _prec(e)
    text = _emit_inner(e, p)
    return f"({text})" if p < min_prec else text


def _emit_inner(e: Expr, p: int) -> str:
    if isinstance(e, Name):
        return e.id
    if isinstance(e, NumLit):
        return repr(e.value)
    if isinstance(e, NoneLit):
        return "None"
    if isinstance(e, AttrAccess):
        return f"{_emit(e.obj, _POSTFIX)}.{e.field_name}"
    if isinstance(e, IndexExpr):
        return f"{_emit(e.obj, _POSTFIX)}[{_emit(e.index, 0)}]"
    if isinstance(e, LenExpr):
        return f"len({_emit(e.arg, 0)})"
    if isinstance(e, MathCall):
        return f"{e.func}({_emit(e.arg, 0)})"
    if isinstance(e, BinOp):
        # Left-associative: the right operand needs one level more.
        return f"{_emit(e.left, p)} {e.op} {_emit(e.right, p + 1)}"
    if isinstance(e, BoolOp):
        return f"{_emit(e.left, p)} {e.op} {_emit(e.right, p + 1)}"
    if isinstance(e, NotOp):
        return f"not {_emit(e.operand, _NOT)}"
    if isinstance(e, IsNone):
        return f"{_emit(e.operand, _ADD)} is None"
    if isinstance(e, IsNotNone):
        return f"{_emit(e.operand, _ADD)} is not None"
    raise SplitQError(f"cannot print expression {e!r}")


def _emit_stmts(stmts, depth: int, lines: list[str]) -> None:
    pad = INDENT * depth
    for s in stmts:
        if isinstance(s, Assign):
            lines.append(f"{pad}{s.target} = {_emit(s.value, 0)}")
        elif isinstance(s, Fill):
            if s.hist is None:
                lines.append(f"{pad}fill_histogram({_emit(s.value, 0)})")
            else:
                lines.append(f"{pad}fill_histogram({s.hist}, {_emit(s.value, 0)})")
        elif isinstance(s, If):
            lines.append(f"{pad}if {_emit(s.cond, 0)}:")
            _emit_stmts(s.body, depth + 1, lines)
            if s.orelse:
                lines.append(f"{pad}else:")
                _emit_stmts(s.orelse, depth + 1, lines)
        elif isinstance(s, ForEach):
            lines.append(f"{pad}for {s.var} in {_emit(s.iterable, 0)}:")
            _emit_stmts(s.body, depth + 1, lines)
        elif isinstance(s, ForRange):
            lines.append(f"{pad}for {s.var} in range({_emit(s.start, 0)}, {_emit(s.stop, 0)}):")
            _emit_stmts(s.body, depth + 1, lines)
        else:
            raise SplitQError(f"cannot print statement {s!r}")


def print_ast(ast: QueryAst) -> str:
    """Canonical source text; empty program prints as the empty string."""
    lines: list[str] = []
    _emit_stmts(ast.statements, 0, lines)
    return "\n".join(lines) + ("\n" if lines else "")
