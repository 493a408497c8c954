"""AST for the analysis-function language.

Nodes compare by structure: source spans and inferred types are carried on
every node but excluded from equality, so ``parse(print_ast(a)) == a`` holds.
A JSON form of the tree (field names below are the wire names) is provided
for programmatic clients.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

MATH_FUNCS = ("sqrt", "cosh", "cos", "sin", "exp", "log", "abs")

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = (">", "<", ">=", "<=", "==", "!=")
BOOL_OPS = ("and", "or")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    col: int
    end_line: int
    end_col: int


@dataclass(eq=True)
class Node:
    span: SourceSpan | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(eq=True)
class Expr(Node):
    # Filled in by type inference.
    ty: object = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(eq=True)
class Name(Expr):
    id: str = ""


@dataclass(eq=True)
class NumLit(Expr):
    value: float | int = 0


@dataclass(eq=True)
class NoneLit(Expr):
    pass


@dataclass(eq=True)
class AttrAccess(Expr):
    obj: Expr = None
    field_name: str = ""


@dataclass(eq=True)
class IndexExpr(Expr):
    obj: Expr = None
    index: Expr = None


@dataclass(eq=True)
class LenExpr(Expr):
    arg: Expr = None


@dataclass(eq=True)
class BinOp(Expr):
    op: str = ""
    left: Expr = None
    right: Expr = None


@dataclass(eq=True)
class BoolOp(Expr):
    op: str = ""
    left: Expr = None
    right: Expr = None


@dataclass(eq=True)
class NotOp(Expr):
    operand: Expr = None


@dataclass(eq=True)
class MathCall(Expr):
    func: str = ""
    arg: Expr = None


@dataclass(eq=True)
class IsNone(Expr):
    operand: Expr = None


@dataclass(eq=True)
class IsNotNone(Expr):
    operand: Expr = None


@dataclass(eq=True)
class Stmt(Node):
    pass


@dataclass(eq=True)
class Assign(Stmt):
    target: str = ""
    value: Expr = None


@dataclass(eq=True)
class Fill(Stmt):
    # hist None means "the query's sole declared histogram".
    hist: str | None = None
    value: Expr = None


@dataclass(eq=True)
class If(Stmt):
    cond: Expr = None
    body: list[Stmt] = None
    orelse: list[Stmt] = field(default_factory=list)


@dataclass(eq=True)
class ForEach(Stmt):
    var: str = ""
    iterable: Expr = None
    body: list[Stmt] = None


@dataclass(eq=True)
class ForRange(Stmt):
    var: str = ""
    start: Expr = None
    stop: Expr = None
    body: list[Stmt] = None


@dataclass(eq=True)
class QueryAst:
    statements: list[Stmt]

    def fill_names(self) -> list[str | None]:
        """Histogram names of every Fill, in program order."""
        out: list[str | None] = []

        def walk(stmts):
            for s in stmts:
                if isinstance(s, Fill):
                    out.append(s.hist)
                elif isinstance(s, If):
                    walk(s.body)
                    walk(s.orelse)
                elif isinstance(s, (ForEach, ForRange)):
                    walk(s.body)

        walk(self.statements)
        return out


# --- JSON interchange ------------------------------------------------------

_EXPR_TYPES = {
    "Name": Name,
    "NumLit": NumLit,
    "NoneLit": NoneLit,
    "AttrAccess": AttrAccess,
    "IndexExpr": IndexExpr,
    "LenExpr": LenExpr,
    "BinOp": BinOp,
    "BoolOp": BoolOp,
    "NotOp": NotOp,
    "MathCall": MathCall,
    "IsNone": IsNone,
    "IsNotNone": IsNotNone,
}
_STMT_TYPES = {
    "Assign": Assign,
    "Fill": Fill,
    "If": If,
    "ForEach": ForEach,
    "ForRange": ForRange,
}


def _node_to_json(node):
    if isinstance(node, list):
        return [_node_to_json(x) for x in node]
    if not isinstance(node, Node):
        return node
    out = {"node": type(node).__name__}
    for f in fields(node):
        if f.name in ("span", "ty"):
            continue
        out[f.name] = _node_to_json(getattr(node, f.name))
    return out


def ast_to_json(ast: QueryAst) -> dict:
    return {"version": 1, "statements": [_node_to_json(s) for s in ast.statements]}


def _node_from_json(obj, types):
    if isinstance(obj, list):
        return [_node_from_json(x, types) for x in obj]
    if not isinstance(obj, dict):
        return obj
    kind = obj.get("node")
    cls = types.get(kind) or _EXPR_TYPES.get(kind) or _STMT_TYPES.get(kind)
    if cls is None:
        raise ValueError(f"unknown AST node kind {kind!r}")
    kwargs = {}
    for f in fields(cls):
        if f.name in ("span", "ty") or f.name not in obj:
            continue
        kwargs[f.name] = _node_from_json(obj[f.name], types)
    return cls(**kwargs)


def ast_from_json(obj: dict) -> QueryAst:
    stmts = obj.get("statements")
    if not isinstance(stmts, list):
        raise ValueError("AST JSON must have a 'statements' list")
    return QueryAst([_node_from_json(s, _STMT_TYPES) for s in stmts])
