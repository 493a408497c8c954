"""Query language: AST, parser, canonical printer, JSON interchange."""

from .astnodes import (
    ARITH_OPS,
    BOOL_OPS,
    CMP_OPS,
    MATH_FUNCS,
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
    Node,
    NoneLit,
    NotOp,
    NumLit,
    QueryAst,
    SourceSpan,
    Stmt,
    ast_from_json,
    ast_to_json,
)
from .parser import parse, tokenize
from .printer import print_ast

__all__ = [
    "ARITH_OPS",
    "BOOL_OPS",
    "CMP_OPS",
    "MATH_FUNCS",
    "Assign",
    "AttrAccess",
    "BinOp",
    "BoolOp",
    "Expr",
    "Fill",
    "ForEach",
    "ForRange",
    "If",
    "IndexExpr",
    "IsNone",
    "IsNotNone",
    "LenExpr",
    "MathCall",
    "Name",
    "Node",
    "NoneLit",
    "NotOp",
    "NumLit",
    "QueryAst",
    "SourceSpan",
    "Stmt",
    "ast_from_json",
    "ast_to_json",
    "parse",
    "print_ast",
    "tokenize",
]
