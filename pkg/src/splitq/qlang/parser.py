"""Recursive-descent parser for the analysis-function language.

Surface syntax (one statement per line, blocks by indentation):

    program   := statement*
    statement := "for" NAME "in" iterable ":" block
               | "if" expr ":" block ("else" ":" block)?
               | NAME "=" expr
               | "fill_histogram" "(" (NAME ",")? expr ")"
    iterable  := "range" "(" expr ("," expr)? ")" | expr
    block     := INDENT statement+ DEDENT

Expressions have conventional precedence: or < and < not < comparison
(">", "<", ">=", "<=", "==", "!=", "is [not] None") < "+"/"-" < "*"/"/" <
postfix ("." NAME, "[" expr "]"). Calls are limited to ``len`` and the math
set (sqrt, cosh, cos, sin, exp, log, abs), all unary. Indentation uses
spaces only; the first indented line fixes its block's width. Newlines
inside unclosed parentheses or brackets are ignored, so long expressions
may wrap. ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QuerySyntaxError
from .astnodes import (
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
    NoneLit,
    NotOp,
    NumLit,
    QueryAst,
    SourceSpan,
    Stmt,
)

KEYWORDS = frozenset(["for", "in", "if", "else", "None", "is", "not", "and", "or"])

_NUMBER_RE = re.compile(r"\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+(?:[eE][+-]?\d+)?|\d+")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPERATORS = (">=", "<=", "==", "!=", "+", "-", "*", "/", "(", ")", "[", "]", ",", ":", ".", "=", ">", "<")


@dataclass(frozen=True)
class Token:
    kind: str  # NAME KEYWORD NUMBER OP NEWLINE INDENT DEDENT EOF
    value: object
    line: int
    col: int
    end_col: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, self.line, self.end_col)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    indents = [0]
    depth = 0  # open parens/brackets
    lines = source.split("\n")

    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0]
        if not text.strip():
            continue  # blank or comment-only line

        if depth == 0:
            stripped = text.lstrip(" ")
            lead = text[: len(text) - len(stripped)]
            if "\t" in lead:
                raise QuerySyntaxError(
                    "tabs are not allowed in indentation",
                    SourceSpan(lineno, lead.index("\t") + 1, lineno, lead.index("\t") + 2),
                )
            width = len(lead)
            if width > indents[-1]:
                indents.append(width)
                tokens.append(Token("INDENT", width, lineno, 1, width + 1))
            else:
                while width < indents[-1]:
                    indents.pop()
                    tokens.append(Token("DEDENT", None, lineno, 1, 1))
                if width != indents[-1]:
                    raise QuerySyntaxError(
                        "unindent does not match any enclosing block",
                        SourceSpan(lineno, 1, lineno, width + 1),
                    )
            pos = len(lead)
        else:
            pos = 0  # continuation line inside parentheses

        n = len(text)
        emitted = False
        while pos < n:
            ch = text[pos]
            if ch == " ":
                pos += 1
                continue
            if ch == "\t":
                raise QuerySyntaxError(
                    "tab character in source", SourceSpan(lineno, pos + 1, lineno, pos + 2)
                )
            col = pos + 1
            m = _NUMBER_RE.match(text, pos)
            if m:
                s = m.group(0)
                value = int(s) if re.fullmatch(r"\d+", s) else float(s)
                tokens.append(Token("NUMBER", value, lineno, col, col + len(s)))
                pos = m.end()
                emitted = True
                continue
            m = _NAME_RE.match(text, pos)
            if m:
                s = m.group(0)
                kind = "KEYWORD" if s in KEYWORDS else "NAME"
                tokens.append(Token(kind, s, lineno, col, col + len(s)))
                pos = m.end()
                emitted = True
                continue
            for op in _OPERATORS:
                if text.startswith(op, pos):
                    if op in "([":
                        depth += 1
                    elif op in ")]":
                        depth = max(0, depth - 1)
                    tokens.append(Token("OP", op, lineno, col, col + len(op)))
                    pos += len(op)
                    emitted = True
                    break
            else:
                raise QuerySyntaxError(
                    f"unexpected character {ch!r}", SourceSpan(lineno, col, lineno, col + 1)
                )
        if emitted and depth == 0:
            tokens.append(Token("NEWLINE", None, lineno, n + 1, n + 1))

    last = len(lines)
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("DEDENT", None, last, 1, 1))
    tokens.append(Token("EOF", None, last, 1, 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str, value=None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind: str, value=None) -> Token:
        tok = self.peek()
        if not self.at(kind, value):
            want = value if value is not None else kind
            raise QuerySyntaxError(f"expected {want!r}, got {self._show(tok)}", tok.span)
        return self.next()

    @staticmethod
    def _show(tok: Token) -> str:
        if tok.kind in ("NEWLINE", "INDENT", "DEDENT", "EOF"):
            return tok.kind.lower().replace("dedent", "end of block").replace("eof", "end of input")
        return repr(str(tok.value))

    def _span(self, start: Token) -> SourceSpan:
        prev = self.tokens[self.pos - 1] if self.pos > 0 else start
        return SourceSpan(start.line, start.col, prev.line, prev.end_col)

    # statements

    def parse_program(self) -> QueryAst:
        if self.at("INDENT"):
            raise QuerySyntaxError("unexpected indentation", self.peek().span)
        stmts = []
        while not self.at("EOF"):
            stmts.append(self.parse_statement())
        return QueryAst(stmts)

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "KEYWORD" and tok.value == "for":
            return self.parse_for()
        if tok.kind == "KEYWORD" and tok.value == "if":
            return self.parse_if()
        if tok.kind == "NAME":
            if tok.value == "fill_histogram" and self.peek(1).kind == "OP" and self.peek(1).value == "(":
                return self.parse_fill()
            if self.peek(1).kind == "OP" and self.peek(1).value == "=":
                return self.parse_assign()
            raise QuerySyntaxError(
                f"expected a statement; a bare expression starting with {tok.value!r} is not one",
                tok.span,
            )
        raise QuerySyntaxError(f"expected a statement, got {self._show(tok)}", tok.span)

    def parse_for(self) -> Stmt:
        start = self.expect("KEYWORD", "for")
        var = self.expect("NAME").value
        self.expect("KEYWORD", "in")
        if self.at("NAME", "range") and self.peek(1).kind == "OP" and self.peek(1).value == "(":
            rtok = self.next()
            self.next()  # (
            first = self.parse_expr()
            if self.at("OP", ","):
                self.next()
                stop = self.parse_expr()
                start_expr = first
            else:
                start_expr = NumLit(0, span=rtok.span)
                stop = first
            self.expect("OP", ")")
            body = self.parse_block()
            return ForRange(var, start_expr, stop, body, span=self._span(start))
        iterable = self.parse_expr()
        body = self.parse_block()
        return ForEach(var, iterable, body, span=self._span(start))

    def parse_if(self) -> Stmt:
        start = self.expect("KEYWORD", "if")
        cond = self.parse_expr()
        body = self.parse_block()
        orelse: list[Stmt] = []
        if self.at("KEYWORD", "else"):
            self.next()
            orelse = self.parse_block()
        return If(cond, body, orelse, span=self._span(start))

    def parse_assign(self) -> Stmt:
        name = self.expect("NAME")
        self.expect("OP", "=")
        value = self.parse_expr()
        self.expect("NEWLINE")
        return Assign(name.value, value, span=self._span(name))

    def parse_fill(self) -> Stmt:
        start = self.expect("NAME")  # fill_histogram
        self.expect("OP", "(")
        first = self.parse_expr()
        hist = None
        if self.at("OP", ","):
            comma = self.next()
            if not isinstance(first, Name):
                raise QuerySyntaxError(
                    "the histogram label in a two-argument fill_histogram must be a plain name",
                    first.span or comma.span,
                )
            hist = first.id
            first = self.parse_expr()
        self.expect("OP", ")")
        self.expect("NEWLINE")
        return Fill(hist, first, span=self._span(start))

    def parse_block(self) -> list[Stmt]:
        self.expect("OP", ":")
        self.expect("NEWLINE")
        self.expect("INDENT")
        stmts = [self.parse_statement()]
        while not self.at("DEDENT") and not self.at("EOF"):
            stmts.append(self.parse_statement())
        self.expect("DEDENT")
        return stmts

    # expressions

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("KEYWORD", "or"):
            start = left.span
            self.next()
            right = self.parse_and()
            left = BoolOp("or", left, right, span=start)
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.at("KEYWORD", "and"):
            start = left.span
            self.next()
            right = self.parse_not()
            left = BoolOp("and", left, right, span=start)
        return left

    def parse_not(self) -> Expr:
        if self.at("KEYWORD", "not"):
            tok = self.next()
            return NotOp(self.parse_not(), span=tok.span)
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        left = self.parse_additive()
        while True:
            if self.at("KEYWORD", "is"):
                tok = self.next()
                negated = False
                if self.at("KEYWORD", "not"):
                    self.next()
                    negated = True
                self.expect("KEYWORD", "None")
                cls = IsNotNone if negated else IsNone
                left = cls(left, span=left.span or tok.span)
                continue
            tok = self.peek()
            if tok.kind == "OP" and tok.value in (">", "<", ">=", "<=", "==", "!="):
                self.next()
                right = self.parse_additive()
                left = BinOp(tok.value, left, right, span=left.span or tok.span)
                continue
            return left

    def parse_additive(self) -> Expr:
        left = self.parse_term()
        while self.at("OP", "+") or self.at("OP", "-"):
            op = self.next().value
            right = self.parse_term()
            left = BinOp(op, left, right, span=left.span)
        return left

    def parse_term(self) -> Expr:
        left = self.parse_unary()
        while self.at("OP", "*") or self.at("OP", "/"):
            op = self.next().value
            right = self.parse_unary()
            left = BinOp(op, left, right, span=left.span)
        return left

    def parse_unary(self) -> Expr:
        # Minus is only unary immediately before a numeric literal.
        if self.at("OP", "-") and self.peek(1).kind == "NUMBER":
            minus = self.next()
            num = self.next()
            return NumLit(-num.value, span=SourceSpan(minus.line, minus.col, num.line, num.end_col))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_atom()
        while True:
            if self.at("OP", "."):
                self.next()
                name = self.expect("NAME")
                expr = AttrAccess(expr, name.value, span=expr.span)
            elif self.at("OP", "["):
                self.next()
                index = self.parse_expr()
                self.expect("OP", "]")
                expr = IndexExpr(expr, index, span=expr.span)
            else:
                return expr

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return NumLit(tok.value, span=tok.span)
        if tok.kind == "KEYWORD" and tok.value == "None":
            self.next()
            return NoneLit(span=tok.span)
        if tok.kind == "OP" and tok.value == "(":
            self.next()
            expr = self.parse_expr()
            self.expect("OP", ")")
            return expr
        if tok.kind == "NAME":
            if self.peek(1).kind == "OP" and self.peek(1).value == "(":
                return self.parse_call()
            self.next()
            return Name(tok.value, span=tok.span)
        raise QuerySyntaxError(f"expected an expression, got {self._show(tok)}", tok.span)

    def parse_call(self) -> Expr:
        name = self.next()
        self.expect("OP", "(")
        args = [self.parse_expr()]
        while self.at("OP", ","):
            self.next()
            args.append(self.parse_expr())
        close = self.expect("OP", ")")
        span = SourceSpan(name.line, name.col, close.line, close.end_col)
        func = name.value
        if func == "fill_histogram":
            raise QuerySyntaxError("fill_histogram is a statement, not an expression", span)
        if func == "range":
            raise QuerySyntaxError("range(...) is only allowed as a for-loop iterable", span)
        if func == "len":
            if len(args) != 1:
                raise QuerySyntaxError(f"len expects 1 argument, got {len(args)}", span)
            return LenExpr(args[0], span=span)
        if func in MATH_FUNCS:
            if len(args) != 1:
                raise QuerySyntaxError(f"{func} expects 1 argument, got {len(args)}", span)
            return MathCall(func, args[0], span=span)
        raise QuerySyntaxError(f"unknown function {func!r}", span)


def parse(source: str) -> QueryAst:
    """Parse query source text into an AST; raises QuerySyntaxError with a span."""
    return _Parser(tokenize(source)).parse_program()
