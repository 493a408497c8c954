"""Shared fixtures: canonical datasets and random structure generators."""

from __future__ import annotations

import random

import pytest

from splitq.qlang import astnodes as q
from splitq.store import (
    CHAR,
    FLOAT64,
    INT64,
    ColumnarDataset,
    Primitive,
    Schema,
    explode,
    generate_events,
    list_of,
    record,
)


def pairs_schema() -> Schema:
    """Two-level nesting: a dataset of lists of lists of (char, int) pairs."""
    pair = record({"first": Primitive(CHAR), "second": Primitive(INT64)})
    return Schema(list_of(list_of(list_of(pair))))


def pairs_value() -> list:
    """The canonical nested-pairs fixture with seven (letter, number) pairs."""

    def p(c, n):
        return {"first": c, "second": n}

    return [
        [[p("a", 1), p("b", 2), p("c", 3), p("d", 4)], [], [p("e", 5), p("f", 6)]],
        [],
        [[p("g", 7)]],
    ]


@pytest.fixture(scope="session")
def pairs_ds() -> ColumnarDataset:
    return explode(pairs_value(), pairs_schema())


@pytest.fixture(scope="session")
def muons_1k() -> ColumnarDataset:
    return generate_events(1000, seed=101)


@pytest.fixture(scope="session")
def muons_10k() -> ColumnarDataset:
    return generate_events(10_000, seed=202)


# --- random logical values over random schemas --------------------------------


def random_schema(rng: random.Random, max_depth: int = 4) -> Schema:
    fields_pool = ["a", "b", "c", "x", "y", "pt"]

    def node(depth):
        opts = ["prim"]
        if depth < max_depth:
            opts += ["list", "record"]
        kind = rng.choice(opts)
        if kind == "prim":
            return Primitive(rng.choice([FLOAT64, INT64, CHAR]))
        if kind == "list":
            return list_of(node(depth + 1))
        names = rng.sample(fields_pool, rng.randint(1, 3))
        return record({n: node(depth + 1) for n in sorted(names)})

    return Schema(list_of(node(1)))


def random_value(rng: random.Random, schema_node, max_items: int = 3):
    from splitq.store.schema import ListNode, RecordNode

    if isinstance(schema_node, ListNode):
        return [random_value(rng, schema_node.item, max_items) for _ in range(rng.randint(0, max_items))]
    if isinstance(schema_node, RecordNode):
        return {n: random_value(rng, c, max_items) for n, c in schema_node.fields}
    kind = schema_node.kind
    if kind == FLOAT64:
        return rng.choice([0.0, -0.0, 1.5, -273.15, rng.uniform(-1e6, 1e6)])
    if kind == INT64:
        return rng.randint(-(2**40), 2**40)
    return chr(rng.randint(32, 126))


def random_dataset(rng: random.Random, num_events_max: int = 6):
    schema = random_schema(rng)
    value = [random_value(rng, schema.root.item) for _ in range(rng.randint(0, num_events_max))]
    return schema, value


# --- random well-formed query ASTs -------------------------------------------------

_NAMES = ["a", "b", "c", "xx", "val", "pt", "muon", "ev"]
_HISTS = ["h", "mass", "out"]


def random_expr(rng: random.Random, depth: int = 0) -> q.Expr:
    leaf = depth >= 3 or rng.random() < 0.3
    if leaf:
        k = rng.random()
        if k < 0.4:
            return q.Name(rng.choice(_NAMES))
        if k < 0.7:
            return q.NumLit(rng.randint(-50, 500))
        value = rng.choice([0.0, 2.5, -1.25, 30.0, 1e-3, 12345.678, rng.uniform(-100, 100)])
        return q.NumLit(value)
    k = rng.random()
    if k < 0.35:
        return q.BinOp(
            rng.choice(["+", "-", "*", "/"]), random_expr(rng, depth + 1), random_expr(rng, depth + 1)
        )
    if k < 0.5:
        return q.BinOp(
            rng.choice([">", "<", ">=", "<=", "==", "!="]),
            random_expr(rng, depth + 1),
            random_expr(rng, depth + 1),
        )
    if k < 0.6:
        return q.BoolOp(
            rng.choice(["and", "or"]), random_expr(rng, depth + 1), random_expr(rng, depth + 1)
        )
    if k < 0.65:
        return q.NotOp(random_expr(rng, depth + 1))
    if k < 0.75:
        return q.MathCall(rng.choice(list(q.MATH_FUNCS)), random_expr(rng, depth + 1))
    if k < 0.8:
        return q.LenExpr(random_postfix(rng, depth + 1))
    if k < 0.9:
        return random_postfix(rng, depth + 1)
    if k < 0.95:
        return q.IsNone(random_postfix(rng, depth + 1))
    return q.IsNotNone(random_postfix(rng, depth + 1))


def random_postfix(rng: random.Random, depth: int = 0) -> q.Expr:
    """Name-rooted chains (the only shapes valid in object positions)."""
    e: q.Expr = q.Name(rng.choice(_NAMES))
    for _ in range(rng.randint(0, 2 if depth < 3 else 0)):
        if rng.random() < 0.6:
            e = q.AttrAccess(e, rng.choice(_NAMES))
        else:
            e = q.IndexExpr(e, random_expr(rng, depth + 1))
    return e


def random_stmts(rng: random.Random, depth: int = 0) -> list[q.Stmt]:
    n = rng.randint(1, 3)
    out: list[q.Stmt] = []
    for _ in range(n):
        k = rng.random()
        if depth >= 3 or k < 0.35:
            out.append(q.Assign(rng.choice(_NAMES), random_expr(rng)))
        elif k < 0.55:
            hist = rng.choice([None, rng.choice(_HISTS)])
            out.append(q.Fill(hist, random_expr(rng)))
        elif k < 0.7:
            orelse = random_stmts(rng, depth + 1) if rng.random() < 0.4 else []
            out.append(q.If(random_expr(rng), random_stmts(rng, depth + 1), orelse))
        elif k < 0.85:
            out.append(
                q.ForEach(rng.choice(_NAMES), random_postfix(rng), random_stmts(rng, depth + 1))
            )
        else:
            out.append(
                q.ForRange(
                    rng.choice(_NAMES),
                    random_expr(rng),
                    random_expr(rng),
                    random_stmts(rng, depth + 1),
                )
            )
    return out


def random_ast(rng: random.Random) -> q.QueryAst:
    return q.QueryAst(random_stmts(rng))
