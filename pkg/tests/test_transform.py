from pathlib import Path

from splitq import corpus
from splitq.compiler import (
    AssignIR,
    BinIR,
    ConstIR,
    FillIR,
    ForOffsetsIR,
    ForRangeIR,
    IfIR,
    LoadIR,
    OffsetIR,
    VarIR,
    emit_text,
    infer_types,
    transform,
)
from splitq.qlang import parse
from splitq.store import muon_schema

from conftest import pairs_schema

GOLDEN = Path(__file__).parent / "golden"

NEST_SRC = (
    "for outerlist in dataset:\n"
    "  for innerlist in outerlist:\n"
    "    for pair in innerlist:\n"
    "      fill_histogram(pair.second)\n"
)


def lower(src, schema):
    return transform(infer_types(parse(src), schema))


def test_triple_nest_structure():
    program = lower(NEST_SRC, pairs_schema())
    (outer,) = program.statements
    assert isinstance(outer, ForOffsetsIR) and outer.offsets is None
    (inner,) = outer.body
    assert inner.offsets == "item" and inner.parent == VarIR("outerlist", "i64")
    (leaf,) = inner.body
    assert leaf.offsets == "item.item" and leaf.parent == VarIR("innerlist", "i64")
    (fill,) = leaf.body
    assert fill == FillIR(None, LoadIR("item.item.item.second", VarIR("pair", "i64"), "i64"))


def test_triple_nest_golden_text():
    program = lower(NEST_SRC, pairs_schema())
    assert emit_text(program) == (GOLDEN / "pairs_nest.ir").read_text()


def test_corpus_golden_texts():
    for name in ("max_pt", "eta_of_best", "mass_of_pairs", "pt_sum_of_pairs", "all_pt"):
        program = lower(corpus.query_source(name), muon_schema())
        assert emit_text(program) == (GOLDEN / f"{name}.ir").read_text(), name


def test_single_loop_len_rule():
    src = "for event in dataset:\n  fill_histogram(len(event.muons))\n"
    program = lower(src, muon_schema())
    (loop,) = program.statements
    assert isinstance(loop, ForOffsetsIR) and loop.offsets is None
    (fill,) = loop.body
    ev = VarIR("event", "i64")
    assert fill.value == BinIR(
        "-",
        OffsetIR("item.muons", BinIR("+", ev, ConstIR(1, "i64"), "i64")),
        OffsetIR("item.muons", ev),
        "i64",
    )


def test_index_rule_offsets_plus_i():
    program = lower(corpus.query_source("mass_of_pairs"), muon_schema())
    loop_j = program.statements[0].body[1].body[0]
    assert isinstance(loop_j, ForRangeIR)
    m1_assign = loop_j.body[0]
    assert m1_assign == AssignIR(
        "m1",
        "i64",
        BinIR("+", OffsetIR("item.muons", VarIR("event", "i64")), VarIR("i", "i64"), "i64"),
    )


def test_none_compiles_to_sentinel():
    program = lower(corpus.query_source("eta_of_best"), muon_schema())
    body = program.statements[0].body
    assert body[1] == AssignIR("best", "i64", ConstIR(-1, "i64"))
    guard = body[3]
    assert isinstance(guard, IfIR)
    assert guard.cond == BinIR("!=", VarIR("best", "i64"), ConstIR(-1, "i64"), "bool")


def test_ir_is_object_free():
    # Every variable in every corpus program is an integer, float, or bool
    # register; nothing list- or record-typed survives lowering.
    allowed = {"i64", "f64", "bool"}
    for name in corpus.ALL_QUERIES:
        program = lower(corpus.query_source(name), muon_schema())
        assert set(program.var_dtypes.values()) <= allowed
        for e in program.iter_exprs():
            if isinstance(e, VarIR):
                assert e.dtype in allowed
            if isinstance(e, LoadIR):
                assert e.dtype in ("i64", "f64")


def test_array_refs_reported():
    program = lower(corpus.query_source("max_pt"), muon_schema())
    assert program.offsets_refs() == ["item.muons"]
    assert program.attribute_refs() == ["item.muons.item.pt"]


def test_list_snapshot_variable():
    src = (
        "for event in dataset:\n"
        "  ml = event.muons\n"
        "  for m in ml:\n"
        "    fill_histogram(m.pt)\n"
    )
    program = lower(src, muon_schema())
    body = program.statements[0].body
    assert body[0] == AssignIR("ml", "i64", VarIR("event", "i64"))
    loop = body[1]
    assert loop.offsets == "item.muons" and loop.parent == VarIR("ml", "i64")


def test_sequential_loop_variable_reuse():
    src = (
        "for event in dataset:\n"
        "  for m in event.muons:\n"
        "    fill_histogram(m.pt)\n"
        "  for m in event.muons:\n"
        "    fill_histogram(m.eta)\n"
    )
    program = lower(src, muon_schema())
    first, second = program.statements[0].body
    assert first.var == "m" and second.var == "m"
    assert first.offsets == second.offsets == "item.muons"
