from pathlib import Path

from splitq import corpus
from splitq.compiler import (
    FlatLoopIR,
    NumEntriesIR,
    OffsetIR,
    emit_text,
    flatten,
    infer_types,
    transform,
)
from splitq.engine import QueryJob
from splitq.qlang import parse
from splitq.store import explode, generate_events, muon_schema

from conftest import pairs_schema, pairs_value
from test_transform import NEST_SRC

GOLDEN = Path(__file__).parent / "golden"


def lower(src, schema):
    return transform(infer_types(parse(src), schema))


def test_nest_collapses_to_single_loop():
    program = flatten(lower(NEST_SRC, pairs_schema()))
    assert program.flattened
    (loop,) = program.statements
    assert isinstance(loop, FlatLoopIR)
    assert loop.count == OffsetIR("item.item", OffsetIR("item", NumEntriesIR()))
    assert emit_text(program) == (GOLDEN / "pairs_nest_flat.ir").read_text()


def test_nest_bound_evaluates_to_seven():
    # On the canonical fixture the collapsed bound walks the offsets arrays:
    # inner[outer[3]] = inner[4] = 7 elements.
    ds = explode(pairs_value(), pairs_schema())
    outer = ds.offsets["item"]
    inner = ds.offsets["item.item"]
    assert int(inner[outer[ds.num_entries]]) == 7


def test_all_pt_flattens_golden():
    program = flatten(lower(corpus.query_source("all_pt"), muon_schema()))
    assert program.flattened
    assert emit_text(program) == (GOLDEN / "all_pt_flat.ir").read_text()


def test_accumulator_blocks_flattening():
    program = flatten(lower(corpus.query_source("max_pt"), muon_schema()))
    assert not program.flattened


def test_forrange_blocks_flattening():
    program = flatten(lower(corpus.query_source("mass_of_pairs"), muon_schema()))
    assert not program.flattened


def test_conditional_blocks_flattening():
    src = (
        "for event in dataset:\n"
        "  for m in event.muons:\n"
        "    if m.pt > 10.0:\n"
        "      fill_histogram(m.pt)\n"
    )
    program = flatten(lower(src, muon_schema()))
    assert not program.flattened


def test_optional_blocks_flattening():
    program = flatten(lower(corpus.query_source("eta_of_best"), muon_schema()))
    assert not program.flattened


def test_outer_index_reference_blocks_flattening():
    # len(event.muons) in the innermost body reads per-level lengths.
    src = (
        "for event in dataset:\n"
        "  for m in event.muons:\n"
        "    fill_histogram(m.pt + len(event.muons))\n"
    )
    program = flatten(lower(src, muon_schema()))
    assert not program.flattened


def test_single_root_loop_not_marked():
    src = "for event in dataset:\n  fill_histogram(len(event.muons))\n"
    program = flatten(lower(src, muon_schema()))
    assert not program.flattened


def test_multiple_fills_still_flatten():
    src = (
        "for event in dataset:\n"
        "  for m in event.muons:\n"
        "    fill_histogram(pts, m.pt)\n"
        "    fill_histogram(etas, m.eta)\n"
    )
    program = flatten(lower(src, muon_schema()))
    assert program.flattened
    assert len(program.statements[0].body) == 2


def test_flatten_preserves_histograms():
    data = generate_events(10_000, seed=77)
    name = "all_pt"
    job = QueryJob.prepare(
        corpus.query_source(name), data.schema, {name: corpus.default_spec(name)}
    )
    assert job.flattened_program.flattened
    plain, _ = job.run(data, engine="flat", record_fills=True)
    collapsed, collapsed_fills = job.run(data, engine="flat-flattened", record_fills=True)
    plain_again, plain_fills = job.run(data, engine="flat", record_fills=True)
    assert plain == collapsed == plain_again
    assert collapsed_fills == plain_fills


def test_flatten_idempotent():
    program = flatten(lower(corpus.query_source("all_pt"), muon_schema()))
    assert flatten(program) is program
