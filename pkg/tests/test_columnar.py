import random

import numpy as np
import pytest

from splitq.errors import SchemaError, ValidationError
from splitq.store import (
    ColumnarDataset,
    concat_datasets,
    explode,
    materialize,
    materialize_entry,
    partition_byte_size,
    partition_ranges,
    slice_entries,
    validate,
)

from conftest import pairs_schema, pairs_value, random_dataset


def test_pairs_fixture_arrays(pairs_ds):
    assert pairs_ds.num_entries == 3
    assert pairs_ds.offsets["item"].tolist() == [0, 3, 3, 4]
    assert pairs_ds.offsets["item.item"].tolist() == [0, 4, 4, 6, 7]
    assert [chr(c) for c in pairs_ds.attributes["item.item.item.first"]] == list("abcdefg")
    assert pairs_ds.attributes["item.item.item.second"].tolist() == [1, 2, 3, 4, 5, 6, 7]


def test_pairs_fixture_materializes_back(pairs_ds):
    assert materialize(pairs_ds) == pairs_value()


def test_empty_dataset_same_schema():
    ds = explode([], pairs_schema())
    assert ds.num_entries == 0
    assert ds.offsets["item"].tolist() == [0]
    assert ds.offsets["item.item"].tolist() == [0]
    assert ds.attributes["item.item.item.first"].tolist() == []
    assert ds.attributes["item.item.item.second"].tolist() == []
    assert materialize(ds) == []


def test_explode_shape_mismatch_names_path():
    schema = pairs_schema()
    with pytest.raises(SchemaError) as err:
        explode([[{"first": "a", "second": 1}]], schema)  # list level missing
    assert "item.item" in str(err.value)

    with pytest.raises(SchemaError) as err:
        explode([[[{"first": "a"}]]], schema)  # missing field
    assert "second" in str(err.value)

    with pytest.raises(SchemaError) as err:
        explode([[[{"first": "ab", "second": 1}]]], schema)
    assert "first" in str(err.value)


def test_explode_rejects_bool_and_range():
    schema = pairs_schema()
    with pytest.raises(SchemaError):
        explode([[[{"first": "a", "second": True}]]], schema)
    with pytest.raises(SchemaError):
        explode([[[{"first": "a", "second": 2**63}]]], schema)


def test_validate_clean(pairs_ds):
    assert validate(pairs_ds) == []


def test_validate_monotonicity_violation(pairs_ds):
    bad = ColumnarDataset(
        pairs_ds.schema,
        {"item": np.array([0, 3, 2, 4]), "item.item": pairs_ds.offsets["item.item"]},
        dict(pairs_ds.attributes),
        3,
    )
    violations = validate(bad)
    mono = [v for v in violations if "non-decreasing" in v.rule]
    assert len(mono) == 1
    assert mono[0].path == "item" and mono[0].index == 2


def test_validate_terminal_count_violation(pairs_ds):
    bad = ColumnarDataset(
        pairs_ds.schema,
        {"item": np.array([0, 3, 3, 5]), "item.item": pairs_ds.offsets["item.item"]},
        dict(pairs_ds.attributes),
        3,
    )
    violations = validate(bad)
    assert any("terminal offset" in v.rule and v.path == "item" for v in violations)


def test_validate_reports_missing_and_extra_arrays(pairs_ds):
    bad = ColumnarDataset(pairs_ds.schema, dict(pairs_ds.offsets), {}, 3)
    rules = {v.rule for v in validate(bad)}
    assert "missing attribute array" in rules


def test_materialize_rejects_invalid():
    ds = ColumnarDataset(
        pairs_schema(),
        {"item": np.array([0, 2]), "item.item": np.array([0])},
        {
            "item.item.item.first": np.array([], dtype=np.uint8),
            "item.item.item.second": np.array([], dtype=np.int64),
        },
        1,
    )
    with pytest.raises(ValidationError):
        materialize(ds)


def test_slice_first_event(pairs_ds):
    s = slice_entries(pairs_ds, 0, 1)
    assert s.num_entries == 1
    assert s.offsets["item"].tolist() == [0, 3]
    assert s.offsets["item.item"].tolist() == [0, 4, 4, 6]
    assert [chr(c) for c in s.attributes["item.item.item.first"]] == list("abcdef")
    assert s.attributes["item.item.item.second"].tolist() == [1, 2, 3, 4, 5, 6]
    assert materialize(s) == pairs_value()[:1]


def test_slice_empty_middle_event(pairs_ds):
    s = slice_entries(pairs_ds, 1, 2)
    assert s.num_entries == 1
    assert s.offsets["item"].tolist() == [0, 0]
    assert s.offsets["item.item"].tolist() == [0]
    assert s.attributes["item.item.item.second"].tolist() == []
    assert materialize(s) == [[]]


def test_slice_bounds(pairs_ds):
    with pytest.raises(IndexError):
        slice_entries(pairs_ds, 0, 4)
    with pytest.raises(IndexError):
        slice_entries(pairs_ds, -1, 2)
    with pytest.raises(IndexError):
        slice_entries(pairs_ds, 2, 1)


def test_slice_concat_random_split_points():
    rng = random.Random(7)
    for _ in range(50):
        schema, value = random_dataset(rng)
        ds = explode(value, schema)
        if ds.num_entries == 0:
            continue
        cut = rng.randint(0, ds.num_entries)
        left = slice_entries(ds, 0, cut)
        right = slice_entries(ds, cut, ds.num_entries)
        glued = concat_datasets([left, right])
        assert glued.equals(ds)
        assert materialize(glued) == value


def test_explode_materialize_random_round_trip():
    rng = random.Random(99)
    for _ in range(100):
        schema, value = random_dataset(rng)
        ds = explode(value, schema)
        assert validate(ds) == []
        assert materialize(ds) == value
        again = explode(materialize(ds), schema)
        assert again.equals(ds)


def test_materialize_entry_matches_materialize(pairs_ds):
    whole = materialize(pairs_ds)
    for i in range(3):
        assert materialize_entry(pairs_ds, i) == whole[i]


def test_partition_ranges_cover_and_disjoint():
    for n, k in [(10, 3), (0, 2), (7, 7), (5, 1), (3, 5)]:
        ranges = partition_ranges(n, k)
        assert len(ranges) == k
        assert ranges[0][0] == 0 and ranges[-1][1] == n
        for (a1, b1), (a2, b2) in zip(ranges, ranges[1:]):
            assert b1 == a2 and a1 <= b1


def test_partition_byte_size_matches_slice(muons_1k):
    for lo, hi in [(0, 250), (250, 1000), (100, 100)]:
        expected = slice_entries(muons_1k, lo, hi).nbytes
        assert partition_byte_size(muons_1k, lo, hi) == expected


def test_arrays_are_read_only(pairs_ds):
    with pytest.raises(ValueError):
        pairs_ds.offsets["item"][0] = 5
