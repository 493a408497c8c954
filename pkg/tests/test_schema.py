import pytest

from splitq.errors import SchemaError
from splitq.store import CHAR, FLOAT64, INT64, Primitive, Schema, list_of, record

from conftest import pairs_schema


def test_root_must_be_list():
    with pytest.raises(SchemaError):
        Schema(record({"x": Primitive(FLOAT64)}))


def test_record_field_names_checked():
    with pytest.raises(SchemaError):
        record({"": Primitive(FLOAT64)})
    with pytest.raises(SchemaError):
        record({"not a name": Primitive(FLOAT64)})
    with pytest.raises(SchemaError):
        record([("x", Primitive(FLOAT64)), ("x", Primitive(INT64))])
    with pytest.raises(SchemaError):
        record({})


def test_unknown_primitive_kind():
    with pytest.raises(SchemaError):
        Primitive("int32")


def test_pairs_schema_paths():
    schema = pairs_schema()
    assert schema.offsets_paths() == ["item", "item.item"]
    assert schema.attribute_paths() == [
        ("item.item.item.first", CHAR),
        ("item.item.item.second", INT64),
    ]
    assert isinstance(schema.node_at("item.item.item"), type(record({"a": Primitive(CHAR)})))


def test_json_round_trip():
    schema = pairs_schema()
    assert Schema.from_json(schema.to_json()) == schema

    nested = Schema(list_of(record({"m": list_of(Primitive(FLOAT64)), "n": Primitive(INT64)})))
    assert Schema.from_json(nested.to_json()) == nested


def test_json_rejects_garbage():
    with pytest.raises(SchemaError):
        Schema.from_json({"root": {"kind": "tuple"}})
    with pytest.raises(SchemaError):
        Schema.from_json({"no_root": 1})
