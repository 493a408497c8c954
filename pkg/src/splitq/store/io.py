"""On-disk dataset directory format.

A dataset directory contains:

* ``schema.json``: the schema tree;
* one raw little-endian binary file per array, named after the node path:
  ``<path>.i64`` for offsets and int64 attributes, ``<path>.f64`` for float64
  attributes, ``<path>.u8`` for char attributes;
* ``manifest.json``: entry count plus, for every array file, its role,
  dtype, length, and SHA-256 checksum. No compression.

The round trip through write/read is bit-exact, including float payloads.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..errors import ChecksumError, DatasetFormatError, LengthMismatchError, MissingArrayError
from .columnar import ColumnarDataset, assert_valid
from .schema import CHAR, FLOAT64, INT64, Schema

MANIFEST_NAME = "manifest.json"
SCHEMA_NAME = "schema.json"

_SUFFIX = {FLOAT64: ".f64", INT64: ".i64", CHAR: ".u8"}
_WIRE_DTYPE = {FLOAT64: "<f8", INT64: "<i8", CHAR: "u1"}


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_dataset(dataset: ColumnarDataset, directory) -> dict:
    """Write the dataset into ``directory`` and return the manifest dict."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    schema_bytes = (json.dumps(dataset.schema.to_json(), indent=2, sort_keys=True) + "\n").encode()
    (directory / SCHEMA_NAME).write_bytes(schema_bytes)

    entries = []
    kinds = dict(dataset.schema.attribute_paths())
    for role, arrays in (("offsets", dataset.offsets), ("values", dataset.attributes)):
        for path in sorted(arrays):
            kind = INT64 if role == "offsets" else kinds[path]
            data = np.ascontiguousarray(arrays[path], dtype=_WIRE_DTYPE[kind]).tobytes()
            filename = path + _SUFFIX[kind]
            (directory / filename).write_bytes(data)
            entries.append(
                {
                    "path": path,
                    "role": role,
                    "dtype": kind,
                    "file": filename,
                    "length": int(len(arrays[path])),
                    "sha256": _sha256(data),
                }
            )

    total_bytes = sum(
        e["length"] * np.dtype(_WIRE_DTYPE[e["dtype"]]).itemsize for e in entries
    )
    manifest = {
        "format": "splitq-dataset",
        "version": 1,
        "num_entries": int(dataset.num_entries),
        "schema_file": SCHEMA_NAME,
        "schema_sha256": _sha256(schema_bytes),
        "arrays": entries,
        "total_bytes": int(total_bytes),
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_manifest(directory) -> dict:
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    if not path.exists():
        raise MissingArrayError(f"no {MANIFEST_NAME} in {directory}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"unparseable manifest: {exc}") from exc
    if manifest.get("format") != "splitq-dataset":
        raise DatasetFormatError(f"{path} is not a splitq dataset manifest")
    return manifest


def read_dataset(directory) -> ColumnarDataset:
    """Load a dataset directory, verifying checksums and lengths."""
    directory = Path(directory)
    manifest = read_manifest(directory)

    schema_path = directory / manifest["schema_file"]
    if not schema_path.exists():
        raise MissingArrayError(f"missing schema file {schema_path.name}")
    schema_bytes = schema_path.read_bytes()
    if _sha256(schema_bytes) != manifest["schema_sha256"]:
        raise ChecksumError(f"checksum mismatch for {schema_path.name}")
    schema = Schema.from_json(json.loads(schema_bytes))

    offsets: dict[str, np.ndarray] = {}
    attributes: dict[str, np.ndarray] = {}
    for entry in manifest["arrays"]:
        file_path = directory / entry["file"]
        if not file_path.exists():
            raise MissingArrayError(f"missing array file {entry['file']}")
        data = file_path.read_bytes()
        wire = np.dtype(_WIRE_DTYPE[entry["dtype"]])
        if len(data) != entry["length"] * wire.itemsize:
            raise LengthMismatchError(
                f"{entry['file']}: {len(data)} bytes, manifest says "
                f"{entry['length']} x {wire.itemsize}"
            )
        if _sha256(data) != entry["sha256"]:
            raise ChecksumError(f"checksum mismatch for {entry['file']}")
        arr = np.frombuffer(data, dtype=wire)
        if wire.byteorder == "<":
            arr = arr.astype(wire.newbyteorder("="), copy=False)
        if entry["role"] == "offsets":
            offsets[entry["path"]] = arr
        else:
            attributes[entry["path"]] = arr

    dataset = ColumnarDataset(schema, offsets, attributes, manifest["num_entries"])
    assert_valid(dataset)
    return dataset
