"""splitq: a desk-scale query engine for nested event data.

Nested datasets are stored exploded into flat offsets/attribute arrays;
object-style analysis loops are compiled into flat loops over those arrays;
histogram queries run either on a single machine (baseline interpreter,
compiled kernel, or pure-Python kernel) or across simulated workers that
pull work with cache affinity.
"""

from . import cluster, compiler, corpus, engine, qlang, store
from .errors import (
    AggregationError,
    ChecksumError,
    ConfigError,
    DatasetFormatError,
    ExecutionError,
    LengthMismatchError,
    MissingArrayError,
    ProtocolError,
    QueryError,
    QuerySyntaxError,
    QueryTypeError,
    SchemaError,
    SplitQError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationError",
    "ChecksumError",
    "ConfigError",
    "DatasetFormatError",
    "ExecutionError",
    "LengthMismatchError",
    "MissingArrayError",
    "ProtocolError",
    "QueryError",
    "QuerySyntaxError",
    "QueryTypeError",
    "SchemaError",
    "SplitQError",
    "ValidationError",
    "__version__",
    "cluster",
    "compiler",
    "corpus",
    "engine",
    "qlang",
    "store",
]
