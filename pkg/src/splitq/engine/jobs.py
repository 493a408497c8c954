"""Query jobs: parse/type/lower once, run under any engine.

Engines:

* ``baseline``: materializes each event as Python objects and interprets the
  AST (the slow reference path);
* ``flat``: executes the lowered loop program over the raw arrays;
* ``flat-flattened``: same, after the total-sequential nest collapse (a
  no-op for programs where the collapse does not apply).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..compiler.flatten import flatten
from ..compiler.infer import TypedQuery, infer_types
from ..compiler.ir import FlatProgram
from ..compiler.transform import transform
from ..errors import ExecutionError
from ..qlang.parser import parse
from ..store.columnar import ColumnarDataset
from ..store.schema import Schema
from .baseline import run_baseline
from .histogram import Histogram, HistogramSpec
from .kernels import run_flat

ENGINES = ("baseline", "flat", "flat-flattened")


@dataclass
class QueryJob:
    """A runnable query bound to a schema and histogram specs."""

    source: str
    schema: Schema
    specs: dict[str, HistogramSpec]
    typed: TypedQuery = field(repr=False)
    program: FlatProgram = field(repr=False)
    flattened_program: FlatProgram = field(repr=False)

    @classmethod
    def prepare(cls, source: str, schema: Schema, specs: dict[str, HistogramSpec]) -> "QueryJob":
        typed = infer_types(parse(source), schema)
        program = transform(typed)
        return cls(
            source=source,
            schema=schema,
            specs=dict(specs),
            typed=typed,
            program=program,
            flattened_program=flatten(program),
        )

    def run(
        self,
        dataset: ColumnarDataset,
        engine: str = "flat",
        kernel: str = "auto",
        record_fills: bool = False,
    ) -> tuple[dict[str, Histogram], list | None]:
        if engine == "baseline":
            return run_baseline(self.typed, dataset, self.specs, record_fills=record_fills)
        if engine == "flat":
            return run_flat(self.program, dataset, self.specs, kernel=kernel, record_fills=record_fills)
        if engine == "flat-flattened":
            return run_flat(
                self.flattened_program, dataset, self.specs, kernel=kernel, record_fills=record_fills
            )
        raise ExecutionError(f"unknown engine {engine!r} (choose from {', '.join(ENGINES)})")
