import json
import struct
import subprocess
import sys
import textwrap

import pytest

from splitq.engine import kernels, opcodes
from splitq.engine.pyloop import compile_program
from splitq.compiler import infer_types, transform
from splitq.qlang import parse
from splitq.store import muon_schema
from splitq import corpus
from splitq.engine.histogram import HistogramSpec


def test_opcode_tables_agree():
    if kernels.HAVE_COMPILED:
        from splitq.engine import _fastloop

        assert _fastloop.OPCODE_TABLE == opcodes.TABLE


@pytest.mark.skipif(not kernels.HAVE_COMPILED, reason="compiled kernel not built")
def test_compiled_nan_is_canonical():
    from splitq.engine import _fastloop

    assert _fastloop.NAN_BITS == struct.unpack("<Q", struct.pack("<d", float("nan")))[0]


def test_generated_python_source_is_deterministic():
    program = transform(infer_types(parse(corpus.query_source("max_pt")), muon_schema()))
    spec = corpus.default_spec("max_pt")
    _, _, _, src1 = compile_program(program, [spec], {None: 0}, record=False)
    _, _, _, src2 = compile_program(program, [spec], {None: 0}, record=False)
    assert src1 == src2
    assert "for v_event in range(_NE):" in src1


def test_requesting_missing_compiled_kernel_raises(monkeypatch):
    monkeypatch.setattr(kernels, "HAVE_COMPILED", False)
    from splitq.errors import ExecutionError

    with pytest.raises(ExecutionError):
        kernels._resolve_kernel("compiled")
    assert kernels._resolve_kernel("auto") in ("compiled", "python")


def test_package_falls_back_without_extension():
    """Import with the extension masked; queries must still run, pure Python."""
    script = textwrap.dedent(
        """
        import json
        import sys

        sys.modules["splitq.engine._fastloop"] = None  # force ImportError on import

        from splitq.engine import kernels
        assert not kernels.HAVE_COMPILED
        assert kernels.DEFAULT_KERNEL == "python"
        assert kernels.available_kernels() == ["python"]

        from splitq import corpus
        from splitq.engine import QueryJob
        from splitq.store import generate_events

        data = generate_events(2000, seed=7)
        name = "eta_of_best"
        job = QueryJob.prepare(
            corpus.query_source(name), data.schema, {name: corpus.default_spec(name)}
        )
        hists, fills = job.run(data, engine="flat", record_fills=True)
        hb, fb = job.run(data, engine="baseline", record_fills=True)
        assert hists == hb and fills == fb
        print(json.dumps({"fills": hists[name].num_fills}))
        """
    )
    out = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, timeout=120
    )
    assert out.returncode == 0, out.stderr
    assert json.loads(out.stdout)["fills"] > 0
