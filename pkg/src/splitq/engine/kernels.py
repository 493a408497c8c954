"""Flat-program execution with kernel selection.

Two kernels implement identical semantics:

* ``compiled``: the Cython register VM (splitq.engine._fastloop), built at
  install time when a C toolchain is available;
* ``python``: the generated-Python fallback (splitq.engine.pyloop).

The default (``auto``) picks the compiled kernel when present. Results are
bit-identical across kernels and against the baseline interpreter; the
differential tests enforce it.
"""

from __future__ import annotations

import numpy as np

from ..compiler.ir import FlatProgram
from ..errors import ExecutionError
from ..store.columnar import ColumnarDataset
from . import opcodes, pyloop
from .baseline import resolve_fill_names
from .bytecode import assemble
from .histogram import Histogram, HistogramSpec

try:
    from . import _fastloop
except ImportError:  # pure-Python install
    _fastloop = None

if _fastloop is not None and _fastloop.OPCODE_TABLE != opcodes.TABLE:
    raise ImportError(
        "splitq.engine._fastloop was built against a different opcode table; rebuild the extension"
    )

HAVE_COMPILED = _fastloop is not None
DEFAULT_KERNEL = "compiled" if HAVE_COMPILED else "python"


def available_kernels() -> list[str]:
    return ["compiled", "python"] if HAVE_COMPILED else ["python"]


def _resolve_kernel(kernel: str) -> str:
    if kernel == "auto":
        return DEFAULT_KERNEL
    if kernel == "compiled" and not HAVE_COMPILED:
        raise ExecutionError("compiled kernel requested but the extension is not built")
    if kernel not in ("compiled", "python"):
        raise ExecutionError(f"unknown kernel {kernel!r} (use auto, compiled, or python)")
    return kernel


def _bind(program: FlatProgram, specs: dict[str, HistogramSpec]):
    """Fill-label -> hist id binding plus specs in id order."""
    label_to_name = resolve_fill_names(program.fill_names, specs)
    names = list(specs)
    hist_ids = {label: names.index(name) for label, name in label_to_name.items()}
    return hist_ids, [specs[n] for n in names], names


def run_flat(
    program: FlatProgram,
    dataset: ColumnarDataset,
    specs: dict[str, HistogramSpec],
    kernel: str = "auto",
    record_fills: bool = False,
):
    """Execute a flat program over a dataset.

    Returns (histograms, fills): histograms keyed by spec name; fills a list
    of (spec_name, value) in fill order when record_fills, else None.
    """
    if program.schema != dataset.schema:
        raise ExecutionError("program was compiled for a different schema")
    kernel = _resolve_kernel(kernel)
    hist_ids, specs_in_order, names = _bind(program, specs)
    if kernel == "compiled":
        return _run_compiled(program, dataset, specs_in_order, names, hist_ids, record_fills)
    return _run_python(program, dataset, specs_in_order, names, hist_ids, record_fills)


def _run_python(program, dataset, specs_in_order, names, hist_ids, record_fills):
    cache_key = (
        "pyloop",
        tuple(hist_ids.items()),
        tuple((s.name, s.num_bins, s.lo, s.hi) for s in specs_in_order),
        record_fills,
    )
    cached = getattr(program, "_kernel_cache", None)
    if cached is None:
        cached = {}
        program._kernel_cache = cached
    entry = cached.get(cache_key)
    if entry is None:
        entry = pyloop.compile_program(program, specs_in_order, hist_ids, record_fills)
        cached[cache_key] = entry
    fn, offsets_keys, values_keys, _src = entry

    arrays = pyloop.as_lists(dataset, offsets_keys, values_keys)
    results, fills = fn(dataset.num_entries, *arrays)

    hists = {}
    for h, spec in enumerate(specs_in_order):
        counts, under, over, nfills = results[h]
        hists[names[h]] = Histogram(spec, counts, under, over, nfills)
    out_fills = None
    if record_fills:
        out_fills = [(names[h], v) for h, v in fills]
    return hists, out_fills


def _run_compiled(program, dataset, specs_in_order, names, hist_ids, record_fills):
    cached = getattr(program, "_kernel_cache", None)
    if cached is None:
        cached = {}
        program._kernel_cache = cached
    cache_key = ("bytecode", tuple(hist_ids.items()))
    bc = cached.get(cache_key)
    if bc is None:
        bc = assemble(program, hist_ids)
        cached[cache_key] = bc

    iarrays = []
    for kind, path in bc.iarray_keys:
        iarrays.append(dataset.offsets[path] if kind == "offsets" else dataset.attributes[path])
    farrays = [dataset.attributes[path] for path in bc.farray_keys]

    n_hists = len(specs_in_order)
    lo = np.asarray([s.lo for s in specs_in_order], dtype=np.float64)
    width = np.asarray([s.width for s in specs_in_order], dtype=np.float64)
    hi = np.asarray([s.hi for s in specs_in_order], dtype=np.float64)
    nbins = np.asarray([s.num_bins for s in specs_in_order], dtype=np.int64)
    counts_base = np.zeros(n_hists, dtype=np.int64)
    np.cumsum(nbins[:-1], out=counts_base[1:])
    counts = np.zeros(int(nbins.sum()), dtype=np.int64)
    under = np.zeros(n_hists, dtype=np.int64)
    over = np.zeros(n_hists, dtype=np.int64)
    nfills = np.zeros(n_hists, dtype=np.int64)

    rec = _fastloop.run(
        bc.code,
        bc.fconsts,
        iarrays,
        farrays,
        bc.n_iregs,
        bc.n_fregs,
        dataset.num_entries,
        lo,
        width,
        hi,
        nbins,
        counts,
        counts_base,
        under,
        over,
        nfills,
        record_fills,
    )

    hists = {}
    for h, spec in enumerate(specs_in_order):
        base = int(counts_base[h])
        hists[names[h]] = Histogram(
            spec,
            counts[base : base + spec.num_bins],
            int(under[h]),
            int(over[h]),
            int(nfills[h]),
        )
    out_fills = None
    if record_fills:
        ids, vals = rec
        out_fills = [(names[int(h)], float(v)) for h, v in zip(ids, vals)]
    return hists, out_fills
