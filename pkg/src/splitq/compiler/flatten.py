"""Collapse total, sequential loop nests into one flat loop.

A program qualifies when it is a single nest of per-level loops that visits
every element at every level, and the innermost body is nothing but fills
whose expressions read leaf attribute arrays at the innermost index. Such a
nest walks the innermost attribute arrays start to end, so it can run as one
loop of the form::

    for (k = 0; k < offsets_inner[offsets_outer[num_entries]]; k++)

Accumulator assignments, conditionals, explicit ranges, or any reference to
outer indices or per-level lengths disqualify the program; it is returned
unchanged with ``flattened`` still False. The check is deliberately
conservative: missing a safe case is fine, rewriting an unsafe one is not.
"""

from __future__ import annotations

from dataclasses import replace

from .ir import (
    BinIR,
    CallIR,
    ConstIR,
    FillIR,
    FlatLoopIR,
    FlatProgram,
    ForOffsetsIR,
    LoadIR,
    NumEntriesIR,
    OffsetIR,
    VarIR,
)


def flatten(program: FlatProgram) -> FlatProgram:
    """Return the flattened program when the nest qualifies, else the input."""
    if program.flattened:
        return program
    if len(program.statements) != 1:
        return program
    root = program.statements[0]
    if not isinstance(root, ForOffsetsIR) or root.offsets is not None:
        return program

    # Walk down the nest: each level must contain exactly one child loop that
    # iterates the level below it, until a body of fills.
    offsets_chain: list[str] = []
    loop = root
    while True:
        body = loop.body
        if len(body) == 1 and isinstance(body[0], ForOffsetsIR):
            child = body[0]
            if child.offsets is None or child.parent != VarIR(loop.var, "i64"):
                return program
            offsets_chain.append(child.offsets)
            loop = child
            continue
        break

    if not offsets_chain:
        return program  # already a single loop over entries; nothing to collapse
    if not all(isinstance(s, FillIR) for s in loop.body):
        return program
    inner_var = loop.var
    if not all(_reads_only_leaf(s.value, inner_var) for s in loop.body):
        return program

    count = NumEntriesIR()
    for off in offsets_chain:
        count = OffsetIR(off, count)
    flat = FlatLoopIR(inner_var, count, loop.body)
    return replace(program, statements=[flat], flattened=True)


def _reads_only_leaf(e, inner_var: str) -> bool:
    """True when the expression is pure arithmetic over loads at inner_var."""
    if isinstance(e, ConstIR):
        return True
    if isinstance(e, LoadIR):
        return e.index == VarIR(inner_var, "i64")
    if isinstance(e, BinIR):
        return _reads_only_leaf(e.left, inner_var) and _reads_only_leaf(e.right, inner_var)
    if isinstance(e, CallIR):
        return _reads_only_leaf(e.arg, inner_var)
    # VarIR (any loop index or scalar), OffsetIR (per-level lengths), NotIR:
    # all disqualify.
    return False
