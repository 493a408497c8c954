"""Lowering of flat programs to register bytecode for the compiled VM.

Registers live in two files (int64 and float64). Named variables get fixed
slots, every static loop gets a persistent slot for its upper bound, and
expression temporaries reuse a scratch region reset per statement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..compiler.ir import (
    AssignIR,
    BinIR,
    CallIR,
    ConstIR,
    FillIR,
    FlatLoopIR,
    FlatProgram,
    ForOffsetsIR,
    ForRangeIR,
    IfIR,
    LoadIR,
    NotIR,
    NumEntriesIR,
    OffsetIR,
    VarIR,
)
from ..errors import ExecutionError
from . import opcodes as op

_F_BINOPS = {"+": op.FADD, "-": op.FSUB, "*": op.FMUL, "/": op.FDIV}
_I_BINOPS = {"+": op.IADD, "-": op.ISUB, "*": op.IMUL}
_F_CMPS = {"<": op.FLT, "<=": op.FLE, ">": op.FGT, ">=": op.FGE, "==": op.FEQ, "!=": op.FNE}
_I_CMPS = {"<": op.ILT, "<=": op.ILE, ">": op.IGT, ">=": op.IGE, "==": op.IEQ, "!=": op.INE}
_MATH = {"sqrt": op.SQRT, "cosh": op.COSH, "cos": op.COS, "sin": op.SIN, "exp": op.EXP, "log": op.LOG}


@dataclass
class Bytecode:
    code: np.ndarray  # int64, shape (n_instructions * 4,)
    fconsts: np.ndarray
    n_iregs: int
    n_fregs: int
    iarray_keys: list[tuple[str, str]]  # (kind, path); kind is "offsets" or "values"
    farray_keys: list[str]
    hist_ids: dict[str | None, int]  # fill label -> hist slot


class _Assembler:
    def __init__(self, program: FlatProgram, hist_ids: dict[str | None, int]):
        self.program = program
        self.hist_ids = hist_ids
        self.instrs: list[list[int]] = []
        self.fconsts: list[float] = []

        self.ireg_of: dict[str, int] = {}
        self.freg_of: dict[str, int] = {}
        for name, dtype in program.var_dtypes.items():
            if dtype == "f64":
                self.freg_of[name] = len(self.freg_of)
            else:
                self.ireg_of[name] = len(self.ireg_of)

        n_loops = sum(
            isinstance(s, (ForOffsetsIR, ForRangeIR, FlatLoopIR)) for s in program.iter_statements()
        )
        self.bound_base = len(self.ireg_of)
        self.bounds_used = 0
        self.itemp_base = self.bound_base + n_loops
        self.ftemp_base = len(self.freg_of)
        self.itemp = 0
        self.ftemp = 0
        self.max_itemp = 0
        self.max_ftemp = 0

        self.iarray_ids: dict[tuple[str, str], int] = {}
        self.farray_ids: dict[str, int] = {}

    # --- helpers -------------------------------------------------------------

    def emit(self, *args) -> int:
        padded = list(args) + [0] * (op.INSTRUCTION_WIDTH - len(args))
        self.instrs.append(padded)
        return len(self.instrs) - 1

    def patch(self, idx: int, slot: int, value: int) -> None:
        self.instrs[idx][slot] = value

    def here(self) -> int:
        return len(self.instrs)

    def fconst(self, v: float) -> int:
        self.fconsts.append(float(v))
        return len(self.fconsts) - 1

    def alloc_bound(self) -> int:
        slot = self.bound_base + self.bounds_used
        self.bounds_used += 1
        return slot

    def alloc_temp(self, dtype: str) -> int:
        if dtype == "f64":
            slot = self.ftemp_base + self.ftemp
            self.ftemp += 1
            self.max_ftemp = max(self.max_ftemp, self.ftemp)
            return slot
        slot = self.itemp_base + self.itemp
        self.itemp += 1
        self.max_itemp = max(self.max_itemp, self.itemp)
        return slot

    def reset_temps(self) -> None:
        self.itemp = 0
        self.ftemp = 0

    def iarray(self, kind: str, path: str) -> int:
        return self.iarray_ids.setdefault((kind, path), len(self.iarray_ids))

    def farray(self, path: str) -> int:
        return self.farray_ids.setdefault(path, len(self.farray_ids))

    # --- expressions -----------------------------------------------------------

    def expr(self, e, dst: int | None = None) -> int:
        """Emit code leaving the value in a register; returns the register."""
        if isinstance(e, VarIR):
            reg = self.freg_of[e.name] if e.dtype == "f64" else self.ireg_of[e.name]
            if dst is None or dst == reg:
                return reg
            self.emit(op.FMOV if e.dtype == "f64" else op.IMOV, dst, reg)
            return dst
        if isinstance(e, ConstIR):
            out = self.alloc_temp(e.dtype) if dst is None else dst
            if e.dtype == "f64":
                self.emit(op.FCONST, out, self.fconst(e.value))
            else:
                self.emit(op.ICONST, out, int(e.value))
            return out
        if isinstance(e, NumEntriesIR):
            out = self.alloc_temp("i64") if dst is None else dst
            self.emit(op.LOADN, out)
            return out
        if isinstance(e, OffsetIR):
            return self._load(op.ILOAD, self.iarray("offsets", e.array), e.index, "i64", dst)
        if isinstance(e, LoadIR):
            if e.dtype == "f64":
                return self._load(op.FLOAD, self.farray(e.array), e.index, "f64", dst)
            return self._load(op.ILOAD, self.iarray("values", e.array), e.index, "i64", dst)
        if isinstance(e, BinIR):
            return self._binop(e, dst)
        if isinstance(e, NotIR):
            src = self.expr(e.operand)
            out = self.alloc_temp("i64") if dst is None else dst
            self.emit(op.NOT, out, src)
            return out
        if isinstance(e, CallIR):
            return self._call(e, dst)
        raise ExecutionError(f"cannot assemble {type(e).__name__}")

    def _load(self, load_op: int, array_id: int, index, dtype: str, dst: int | None) -> int:
        # Fuse the very common offsets[x + 1] pattern.
        actual_op = load_op
        if (
            load_op == op.ILOAD
            and isinstance(index, BinIR)
            and index.op == "+"
            and isinstance(index.right, ConstIR)
            and index.right.value == 1
        ):
            actual_op = op.ILOAD1
            index = index.left
        idx = self.expr(index)
        out = self.alloc_temp(dtype) if dst is None else dst
        self.emit(actual_op, out, array_id, idx)
        return out

    def _binop(self, e: BinIR, dst: int | None) -> int:
        if e.op in ("and", "or"):
            l = self.expr(e.left)
            r = self.expr(e.right)
            out = self.alloc_temp("i64") if dst is None else dst
            self.emit(op.AND if e.op == "and" else op.OR, out, l, r)
            return out
        if e.dtype == "bool":
            operand_dtype = e.left.dtype
            table = _F_CMPS if operand_dtype == "f64" else _I_CMPS
            l = self.expr(e.left)
            r = self.expr(e.right)
            out = self.alloc_temp("i64") if dst is None else dst
            self.emit(table[e.op], out, l, r)
            return out
        table = _F_BINOPS if e.dtype == "f64" else _I_BINOPS
        l = self.expr(e.left)
        r = self.expr(e.right)
        out = self.alloc_temp(e.dtype) if dst is None else dst
        self.emit(table[e.op], out, l, r)
        return out

    def _call(self, e: CallIR, dst: int | None) -> int:
        if e.func == "i2f":
            src = self.expr(e.arg)
            out = self.alloc_temp("f64") if dst is None else dst
            self.emit(op.I2F, out, src)
            return out
        if e.func == "abs":
            src = self.expr(e.arg)
            out = self.alloc_temp(e.dtype) if dst is None else dst
            self.emit(op.FABS if e.dtype == "f64" else op.IABS, out, src)
            return out
        src = self.expr(e.arg)
        out = self.alloc_temp("f64") if dst is None else dst
        self.emit(_MATH[e.func], out, src)
        return out

    # --- statements --------------------------------------------------------------

    def stmts(self, statements) -> None:
        for s in statements:
            self.reset_temps()
            self.stmt(s)

    def stmt(self, s) -> None:
        if isinstance(s, AssignIR):
            if s.dtype == "f64":
                self.expr(s.value, dst=self.freg_of[s.var])
            else:
                self.expr(s.value, dst=self.ireg_of[s.var])
            return
        if isinstance(s, FillIR):
            reg = self.expr(s.value)
            hist = self.hist_ids[s.hist]
            self.emit(op.FILLF if s.value.dtype == "f64" else op.FILLI, hist, reg)
            return
        if isinstance(s, IfIR):
            cond = self.expr(s.cond)
            jf = self.emit(op.JF, cond, 0)
            self.stmts(s.then)
            if s.orelse:
                jend = self.emit(op.JMP, 0)
                self.patch(jf, 2, self.here())
                self.stmts(s.orelse)
                self.patch(jend, 1, self.here())
            else:
                self.patch(jf, 2, self.here())
            return
        if isinstance(s, ForOffsetsIR):
            var = self.ireg_of[s.var]
            bound = self.alloc_bound()
            if s.offsets is None:
                self.emit(op.ICONST, var, 0)
                self.emit(op.LOADN, bound)
            else:
                arr = self.iarray("offsets", s.offsets)
                parent = self.expr(s.parent)
                self.emit(op.ILOAD, var, arr, parent)
                self.emit(op.ILOAD1, bound, arr, parent)
            self._loop_tail(var, bound, s.body)
            return
        if isinstance(s, ForRangeIR):
            var = self.ireg_of[s.var]
            bound = self.alloc_bound()
            self.expr(s.start, dst=var)
            self.expr(s.stop, dst=bound)
            self._loop_tail(var, bound, s.body)
            return
        if isinstance(s, FlatLoopIR):
            var = self.ireg_of[s.var]
            bound = self.alloc_bound()
            self.expr(s.count, dst=bound)
            self.emit(op.ICONST, var, 0)
            self._loop_tail(var, bound, s.body)
            return
        raise ExecutionError(f"cannot assemble {type(s).__name__}")

    def _loop_tail(self, var: int, bound: int, body) -> None:
        top = self.here()
        bge = self.emit(op.BGE, var, bound, 0)
        self.stmts(body)
        self.emit(op.IINC, var)
        self.emit(op.JMP, top)
        self.patch(bge, 3, self.here())


def assemble(program: FlatProgram, hist_ids: dict[str | None, int]) -> Bytecode:
    asm = _Assembler(program, hist_ids)
    asm.stmts(program.statements)
    asm.emit(op.HALT)
    code = np.asarray(asm.instrs, dtype=np.int64).reshape(-1)
    iarray_keys = [None] * len(asm.iarray_ids)
    for (kind, path), idx in asm.iarray_ids.items():
        iarray_keys[idx] = (kind, path)
    farray_keys = [None] * len(asm.farray_ids)
    for path, idx in asm.farray_ids.items():
        farray_keys[idx] = path
    return Bytecode(
        code=code,
        fconsts=np.asarray(asm.fconsts, dtype=np.float64),
        n_iregs=asm.itemp_base + asm.max_itemp,
        n_fregs=asm.ftemp_base + asm.max_ftemp,
        iarray_keys=iarray_keys,
        farray_keys=farray_keys,
        hist_ids=dict(hist_ids),
    )
