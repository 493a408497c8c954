# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled register VM for flat loop programs.

Executes the bytecode produced by splitq.engine.bytecode over raw int64 and
float64 arrays, filling histograms. Opcode values mirror
splitq.engine.opcodes; kernels.py asserts the tables agree at import.

Float semantics match the Python paths exactly: IEEE double arithmetic with
no fused multiply-add (built with -ffp-contract=off), libm math calls, and a
canonical quiet NaN (0x7ff8000000000000) for division by zero and for sqrt
or log domain errors.
"""

from libc.math cimport cos, cosh, exp, fabs, log, sin, sqrt
from libc.stdlib cimport free, malloc
from libc.stdint cimport int64_t, uint64_t

import numpy as np


cdef enum:
    HALT = 0
    FADD = 1
    FSUB = 2
    FMUL = 3
    FDIV = 4
    IADD = 5
    ISUB = 6
    IMUL = 7
    I2F = 8
    FLT = 9
    FLE = 10
    FGT = 11
    FGE = 12
    FEQ = 13
    FNE = 14
    ILT = 15
    ILE = 16
    IGT = 17
    IGE = 18
    IEQ = 19
    INE = 20
    AND = 21
    OR = 22
    NOT = 23
    FCONST = 24
    ICONST = 25
    FMOV = 26
    IMOV = 27
    FLOAD = 28
    ILOAD = 29
    ILOAD1 = 30
    SQRT = 31
    COSH = 32
    COS = 33
    SIN = 34
    EXP = 35
    LOG = 36
    FABS = 37
    IABS = 38
    FILLF = 39
    FILLI = 40
    JMP = 41
    JF = 42
    BGE = 43
    IINC = 44
    LOADN = 45

OPCODE_TABLE = {
    "HALT": HALT, "FADD": FADD, "FSUB": FSUB, "FMUL": FMUL, "FDIV": FDIV,
    "IADD": IADD, "ISUB": ISUB, "IMUL": IMUL, "I2F": I2F, "FLT": FLT,
    "FLE": FLE, "FGT": FGT, "FGE": FGE, "FEQ": FEQ, "FNE": FNE, "ILT": ILT,
    "ILE": ILE, "IGT": IGT, "IGE": IGE, "IEQ": IEQ, "INE": INE, "AND": AND,
    "OR": OR, "NOT": NOT, "FCONST": FCONST, "ICONST": ICONST, "FMOV": FMOV,
    "IMOV": IMOV, "FLOAD": FLOAD, "ILOAD": ILOAD, "ILOAD1": ILOAD1,
    "SQRT": SQRT, "COSH": COSH, "COS": COS, "SIN": SIN, "EXP": EXP,
    "LOG": LOG, "FABS": FABS, "IABS": IABS, "FILLF": FILLF, "FILLI": FILLI,
    "JMP": JMP, "JF": JF, "BGE": BGE, "IINC": IINC, "LOADN": LOADN,
}


cdef union _nan_bits:
    uint64_t u
    double d

cdef double _canonical_nan():
    cdef _nan_bits nb
    nb.u = 0x7ff8000000000000ULL
    return nb.d

cdef double NAN_CANON = _canonical_nan()

NAN_BITS = 0x7ff8000000000000


def run(
    code_obj,
    fconsts_obj,
    iarrays,           # list of int64 ndarrays
    farrays,           # list of float64 ndarrays
    int64_t n_iregs,
    int64_t n_fregs,
    int64_t num_entries,
    hist_lo_obj,       # float64 ndarray, one per histogram
    hist_width_obj,
    hist_hi_obj,
    hist_nbins_obj,    # int64
    counts_obj,        # int64 ndarray, concatenated bins
    counts_base_obj,   # int64 ndarray, start of each histogram's bins
    under_obj,         # int64 ndarray
    over_obj,
    nfills_obj,
    bint record_fills,
):
    """Execute bytecode; mutates counts/under/over/nfills in place.

    Returns (fill_ids, fill_values) arrays when record_fills, else None.
    """
    cdef const int64_t[::1] code = code_obj
    cdef const double[::1] fconsts_mv = fconsts_obj
    cdef const double[::1] hist_lo = hist_lo_obj
    cdef const double[::1] hist_width = hist_width_obj
    cdef const double[::1] hist_hi = hist_hi_obj
    cdef const int64_t[::1] hist_nbins = hist_nbins_obj
    cdef int64_t[::1] counts = counts_obj
    cdef const int64_t[::1] counts_base = counts_base_obj
    cdef int64_t[::1] under = under_obj
    cdef int64_t[::1] over = over_obj
    cdef int64_t[::1] nfills = nfills_obj

    cdef Py_ssize_t n_i = len(iarrays)
    cdef Py_ssize_t n_f = len(farrays)
    cdef const int64_t** iptr = <const int64_t**>malloc(max(n_i, 1) * sizeof(int64_t*))
    cdef const double** fptr = <const double**>malloc(max(n_f, 1) * sizeof(double*))
    if iptr == NULL or fptr == NULL:
        free(<void*>iptr)
        free(<void*>fptr)
        raise MemoryError()

    # Keep typed views alive for the duration of the run.
    views = []
    cdef const int64_t[::1] iv
    cdef const double[::1] fv
    cdef Py_ssize_t k
    for k in range(n_i):
        iv = iarrays[k]
        views.append(iv)
        if iv.shape[0] > 0:
            iptr[k] = &iv[0]
        else:
            iptr[k] = NULL
    for k in range(n_f):
        fv = farrays[k]
        views.append(fv)
        if fv.shape[0] > 0:
            fptr[k] = &fv[0]
        else:
            fptr[k] = NULL

    iregs_arr = np.zeros(max(n_iregs, 1), dtype=np.int64)
    fregs_arr = np.zeros(max(n_fregs, 1), dtype=np.float64)
    cdef int64_t[::1] iregs = iregs_arr
    cdef double[::1] fregs = fregs_arr

    fill_ids = None
    fill_vals = None
    cdef int64_t[::1] fid_mv = None
    cdef double[::1] fval_mv = None
    cdef Py_ssize_t fill_pos = 0
    cdef Py_ssize_t fill_cap = 0
    if record_fills:
        fill_cap = 4096
        fill_ids = np.empty(fill_cap, dtype=np.int64)
        fill_vals = np.empty(fill_cap, dtype=np.float64)
        fid_mv = fill_ids
        fval_mv = fill_vals

    cdef Py_ssize_t pc = 0
    cdef int64_t opcode, a, b, c
    cdef double x, v
    cdef int64_t ix, idx, h

    try:
        while True:
            opcode = code[pc]
            a = code[pc + 1]
            b = code[pc + 2]
            c = code[pc + 3]
            pc += 4
            if opcode == FLOAD:
                fregs[a] = fptr[b][iregs[c]]
            elif opcode == ILOAD:
                iregs[a] = iptr[b][iregs[c]]
            elif opcode == ILOAD1:
                iregs[a] = iptr[b][iregs[c] + 1]
            elif opcode == FADD:
                fregs[a] = fregs[b] + fregs[c]
            elif opcode == FSUB:
                fregs[a] = fregs[b] - fregs[c]
            elif opcode == FMUL:
                fregs[a] = fregs[b] * fregs[c]
            elif opcode == FDIV:
                x = fregs[c]
                fregs[a] = NAN_CANON if x == 0.0 else fregs[b] / x
            elif opcode == IADD:
                iregs[a] = iregs[b] + iregs[c]
            elif opcode == ISUB:
                iregs[a] = iregs[b] - iregs[c]
            elif opcode == IMUL:
                iregs[a] = iregs[b] * iregs[c]
            elif opcode == I2F:
                fregs[a] = <double>iregs[b]
            elif opcode == FLT:
                iregs[a] = fregs[b] < fregs[c]
            elif opcode == FLE:
                iregs[a] = fregs[b] <= fregs[c]
            elif opcode == FGT:
                iregs[a] = fregs[b] > fregs[c]
            elif opcode == FGE:
                iregs[a] = fregs[b] >= fregs[c]
            elif opcode == FEQ:
                iregs[a] = fregs[b] == fregs[c]
            elif opcode == FNE:
                iregs[a] = fregs[b] != fregs[c]
            elif opcode == ILT:
                iregs[a] = iregs[b] < iregs[c]
            elif opcode == ILE:
                iregs[a] = iregs[b] <= iregs[c]
            elif opcode == IGT:
                iregs[a] = iregs[b] > iregs[c]
            elif opcode == IGE:
                iregs[a] = iregs[b] >= iregs[c]
            elif opcode == IEQ:
                iregs[a] = iregs[b] == iregs[c]
            elif opcode == INE:
                iregs[a] = iregs[b] != iregs[c]
            elif opcode == AND:
                iregs[a] = 1 if (iregs[b] != 0 and iregs[c] != 0) else 0
            elif opcode == OR:
                iregs[a] = 1 if (iregs[b] != 0 or iregs[c] != 0) else 0
            elif opcode == NOT:
                iregs[a] = 1 if iregs[b] == 0 else 0
            elif opcode == FCONST:
                fregs[a] = fconsts_mv[b]
            elif opcode == ICONST:
                iregs[a] = b
            elif opcode == FMOV:
                fregs[a] = fregs[b]
            elif opcode == IMOV:
                iregs[a] = iregs[b]
            elif opcode == SQRT:
                x = fregs[b]
                fregs[a] = NAN_CANON if x < 0.0 else sqrt(x)
            elif opcode == COSH:
                fregs[a] = cosh(fregs[b])
            elif opcode == COS:
                fregs[a] = cos(fregs[b])
            elif opcode == SIN:
                fregs[a] = sin(fregs[b])
            elif opcode == EXP:
                fregs[a] = exp(fregs[b])
            elif opcode == LOG:
                x = fregs[b]
                fregs[a] = NAN_CANON if x <= 0.0 else log(x)
            elif opcode == FABS:
                fregs[a] = fabs(fregs[b])
            elif opcode == IABS:
                ix = iregs[b]
                iregs[a] = -ix if ix < 0 else ix
            elif opcode == FILLF or opcode == FILLI:
                h = a
                v = fregs[b] if opcode == FILLF else <double>iregs[b]
                if v != v:
                    over[h] += 1
                elif v < hist_lo[h]:
                    under[h] += 1
                elif v >= hist_hi[h]:
                    over[h] += 1
                else:
                    idx = <int64_t>((v - hist_lo[h]) / hist_width[h])
                    if idx >= hist_nbins[h]:
                        idx = hist_nbins[h] - 1
                    counts[counts_base[h] + idx] += 1
                nfills[h] += 1
                if record_fills:
                    if fill_pos == fill_cap:
                        fill_cap *= 2
                        new_ids = np.empty(fill_cap, dtype=np.int64)
                        new_vals = np.empty(fill_cap, dtype=np.float64)
                        new_ids[:fill_pos] = fill_ids[:fill_pos]
                        new_vals[:fill_pos] = fill_vals[:fill_pos]
                        fill_ids = new_ids
                        fill_vals = new_vals
                        fid_mv = fill_ids
                        fval_mv = fill_vals
                    fid_mv[fill_pos] = h
                    fval_mv[fill_pos] = v
                    fill_pos += 1
            elif opcode == JMP:
                pc = a * 4
            elif opcode == JF:
                if iregs[a] == 0:
                    pc = b * 4
            elif opcode == BGE:
                if iregs[a] >= iregs[b]:
                    pc = c * 4
            elif opcode == IINC:
                iregs[a] += 1
            elif opcode == LOADN:
                iregs[a] = num_entries
            elif opcode == HALT:
                break
            else:
                raise RuntimeError(f"bad opcode {opcode} at {pc - 4}")
    finally:
        free(<void*>iptr)
        free(<void*>fptr)

    if record_fills:
        return fill_ids[:fill_pos], fill_vals[:fill_pos]
    return None
