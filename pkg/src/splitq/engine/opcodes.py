"""Opcode numbering shared by the bytecode assembler and the compiled VM.

The Cython module defines the same values as a C enum; kernels.py asserts
the two tables agree at import time. Instructions are fixed width: four
int64 slots [op, a, b, c].
"""

HALT = 0
FADD = 1
FSUB = 2
FMUL = 3
FDIV = 4  # division by zero yields the canonical quiet NaN
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
FCONST = 24  # a = dst freg, b = index into float constant pool
ICONST = 25  # a = dst ireg, b = immediate value
FMOV = 26
IMOV = 27
FLOAD = 28  # a = dst freg, b = float array id, c = index ireg
ILOAD = 29  # a = dst ireg, b = int array id, c = index ireg
ILOAD1 = 30  # like ILOAD but at index + 1 (fused offsets upper bound)
SQRT = 31  # negative argument yields NaN
COSH = 32
COS = 33
SIN = 34
EXP = 35
LOG = 36  # non-positive argument yields NaN
FABS = 37
IABS = 38
FILLF = 39  # a = hist id, b = freg
FILLI = 40  # a = hist id, b = ireg (value converted to float64)
JMP = 41  # a = target instruction index
JF = 42  # a = cond ireg, b = target if false
BGE = 43  # a, b = iregs, c = target if iregs[a] >= iregs[b]
IINC = 44  # a = ireg to increment
LOADN = 45  # a = dst ireg = num_entries

INSTRUCTION_WIDTH = 4

TABLE = {k: v for k, v in list(globals().items()) if k.isupper() and isinstance(v, int)}
TABLE.pop("INSTRUCTION_WIDTH")
