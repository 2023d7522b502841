"""Floating point operation counts per instruction.

``flop_estimate`` returns ``None`` when a needed size is unknown.  Counts for
the opcodes not modelled explicitly use one operation per output cell.
"""
from __future__ import annotations

from typing import Optional

from ..config import CalibrationTable
from ..hops.characteristics import MatrixCharacteristics, is_sparse

MATMULT = {"ba+*", "mapmm", "cpmm"}
PER_INPUT_CELL = {"r'", "rdiag"}
KAHAN = {"uak+", "ak+"}
# cheap scalar-result ops: a single operation
CONSTANT = {"nrow", "ncol", "castdts"}


def _known(*mcs) -> bool:
    return all(mc is not None and mc.dims_known for mc in mcs)


def flop_estimate(opcode: str, inputs: list, output: Optional[MatrixCharacteristics] = None,
                  calib: CalibrationTable = CalibrationTable(),
                  args: Optional[list] = None) -> Optional[float]:
    """FLOP count of one instruction over full inputs.

    ``inputs`` holds the characteristics of matrix inputs in operand order;
    scalar operands are left out.
    """
    if opcode in CONSTANT:
        return 1.0
    if opcode in ("write", "partition"):
        return 0.0          # see cycle_estimate
    if opcode == "tsmm":
        x = inputs[0]
        if not _known(x):
            return None
        m, n = (x.rows, x.cols) if not args or args[0] == "LEFT" else (x.cols, x.rows)
        s = x.sparsity
        if is_sparse(x):
            return calib.mms_corr * m * n * n * s * s
        return calib.mmd_corr * m * n * n * s
    if opcode in MATMULT:
        a, b = inputs[0], inputs[1]
        if not _known(a, b):
            return None
        return float(a.rows) * a.cols * b.cols * a.sparsity * b.sparsity
    if opcode == "solve":
        a = inputs[0]
        if not _known(a):
            return None
        return float(a.cols) ** 3
    if opcode in PER_INPUT_CELL:
        if not _known(inputs[0]):
            return None
        return float(inputs[0].cells)
    if opcode in KAHAN:
        if not _known(inputs[0]):
            return None
        return calib.kahan_flops_per_cell * inputs[0].cells
    if not inputs and output is None:
        return 1.0          # scalar arithmetic
    target = output if output is not None and output.dims_known else None
    if target is None:
        known = [i for i in inputs if i.dims_known]
        if len(known) != len(inputs) or not inputs:
            return None
        target = max(known, key=lambda i: i.cells)
    return float(max(target.cells, 1))


def cycle_estimate(opcode: str, inputs: list, calib: CalibrationTable,
                   fmt: str = "binaryblock") -> Optional[float]:
    """Non-FLOP CPU cycles (partitioning and text serialization)."""
    if opcode == "partition":
        if not _known(inputs[0]):
            return None
        return calib.partition_cycles_per_cell * inputs[0].cells
    if opcode == "write" and fmt == "textcell":
        x = inputs[0]
        if not _known(x):
            return None
        cells = x.nnz if x.nnz_known else x.cells
        return calib.textcell_cycles_per_cell * cells
    if opcode in ("createvar", "rmvar", "cpvar", "assignvar"):
        return calib.bookkeeping_cycles
    return 0.0
