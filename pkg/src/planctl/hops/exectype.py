"""Execution-type selection (CP vs. MR) against the local memory budget."""
from __future__ import annotations

from .nodes import DATA_OPS, MATRIX, Hop, HopProgram, block_dag_roots, iter_dag, iter_program_blocks

CP, MR = "CP", "MR"

# operators without a distributed implementation
CP_ONLY = ("b(solve)", "fcall", "u(nrow)", "u(ncol)")


def select_exec_type(h: Hop, local_budget: float) -> str:
    if h.op in DATA_OPS or h.op in CP_ONLY or h.is_literal:
        return CP
    if h.data_type != MATRIX and all(c.data_type != MATRIX for c in h.children):
        return CP
    return CP if h.mem_estimate <= local_budget else MR


def needs_recompile(roots: list) -> bool:
    for h in iter_dag(roots):
        if h.exec_type == MR and h.op not in DATA_OPS:
            return True
        if h.data_type == MATRIX and not h.mc.dims_known:
            return True
    return False


def select_exec_types(prog: HopProgram, cc) -> HopProgram:
    """Assign CP/MR to every HOP and set each block's recompile flag."""
    budget = cc.local_budget
    for b in iter_program_blocks(prog):
        roots = block_dag_roots(b)
        for h in iter_dag(roots):
            h.exec_type = select_exec_type(h, budget)
        b.recompile = needs_recompile(roots)
    return prog
