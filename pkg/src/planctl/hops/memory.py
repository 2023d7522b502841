"""Per-HOP operation memory estimates (inputs + intermediates + output)."""
from __future__ import annotations

import math

from .characteristics import MatrixCharacteristics, mem_estimate_matrix
from .nodes import DATA_OPS, MATRIX, Hop, HopProgram, iter_program_hops

_ZERO_OPS = ("u(nrow)", "u(ncol)", "literal")


def output_estimate(h: Hop) -> float:
    if h.data_type != MATRIX:
        return 0.0
    return mem_estimate_matrix(h.mc)


def intermediate_estimate(h: Hop) -> float:
    if h.op == "b(solve)":
        a = h.children[0].mc
        if not a.dims_known:
            return math.inf
        # dense work copy of the coefficient matrix
        return mem_estimate_matrix(MatrixCharacteristics(a.rows, a.cols), "dense")
    return 0.0


def mem_estimate_hop(h: Hop) -> float:
    """Bytes needed to execute ``h`` in memory; ``math.inf`` when unknown."""
    if h.op in _ZERO_OPS:
        return 0.0
    if h.op in DATA_OPS:
        return output_estimate(h)
    if h.data_type != MATRIX and all(c.data_type != MATRIX for c in h.children):
        return 0.0
    total = 0.0
    seen = set()
    for c in h.children:
        if id(c) in seen or c.data_type != MATRIX:
            continue
        seen.add(id(c))
        total += mem_estimate_matrix(c.mc)
    return total + intermediate_estimate(h) + output_estimate(h)


def compute_memory(prog: HopProgram) -> HopProgram:
    for h in iter_program_hops(prog):
        h.mem_estimate = mem_estimate_hop(h)
    return prog
