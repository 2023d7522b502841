"""Physical operator selection and memory-constrained plan rewrites."""
from __future__ import annotations

from ..hops.characteristics import mem_estimate_matrix, serialized_size
from ..hops.exectype import CP
from ..hops.memory import mem_estimate_hop
from ..hops.nodes import (GenericBlock, Hop, HopProgram, block_dag_roots, iter_dag,
                          iter_program_blocks, rewrite_dag)

TSMM, MAPMM, CPMM, CPMM_CP = "tsmm", "mapmm", "cpmm", "ba+*"


def is_tsmm_pattern(h: Hop) -> bool:
    a, b = h.children
    return a.op == "r(t)" and a.children[0] is b


def select_mm_operator(h: Hop, cc) -> dict:
    """Choose the physical operator for a matrix-multiply HOP.

    Returns a dict with ``method`` (tsmm | mapmm | cpmm | ba+*) and, where
    relevant, ``aggregate`` (partial results need ak+), ``broadcast``
    (0 or 1, the child shipped to every map task) and ``side``.
    """
    a, b = h.children
    block = cc.block_size
    if is_tsmm_pattern(h):
        x = b.mc
        if h.exec_type == CP:
            return {"method": TSMM, "aggregate": False}
        if x.cols >= 0 and x.cols <= block:
            return {"method": TSMM, "aggregate": not (0 <= x.rows <= block)}
    if h.exec_type == CP:
        return {"method": CPMM_CP}
    ma, mb = mem_estimate_matrix(a.mc), mem_estimate_matrix(b.mc)
    inner = a.mc.cols
    aggregate = not (0 <= inner <= block)
    if mb <= ma:
        cand = [(1, b, b.mc.cols, mb, "RIGHT_PART"), (0, a, a.mc.rows, ma, "LEFT_PART")]
    else:
        cand = [(0, a, a.mc.rows, ma, "LEFT_PART"), (1, b, b.mc.cols, mb, "RIGHT_PART")]
    idx, side_hop, other_dim, mem, side = cand[0]
    if mem <= cc.map_budget and 0 <= other_dim <= block:
        return {"method": MAPMM, "aggregate": aggregate, "broadcast": idx, "side": side}
    return {"method": CPMM, "aggregate": True}


def _transpose_rewrite(h: Hop, prog: HopProgram, cc) -> Hop:
    """t(X) %*% Y  ->  t(t(Y) %*% X) when the new transposes stay in CP."""
    if h.op != "ba(+*)" or is_tsmm_pattern(h):
        return h
    tx, y = h.children
    if tx.op != "r(t)" or y.op == "r(t)":
        return h
    x = tx.children[0]
    m_x, m_y = mem_estimate_matrix(x.mc), mem_estimate_matrix(y.mc)
    m_out = mem_estimate_matrix(h.mc)
    if not (m_y < m_x and 2 * m_y <= cc.local_budget and 2 * m_out <= cc.local_budget):
        return h
    ids = prog.ids
    ty = Hop(ids(), "r(t)", [y], line=h.line)
    ty.mc = type(y.mc)(y.mc.cols, y.mc.rows, y.mc.row_block, y.mc.col_block, y.mc.nnz)
    prod = Hop(ids(), "ba(+*)", [ty, x], line=h.line)
    prod.mc = type(h.mc)(h.mc.cols, h.mc.rows, h.mc.row_block, h.mc.col_block, h.mc.nnz)
    out = Hop(ids(), "r(t)", [prod], line=h.line)
    out.mc = h.mc
    for n, et in ((ty, CP), (prod, h.exec_type), (out, CP)):
        n.mem_estimate = mem_estimate_hop(n)
        n.exec_type = et
    return out


def apply_lop_rewrites(prog: HopProgram, cc) -> HopProgram:
    """Apply the transpose-avoiding rewrite and annotate physical operators.

    Every matrix-multiply HOP gets ``params['mm']`` (see
    :func:`select_mm_operator`); broadcast inputs of mapmm larger than the
    partition threshold are marked with ``params['mm']['partition']``.
    """
    for b in iter_program_blocks(prog):
        if not isinstance(b, GenericBlock):
            continue
        b.roots = rewrite_dag(b.roots, lambda h: _transpose_rewrite(h, prog, cc))
    for b in iter_program_blocks(prog):
        for h in iter_dag(block_dag_roots(b)):
            if h.op != "ba(+*)":
                continue
            mm = select_mm_operator(h, cc)
            if mm["method"] == MAPMM:
                bc = h.children[mm["broadcast"]]
                size = serialized_size(bc.mc, "binaryblock")
                if size > cc.partition_threshold:
                    mm["partition"] = ("ROW_BLOCK_WISE_N" if mm["side"] == "RIGHT_PART"
                                       else "COLUMN_BLOCK_WISE_N")
            h.params["mm"] = mm
    return prog

