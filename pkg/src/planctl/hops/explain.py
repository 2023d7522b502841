"""Text explain of a HOP program."""
from __future__ import annotations

import math

from ..config import format_budget_mb
from .characteristics import MB, format_mc
from .nodes import (ForBlock, FunctionBlock, GenericBlock, Hop, HopProgram, IfBlock, WhileBlock,
                    block_dag_roots, iter_dag)


def format_mem(nbytes: float) -> str:
    if math.isinf(nbytes):
        return "[?MB]"
    return f"[{int(nbytes / MB + 0.5)}MB]"


def format_hop(h: Hop) -> str:
    parts = [f"({h.id})", h.op]
    if h.name and h.op in ("PRead", "PWrite", "TRead", "TWrite", "fcall"):
        parts.append(h.name)
    kids = [str(c.id) for c in h.children if not c.is_literal]
    if kids:
        parts.append("(" + ",".join(kids) + ")")
    parts.append(format_mc(h.mc))
    parts.append(format_mem(h.mem_estimate))
    parts.append(h.exec_type or "-")
    return " ".join(parts)


def explain_header(cc) -> list:
    budgets = "/".join(format_budget_mb(b) for b in (cc.local_budget, cc.map_budget, cc.reduce_budget))
    return [f"# Memory Budget local/remote = {budgets}",
            f"# Degree of Parallelism (vcores) local/remote = "
            f"{cc.k_local}/{cc.effective_k_map}/{cc.effective_k_reduce}"]


def _rc(b) -> str:
    return f"[recompile={'true' if b.recompile else 'false'}]"


def _lines(b) -> str:
    return f"(lines {b.lines[0]}-{b.lines[1]})"


def _dag_lines(roots: list, depth: int) -> list:
    pad = "-" * depth
    return [pad + format_hop(h) for h in iter_dag(roots) if not h.is_literal]


def _block_lines(b, depth: int) -> list:
    pad = "-" * depth
    if isinstance(b, GenericBlock):
        return [f"{pad}GENERIC {_lines(b)} {_rc(b)}"] + _dag_lines(b.roots, depth + 2)
    if isinstance(b, IfBlock):
        out = [f"{pad}IF {_lines(b)} {_rc(b)}"] + _dag_lines([b.predicate], depth + 2)
        for c in b.then_blocks:
            out += _block_lines(c, depth + 2)
        if b.else_blocks:
            out.append(f"{pad}ELSE")
            for c in b.else_blocks:
                out += _block_lines(c, depth + 2)
        return out
    if isinstance(b, (WhileBlock, ForBlock)):
        out = [f"{pad}{b.kind.upper()} {_lines(b)} {_rc(b)}"] + _dag_lines(block_dag_roots(b), depth + 2)
        for c in b.body:
            out += _block_lines(c, depth + 2)
        return out
    if isinstance(b, FunctionBlock):
        out = [f"{pad}FUNCTION {b.name} {_lines(b)} {_rc(b)}"]
        for c in b.body:
            out += _block_lines(c, depth + 2)
        return out
    raise TypeError(f"unknown block {b!r}")


def explain_hops(prog: HopProgram, cc) -> str:
    lines = explain_header(cc)
    lines.append("PROGRAM")
    if prog.functions:
        lines.append("--FUNCTIONS")
        for f in prog.functions.values():
            lines += _block_lines(f, 4)
    lines.append("--MAIN PROGRAM")
    for b in prog.blocks:
        lines += _block_lines(b, 4)
    return "\n".join(lines) + "\n"
