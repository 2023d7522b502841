"""End-to-end compilation pipeline: script text to HOP program to runtime plan."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .config import ClusterConfig
from .frontend import Script, parse_script, validate
from .hops import (HopProgram, apply_static_rewrites, build_hops, compute_memory, constant_fold,
                   explain_hops, propagate_sizes, select_exec_types)
from .hops.nodes import CompileError
from .runtime import RuntimeProgram, apply_lop_rewrites, generate_runtime


@dataclass
class CompiledPlan:
    script: Script
    hops: HopProgram
    hop_explain: str
    runtime: RuntimeProgram
    diagnostics: list = field(default_factory=list)


def compile_hops(script: Script, input_meta: dict, cc: ClusterConfig,
                 formats: Optional[dict] = None) -> HopProgram:
    """Run all HOP-level passes up to execution-type selection."""
    diags = validate(script)
    if diags:
        first = diags[0]
        raise CompileError("; ".join(f"line {d.line}: {d.message}" for d in diags), line=first.line)
    prog = build_hops(script)
    constant_fold(prog)
    apply_static_rewrites(prog)
    propagate_sizes(prog, input_meta, cc.block_size, formats)
    compute_memory(prog)
    select_exec_types(prog, cc)
    return prog


def compile_script(source: str, args: list, input_meta: dict, cc: ClusterConfig,
                   formats: Optional[dict] = None, source_name: str = "<string>",
                   pid: Optional[int] = None) -> CompiledPlan:
    script = parse_script(source, args, source_name=source_name)
    prog = compile_hops(script, input_meta, cc, formats)
    hop_text = explain_hops(prog, cc)
    apply_lop_rewrites(prog, cc)
    rp = generate_runtime(prog, cc, pid)
    return CompiledPlan(script, prog, hop_text, rp, list(prog.diagnostics))
