"""High-level operator (HOP) compilation: build, rewrite, size, budget."""
from .builder import build_hops
from .characteristics import MatrixCharacteristics, mem_estimate_matrix
from .exectype import CP, MR, select_exec_types
from .explain import explain_hops
from .memory import compute_memory, mem_estimate_hop
from .nodes import CompileError, Hop, HopProgram
from .rewrites import apply_static_rewrites, constant_fold
from .sizes import propagate_sizes

__all__ = [
    "CP", "MR", "CompileError", "Hop", "HopProgram", "MatrixCharacteristics",
    "apply_static_rewrites", "build_hops", "compute_memory", "constant_fold",
    "explain_hops", "mem_estimate_hop", "mem_estimate_matrix", "propagate_sizes",
    "select_exec_types",
]
