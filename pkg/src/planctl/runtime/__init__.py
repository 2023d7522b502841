"""Runtime plan generation: operator selection, piggybacking, instructions."""
from .codegen import generate_runtime
from .explain import explain_runtime
from .instructions import Instruction, MRInstruction, MRJob, Operand, RuntimeProgram
from .operators import apply_lop_rewrites, select_mm_operator
from .piggyback import MROp, piggyback

__all__ = [
    "Instruction", "MRInstruction", "MRJob", "MROp", "Operand", "RuntimeProgram",
    "apply_lop_rewrites", "explain_runtime", "generate_runtime", "piggyback",
    "select_mm_operator",
]
