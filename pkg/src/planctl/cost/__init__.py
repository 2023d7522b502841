"""Cost estimation of runtime programs."""
from .estimator import (JOB_COMPONENTS, CostReport, Estimator, InstCost, JobCost, aggregate_block,
                        block_weight, cost_cp_instruction, cost_mr_job, cost_program)
from .explain import explain_with_costs, format_seconds, machine_lines
from .flops import flop_estimate
from .symbols import HDFS, MEM, CostError, SymbolTable, VariableState, track_instruction

__all__ = [
    "HDFS", "JOB_COMPONENTS", "MEM", "CostError", "CostReport", "Estimator", "InstCost", "JobCost", "SymbolTable",
    "VariableState", "aggregate_block", "block_weight", "cost_cp_instruction", "cost_mr_job",
    "cost_program", "explain_with_costs", "flop_estimate", "format_seconds", "machine_lines",
    "track_instruction",
]
