"""Text explain of a runtime program."""
from __future__ import annotations

from .instructions import (MRJob, RtFor, RtFunction, RtGeneric, RtIf, RtWhile, RuntimeProgram)


def _rc(b) -> str:
    return f" [recompile={'true' if b.recompile else 'false'}]"


def _lines(b) -> str:
    return f"(lines {b.lines[0]}-{b.lines[1]})"


def job_lines(job: MRJob, depth: int) -> list:
    pad = "-" * depth
    inner = "-" * (depth + 4) + "  "
    cont = "-" * (depth + 4) + " " * 19

    def field_lines(label, insts):
        if not insts:
            return [f"{inner}{label:<14} ="]
        out = []
        for k, inst in enumerate(insts):
            sep = ", " if k < len(insts) - 1 else ""
            head = f"{inner}{label:<14} = " if k == 0 else cont
            out.append(f"{head}{inst.text()}{sep}")
        return out

    out = [f"{pad}MR-Job["]
    out.append(f"{inner}{'jobtype':<14} = {job.job_type}")
    out.append(f"{inner}{'input labels':<14} = [{', '.join(job.input_labels)}]")
    out += field_lines("recReader inst", job.phase("recReader"))
    out += field_lines("rand inst", job.phase("rand"))
    out += field_lines("mapper inst", job.phase("map"))
    out += field_lines("shuffle inst", job.phase("shuffle"))
    out += field_lines("agg inst", job.phase("agg"))
    out += field_lines("other inst", job.phase("other"))
    out.append(f"{inner}{'output labels':<14} = [{', '.join(job.output_labels)}]")
    out.append(f"{inner}{'result indices':<14} = ," + ",".join(str(i) for i in job.result_indices))
    out.append(f"{inner}{'num reducers':<14} = {job.num_reducers}")
    out.append(f"{inner}{'replication':<14} = {job.replication} ]")
    return out


def _inst_lines(insts: list, depth: int, simplify: bool) -> list:
    out = []
    for inst in insts:
        if isinstance(inst, MRJob):
            out += job_lines(inst, depth)
        elif not (simplify and inst.opcode == "rmvar"):
            out.append("-" * depth + inst.text())
    return out


def _block_lines(b, depth: int, simplify: bool) -> list:
    pad = "-" * depth
    if isinstance(b, RtGeneric):
        return [f"{pad}GENERIC {_lines(b)}{_rc(b)}"] + _inst_lines(b.instructions, depth + 2, simplify)
    if isinstance(b, RtIf):
        out = [f"{pad}IF {_lines(b)}{_rc(b)}"] + _inst_lines(b.predicate, depth + 2, simplify)
        for c in b.then_blocks:
            out += _block_lines(c, depth + 2, simplify)
        if b.else_blocks:
            out.append(f"{pad}ELSE")
            for c in b.else_blocks:
                out += _block_lines(c, depth + 2, simplify)
        return out
    if isinstance(b, (RtWhile, RtFor)):
        own = b.predicate if isinstance(b, RtWhile) else b.header
        out = [f"{pad}{b.kind.upper()} {_lines(b)}{_rc(b)}"] + _inst_lines(own, depth + 2, simplify)
        for c in b.body:
            out += _block_lines(c, depth + 2, simplify)
        return out
    if isinstance(b, RtFunction):
        out = [f"{pad}FUNCTION {b.name} {_lines(b)}"]
        for c in b.body:
            out += _block_lines(c, depth + 2, simplify)
        return out
    raise TypeError(f"unknown block {b!r}")


def explain_runtime(rp: RuntimeProgram, simplify: bool = True) -> str:
    """Plan listing; ``simplify`` drops rmvar lines (header counts include them)."""
    cp, mr = rp.counts
    lines = [f"PROGRAM ( size CP/MR = {cp}/{mr} )"]
    if rp.functions:
        lines.append("--FUNCTIONS")
        for f in rp.functions.values():
            lines += _block_lines(f, 4, simplify)
    lines.append("--MAIN PROGRAM")
    for b in rp.blocks:
        lines += _block_lines(b, 4, simplify)
    return "\n".join(lines) + "\n"
