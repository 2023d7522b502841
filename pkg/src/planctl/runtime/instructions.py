"""Runtime plan representation: CP instructions, MR jobs and program blocks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..hops.characteristics import MatrixCharacteristics

BOOKKEEPING = ("createvar", "rmvar", "cpvar", "assignvar")


def format_double(v: float) -> str:
    """Plan-style double text: 0.001 -> 0.0010, 1.0 -> 1.0, 0.25 -> 0.25."""
    s = repr(float(v))
    if "e" in s or "n" in s:
        return s
    frac = s.split(".", 1)[1]
    if len(frac) > 1 and len(frac) % 2 == 1:
        s += "0"
    return s


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_double(v)
    return str(v)


@dataclass(frozen=True)
class Operand:
    """A named variable or inline literal in a CP instruction."""
    name: str
    data_type: str = "MATRIX"      # MATRIX | SCALAR
    value_type: str = "DOUBLE"     # DOUBLE | INT | BOOLEAN | STRING
    literal: bool = False

    @classmethod
    def lit(cls, value) -> "Operand":
        if isinstance(value, bool):
            vt = "BOOLEAN"
        elif isinstance(value, int):
            vt = "INT"
        elif isinstance(value, float):
            vt = "DOUBLE"
        else:
            vt = "STRING"
        return cls(format_value(value), "SCALAR", vt, literal=True)

    @property
    def is_matrix(self) -> bool:
        return self.data_type == "MATRIX"

    def text(self, as_input: bool = True) -> str:
        base = f"{self.name}.{self.data_type}.{self.value_type}"
        if self.data_type == "SCALAR" and as_input:
            return base + (".true" if self.literal else ".false")
        return base


@dataclass
class Instruction:
    """A single CP instruction.

    ``inputs``/``outputs`` are operands; ``args`` holds trailing text fields.
    createvar additionally carries ``path``, ``temp``, ``fmt`` and ``mc``.
    """
    opcode: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    args: list = field(default_factory=list)
    path: Optional[str] = None
    temp: bool = True
    fmt: str = "binaryblock"
    mc: Optional[MatrixCharacteristics] = None
    exec_type: str = "CP"

    @property
    def is_bookkeeping(self) -> bool:
        return self.opcode in BOOKKEEPING

    @property
    def var_names(self) -> list:
        return [o.name for o in self.inputs if not o.literal] + [o.name for o in self.outputs]

    def text(self) -> str:
        op = self.opcode
        if op == "createvar":
            mc = self.mc or MatrixCharacteristics()
            dims = " ".join(str(v) for v in mc.as_list())
            return (f"CP createvar {self.outputs[0].name} {self.path} "
                    f"{'true' if self.temp else 'false'} {self.fmt} {dims}")
        if op == "rmvar":
            return "CP rmvar " + " ".join(o.name for o in self.inputs)
        if op == "cpvar":
            return f"CP cpvar {self.inputs[0].name} {self.outputs[0].name}"
        if op == "assignvar":
            return f"CP assignvar {self.inputs[0].text()} {self.outputs[0].text(False)}"
        if op in ("rand", "seq"):
            return " ".join(["CP", op] + self.args + [self.outputs[0].text(False)])
        parts = ["CP", op] + [o.text() for o in self.inputs] + [o.text(False) for o in self.outputs]
        return " ".join(parts + self.args)

    def short_text(self) -> str:
        """Abbreviated form used by the cost explain."""
        op = self.opcode
        if op == "createvar":
            name = self.outputs[0].name
            return f"CP createvar {name} {self.fmt}" if not self.temp else f"CP createvar {name}"
        if op == "assignvar":
            return f"CP assignvar {self.outputs[0].name}"
        if op == "rmvar":
            return "CP rmvar " + " ".join(o.name for o in self.inputs)
        if op in ("rand", "seq"):
            return f"CP {op} {' '.join(self.args[:2])} {self.outputs[0].name}"
        if op == "write":
            return f"CP write {self.inputs[0].name} {self.inputs[2].name}"
        if op == "partition":
            return f"CP partition {self.inputs[0].name} {self.outputs[0].name}"
        names = [o.name for o in self.inputs] + [o.name for o in self.outputs]
        return " ".join(["CP", op] + names + [a for a in self.args if a.isupper()])


@dataclass
class MRInstruction:
    """An instruction inside an MR job; operands are job-local indices."""
    opcode: str
    inputs: list            # int indices or scalar Operand
    output: int
    phase: str              # rand | map | shuffle | agg | other
    mc: MatrixCharacteristics = field(default_factory=MatrixCharacteristics)
    args: list = field(default_factory=list)

    def text(self) -> str:
        ops = [f"{i}.MATRIX.DOUBLE" if isinstance(i, int) else i.text() for i in self.inputs]
        out = f"{self.output}.MATRIX.DOUBLE"
        if self.opcode in ("rand", "seq"):
            # data generators list their parameters before the output, like CP
            return " ".join(["MR", self.opcode] + ops + self.args + [out])
        return " ".join(["MR", self.opcode] + ops + [out] + self.args)

    def short_text(self) -> str:
        ops = [str(i) if isinstance(i, int) else i.name for i in self.inputs]
        return " ".join(["MR", self.opcode] + ops + [str(self.output)])


PHASES = ("rand", "recReader", "map", "shuffle", "agg", "other")


@dataclass
class MRJob:
    """Composite MR-job instruction."""
    job_type: str                       # GMR | MMCJ
    input_labels: list
    instructions: list                  # MRInstruction, phase-ordered
    output_labels: list
    result_indices: list
    output_mcs: list = field(default_factory=list)
    num_reducers: int = 12
    replication: int = 1
    partitioned_inputs: dict = field(default_factory=dict)   # label -> partition scheme
    exec_type: str = "MR"
    opcode: str = "MR-Job"

    def phase(self, name: str) -> list:
        return [i for i in self.instructions if i.phase == name]

    @property
    def has_reduce(self) -> bool:
        return any(i.phase in ("shuffle", "agg", "other") for i in self.instructions)

    @property
    def var_names(self) -> list:
        return list(self.input_labels) + list(self.output_labels)


# --- blocks ---------------------------------------------------------------------

@dataclass
class RtGeneric:
    instructions: list
    lines: tuple
    recompile: bool = False
    kind: str = "generic"


@dataclass
class RtIf:
    predicate: list
    then_blocks: list
    else_blocks: list
    lines: tuple
    recompile: bool = False
    kind: str = "if"


@dataclass
class RtWhile:
    predicate: list
    body: list
    lines: tuple
    recompile: bool = False
    kind: str = "while"


@dataclass
class RtFor:
    header: list                 # instructions computing start/stop/step
    body: list
    lines: tuple
    parallel: bool = False
    iterations: Optional[int] = None
    var: str = ""
    recompile: bool = False

    @property
    def kind(self) -> str:
        return "parfor" if self.parallel else "for"


@dataclass
class RtFunction:
    name: str
    params: list                 # (name, data type) pairs
    returns: list
    body: list
    lines: tuple
    kind: str = "function"


def rt_child_blocks(b) -> list:
    if isinstance(b, RtIf):
        return b.then_blocks + b.else_blocks
    if isinstance(b, (RtWhile, RtFor, RtFunction)):
        return b.body
    return []


def rt_own_instructions(b) -> list:
    if isinstance(b, RtGeneric):
        return b.instructions
    if isinstance(b, (RtIf, RtWhile)):
        return b.predicate
    if isinstance(b, RtFor):
        return b.header
    return []


def iter_rt_blocks(blocks):
    for b in blocks:
        yield b
        yield from iter_rt_blocks(rt_child_blocks(b))


@dataclass
class RuntimeProgram:
    blocks: list
    functions: dict = field(default_factory=dict)

    def all_blocks(self):
        for f in self.functions.values():
            yield f
            yield from iter_rt_blocks(f.body)
        yield from iter_rt_blocks(self.blocks)

    def all_instructions(self):
        for b in self.all_blocks():
            yield from rt_own_instructions(b)

    @property
    def counts(self) -> tuple:
        cp = mr = 0
        for inst in self.all_instructions():
            if isinstance(inst, MRJob):
                mr += 1
            else:
                cp += 1
        return cp, mr

    @property
    def mr_jobs(self) -> list:
        return [i for i in self.all_instructions() if isinstance(i, MRJob)]
