"""Runtime plan generation from an optimized HOP program.

Per DAG, HOPs are lowered into physical operators (LOPs).  LOPs are ordered
by (level, creation order), where level is one more than the deepest input.
CP operators are emitted in that order; MR operators are queued and packed
into jobs just before the first CP operator needing one of their results.
Temporaries are removed right after their last use and transient variables
that are dead at block exit are removed by one grouped ``rmvar``.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Optional

from ..hops.characteristics import MatrixCharacteristics
from ..hops.exectype import MR
from ..hops.nodes import (MATRIX, CompileError, ForBlock, GenericBlock, Hop, HopProgram,
                          IfBlock, WhileBlock)
from ..hops.sizes import scalar_value
from .instructions import (Instruction, MRInstruction, MRJob, Operand, RtFor, RtFunction,
                           RtGeneric, RtIf, RtWhile, RuntimeProgram, format_value)
from .operators import CPMM, MAPMM, TSMM
from .piggyback import MROp, piggyback

_CP_OPCODES = {"r(t)": "r'", "r(diag)": "rdiag", "b(solve)": "solve", "b(append)": "append",
               "u(-)": "u-", "u(!)": "!"}


@dataclass(eq=False)
class Lop:
    id: int
    kind: str                    # literal | var | pread | cp | mr | write | assign
    opcode: str = ""
    inputs: list = field(default_factory=list)
    mc: MatrixCharacteristics = field(default_factory=MatrixCharacteristics)
    data_type: str = "MATRIX"
    value_type: str = "DOUBLE"
    args: list = field(default_factory=list)
    phase: str = ""
    value: object = None
    name: Optional[str] = None
    level: int = 0
    out: Optional[Operand] = None
    hop: Optional[Hop] = None
    partition: Optional[str] = None

    @property
    def is_mr(self) -> bool:
        return self.kind == "mr"


def _dt(h: Hop) -> str:
    return "MATRIX" if h.data_type == MATRIX else "SCALAR"


def _vt(h: Hop) -> str:
    if h.data_type == MATRIX:
        return "DOUBLE"
    return {"int": "INT", "boolean": "BOOLEAN", "string": "STRING"}.get(h.value_type, "DOUBLE")


def _is_temp(name: str) -> bool:
    return name.startswith(("_mVar", "_Var", "pREAD"))


class _VarNames:
    def __init__(self, cc, pid: Optional[int] = None):
        self.counter = itertools.count(2)
        self.pid = os.getpid() if pid is None else pid
        self.host = cc.scratch_host

    def matrix(self):
        n = next(self.counter)
        return f"_mVar{n}", f"scratch_space//_p{self.pid}_{self.host}//_t0/temp{n - 1}"

    def scalar(self) -> str:
        return f"_Var{next(self.counter)}"


class _DagGen:
    """Lowers one DAG into an instruction list."""

    def __init__(self, gen: "CodeGenerator"):
        self.gen = gen
        self.cc = gen.cc
        self.ids = itertools.count(1)
        self.lops: list = []
        self.memo: dict = {}
        self.deferred: list = []       # (source lop, target name)
        self.insts: list = []
        self.emitted: set = set()

    # --- lowering ------------------------------------------------------------

    def new(self, kind, opcode="", inputs=(), **kw) -> Lop:
        lop = Lop(next(self.ids), kind, opcode, list(inputs), **kw)
        if kind not in ("literal", "var", "pread"):
            lop.level = 1 + max((i.level for i in lop.inputs), default=0)
        self.lops.append(lop)
        return lop

    def lit(self, value) -> Lop:
        op = Operand.lit(value)
        return Lop(0, "literal", data_type="SCALAR", value_type=op.value_type, value=value, out=op)

    def node(self, h: Hop, kind: str, opcode: str, inputs, **kw) -> Lop:
        return self.new(kind, opcode, inputs, mc=h.mc, data_type=_dt(h), value_type=_vt(h), hop=h, **kw)

    def lower(self, h: Hop) -> Lop:
        if id(h) in self.memo:
            return self.memo[id(h)]
        lop = self._lower(h)
        self.memo[id(h)] = lop
        return lop

    def _lower(self, h: Hop) -> Lop:
        op = h.op
        if h.is_literal:
            return self.lit(h.value)
        if op == "TRead":
            return Lop(0, "var", data_type=_dt(h), value_type=_vt(h), mc=h.mc, name=h.name,
                       out=Operand(h.name, _dt(h), _vt(h)))
        if op == "PRead":
            lop = self.new("pread", "createvar", mc=h.mc, name=h.name, hop=h)
            lop.out = Operand(f"pREAD{h.name}")
            return lop
        if op == "TWrite":
            src = self.lower(h.children[0])
            if src.kind == "literal":
                return self.new("assign", "assignvar", [src], name=h.name,
                                data_type=_dt(h), value_type=_vt(h))
            self.deferred.append((src, h.name))
            return src
        if op == "PWrite":
            src = self.lower(h.children[0])
            return self.new("write", "write", [src], hop=h, args=[h.params["path"], h.params["format"]])
        if op in ("u(nrow)", "u(ncol)"):
            v = scalar_value(h)
            if v is not None:
                return self.lit(v)
            return self.node(h, "cp", op[2:-1], [self.lower(h.children[0])])
        if op == "ba(+*)":
            return self._lower_mm(h)
        mr = h.exec_type == MR
        kind = "mr" if mr else "cp"
        if op == "dg(rand)":
            ins = [self.lower(c) for c in h.children]
            return self.node(h, kind, "rand", ins, phase="rand")
        if op == "dg(seq)":
            ins = [self.lower(c) for c in h.children]
            return self.node(h, kind, "seq", ins, phase="rand")
        if op == "ua(+)":
            src = self.lower(h.children[0])
            if not mr:
                return self.node(h, "cp", "uak+", [src])
            one = MatrixCharacteristics(1, 1, self.cc.block_size, self.cc.block_size, -1)
            part = self.new("mr", "uak+", [src], mc=one, phase="map", hop=h)
            agg = self.new("mr", "ak+", [part], mc=one, phase="agg", args=["true", "NONE"], hop=h)
            return self.node(h, "cp", "castdts", [agg])
        if op == "fcall":
            ins = [self.lower(c) for c in h.children]
            return self.node(h, "cp", "fcall", ins, name=h.name)
        ins = [self.lower(c) for c in h.children]
        if op.startswith("b(") and op not in _CP_OPCODES:
            opcode = op[2:-1]
            n_mat = sum(1 for i in ins if i.data_type == "MATRIX")
            phase = "other" if n_mat == 2 else "map"
        else:
            opcode = _CP_OPCODES.get(op)
            if opcode is None:
                raise CompileError(f"no runtime operator for {op}", hop_id=h.id, line=h.line)
            phase = "other" if op == "b(append)" else "map"
        if h.data_type != MATRIX:
            kind = "cp"
        return self.node(h, kind, opcode, ins, phase=phase)

    def _lower_mm(self, h: Hop) -> Lop:
        mm = h.params.get("mm") or {"method": "ba+*"}
        method = mm["method"]
        if method == TSMM:
            x = self.lower(h.children[1])
            if h.exec_type != MR:
                return self.node(h, "cp", "tsmm", [x], args=["LEFT"])
            t = self.node(h, "mr", "tsmm", [x], args=["LEFT"], phase="map")
            if mm.get("aggregate"):
                return self.node(h, "mr", "ak+", [t], args=["true", "NONE"], phase="agg")
            return t
        a, b = self.lower(h.children[0]), self.lower(h.children[1])
        if method == MAPMM:
            ins = [a, b]
            if mm.get("partition"):
                i = mm["broadcast"]
                src = ins[i]
                ins[i] = self.new("cp", "partition", [src], mc=src.mc, args=[mm["partition"]],
                                  partition=mm["partition"])
            m = self.node(h, "mr", "mapmm", ins, args=[mm["side"], "false"], phase="map")
            if mm.get("aggregate"):
                return self.node(h, "mr", "ak+", [m], args=["true", "NONE"], phase="agg")
            return m
        if method == CPMM:
            m = self.node(h, "mr", "cpmm", [a, b], phase="shuffle")
            return self.node(h, "mr", "ak+", [m], args=["true", "NONE"], phase="agg")
        return self.node(h, "cp", "ba+*", [a, b])

    # --- emission ------------------------------------------------------------

    def available(self, lop: Lop) -> bool:
        return lop.kind in ("literal", "var") or lop.id in self.emitted

    def out_operand(self, lop: Lop) -> Operand:
        if lop.data_type == "MATRIX":
            name, path = self.gen.names.matrix()
            self.insts.append(Instruction("createvar", outputs=[Operand(name)], path=path,
                                          temp=True, fmt="binaryblock", mc=lop.mc))
            return Operand(name)
        return Operand(self.gen.names.scalar(), "SCALAR", lop.value_type)

    def emit_cp(self, lop: Lop):
        ins = [i.out for i in lop.inputs]
        if lop.kind == "pread":
            h = lop.hop
            self.insts.append(Instruction("createvar", outputs=[lop.out], path=h.params["path"],
                                          temp=False, fmt=h.params.get("format", "binaryblock"),
                                          mc=lop.mc))
        elif lop.kind == "assign":
            out = Operand(lop.name, lop.data_type, lop.value_type)
            self.insts.append(Instruction("assignvar", [ins[0]], [out]))
            self.gen.bind(lop.name)
        elif lop.kind == "write":
            path, fmt = lop.args
            self.insts.append(Instruction("write", [ins[0], Operand.lit(path), Operand.lit(fmt)],
                                          fmt=fmt))
        elif lop.opcode in ("rand", "seq"):
            lop.out = self.out_operand(lop)
            self.insts.append(Instruction(lop.opcode, ins, [lop.out], args=self.gen_args(lop)))
        elif lop.opcode == "fcall":
            outs = [Operand(o, "MATRIX" if lop.data_type == "MATRIX" else "SCALAR", lop.value_type)
                    for o in lop.hop.params.get("outputs", [])]
            self.insts.append(Instruction("fcall", ins, outs, args=[lop.name]))
            for o in outs:
                self.gen.bind(o.name)
            lop.out = outs[0] if outs else None
        else:
            lop.out = self.out_operand(lop)
            self.insts.append(Instruction(lop.opcode, ins, [lop.out], args=list(lop.args)))
        self.emitted.add(lop.id)

    def gen_args(self, lop: Lop) -> list:
        """Text arguments of rand/seq: rows cols br bc then value fields."""
        mc = lop.mc

        def dim(v, src):
            return str(v) if v >= 0 else src.out.name

        def num(src):
            if src.kind == "literal" and not isinstance(src.value, str):
                return format_value(float(src.value))
            return src.out.name

        b = str(self.cc.block_size)
        if lop.opcode == "rand":
            p = lop.hop.params
            return [dim(mc.rows, lop.inputs[0]), dim(mc.cols, lop.inputs[1]), b, b,
                    num(lop.inputs[2]), num(lop.inputs[3]), format_value(float(p.get("sparsity", 1.0))),
                    str(p.get("seed", -1)), str(p.get("pdf", "uniform"))]
        return [dim(mc.rows, lop.inputs[0]), "1", b, b] + [num(i) for i in lop.inputs]

    def flush(self):
        closure, ids = [], set()
        pending = [l for l in self.lops if l.is_mr and l.id not in self.emitted]
        changed = True
        while changed:
            changed = False
            for l in pending:
                if l.id in ids:
                    continue
                if all(self.available(i) or i.id in ids for i in l.inputs):
                    closure.append(l)
                    ids.add(l.id)
                    changed = True
        if not closure:
            return False
        closure.sort(key=lambda l: (l.level, l.id))
        by_id = {l.id: l for l in closure}
        ops = [MROp(l.id, l.phase, tuple(i.id for i in l.inputs if i.id in ids),
                    replicable=(l.opcode == "r'" and all(i.id not in ids for i in l.inputs)))
               for l in closure]
        consumers: dict = {}
        for l in self.lops:
            for i in l.inputs:
                consumers.setdefault(i.id, []).append(l)
        deferred_srcs = {src.id for src, _ in self.deferred}
        replicated = {o.id for o in ops if o.replicable}
        for plan in piggyback(ops):
            self.emit_job([by_id[i] for i in plan.ops], plan.job_type, consumers,
                          deferred_srcs, replicated, ids)
        for l in closure:
            self.emitted.add(l.id)
        return True

    def emit_job(self, members: list, job_type: str, consumers: dict, deferred_srcs: set,
                 replicated: set, flushed: set):
        phases = ("rand", "map", "shuffle", "agg", "other")
        ordered = sorted(members, key=lambda l: phases.index(l.phase))
        in_job = {l.id for l in members}
        labels, index = [], {}
        partitioned = {}
        for l in ordered:
            for i in l.inputs:
                if i.data_type != "MATRIX" or i.id in in_job:
                    continue
                name = i.out.name
                if name not in index:
                    index[name] = len(labels)
                    labels.append(name)
                    if i.partition:
                        partitioned[name] = i.partition
        local = {}
        mr_insts = []
        next_ix = len(labels)
        for l in ordered:
            ops = []
            for i in l.inputs:
                if i.id in in_job:
                    ops.append(local[i.id])
                elif i.data_type == "MATRIX":
                    ops.append(index[i.out.name])
                else:
                    ops.append(i.out)
            local[l.id] = next_ix
            args = self.gen_args(l) if l.opcode in ("rand", "seq") else list(l.args)
            mr_insts.append(MRInstruction(l.opcode, ops, next_ix, l.phase, l.mc, args))
            next_ix += 1
        outputs, result_ix, out_mcs = [], [], []
        for l in ordered:
            needed = l.id in deferred_srcs or not consumers.get(l.id)
            for c in consumers.get(l.id, []):
                if not c.is_mr:
                    needed = True
                elif c.id not in in_job and not (l.id in replicated and c.id in flushed):
                    needed = True
            if l.out is not None:
                needed = False     # already materialized by an earlier job
            if needed:
                l.out = self.out_operand(l)
                outputs.append(l.out.name)
                result_ix.append(local[l.id])
                out_mcs.append(l.mc)
        self.insts.append(MRJob(job_type, labels, mr_insts, outputs, result_ix, out_mcs,
                                num_reducers=self.cc.num_reducers, partitioned_inputs=partitioned))

    def run(self, roots: list) -> list:
        for r in roots:
            self.lower(r)
        for lop in sorted(self.lops, key=lambda l: (l.level, l.id)):
            if lop.is_mr:
                continue
            if any(i.is_mr and i.id not in self.emitted for i in lop.inputs):
                self.flush()
            self.emit_cp(lop)
        while any(l.is_mr and l.id not in self.emitted for l in self.lops):
            if not self.flush():
                raise CompileError("unschedulable MR operators")
        self.emit_deferred()
        return self.insts

    def emit_deferred(self):
        targets = {name for _, name in self.deferred}
        sources = []
        for src, name in self.deferred:
            op = src.out
            if src.kind == "var" and src.name in targets and src.name != name:
                # the source is overwritten in this block; copy it first
                tmp = Operand(self.gen.names.scalar() if src.data_type != "MATRIX"
                              else self.gen.names.matrix()[0], op.data_type, op.value_type)
                self.insts.append(Instruction("cpvar", [op], [tmp]))
                op = tmp
            sources.append((op, name))
        for op, name in sources:
            if op.name == name:
                self.gen.bind(name)
                continue          # produced directly under its final name (fcall)
            self.insts.append(Instruction("cpvar", [op], [Operand(name, op.data_type, op.value_type)]))
            self.gen.bind(name)


def insert_rmvars(insts: list) -> list:
    """Insert ``rmvar`` right after the last use of every temporary."""
    last: dict = {}
    for pos, inst in enumerate(insts):
        for name in inst.var_names:
            if _is_temp(name):
                last[name] = pos
    out = []
    for pos, inst in enumerate(insts):
        out.append(inst)
        seen = []
        for name in inst.var_names:
            if last.get(name) == pos and name not in seen:
                seen.append(name)
                out.append(Instruction("rmvar", [Operand(name)]))
    return out


class CodeGenerator:
    def __init__(self, cc, pid: Optional[int] = None):
        self.cc = cc
        self.names = _VarNames(cc, pid)
        self.bound: list = []

    def bind(self, name: str):
        if name not in self.bound:
            self.bound.append(name)

    def dag(self, roots: list) -> list:
        return insert_rmvars(_DagGen(self).run(roots))

    def scalar_dag(self, h: Hop) -> list:
        """Instructions evaluating a predicate or loop bound (result var removed at the end)."""
        return self.dag([h])

    def generic(self, b: GenericBlock) -> RtGeneric:
        insts = self.dag(b.roots)
        dead = [n for n in self.bound if n not in b.live_out]
        if dead:
            insts.append(Instruction("rmvar", [Operand(n) for n in dead]))
            self.bound = [n for n in self.bound if n in b.live_out]
        return RtGeneric(insts, b.lines, b.recompile)

    def blocks(self, blocks: list) -> list:
        return [self.block(b) for b in blocks]

    def block(self, b):
        if isinstance(b, GenericBlock):
            return self.generic(b)
        if isinstance(b, IfBlock):
            pred = self.scalar_dag(b.predicate)
            saved = list(self.bound)
            then_b = self.blocks(b.then_blocks)
            after_then = self.bound
            self.bound = saved
            else_b = self.blocks(b.else_blocks)
            for n in after_then:
                self.bind(n)
            return RtIf(pred, then_b, else_b, b.lines, b.recompile)
        if isinstance(b, WhileBlock):
            pred = self.scalar_dag(b.predicate)
            return RtWhile(pred, self.blocks(b.body), b.lines, b.recompile)
        if isinstance(b, ForBlock):
            header = []
            for h in (b.start, b.stop, b.step):
                if h is not None:
                    header += self.scalar_dag(h)
            iters = _trip_count(b)
            self.bind(b.var)
            body = self.blocks(b.body)
            return RtFor(header, body, b.lines, b.parallel, iters, b.var, b.recompile)
        raise TypeError(f"unknown block {b!r}")

    def cleanup(self, keep=()) -> Optional[RtGeneric]:
        dead = [n for n in self.bound if n not in keep]
        self.bound = [n for n in self.bound if n in keep]
        if not dead:
            return None
        return RtGeneric([Instruction("rmvar", [Operand(n) for n in dead])], (0, 0))


def _trip_count(b: ForBlock) -> Optional[int]:
    vals = [b.start.value if b.start.is_literal else None,
            b.stop.value if b.stop.is_literal else None,
            (b.step.value if b.step.is_literal else None) if b.step is not None else 1]
    if any(v is None or isinstance(v, (str, bool)) for v in vals):
        return None
    start, stop, step = vals
    if step == 0:
        return None
    return max(0, int((stop - start) // step) + 1)


def generate_runtime(prog: HopProgram, cc, pid: Optional[int] = None) -> RuntimeProgram:
    """Lower a fully optimized HOP program into a :class:`RuntimeProgram`.

    ``pid`` fixes the process-id component of scratch paths (defaults to the
    current process id).
    """
    gen = CodeGenerator(cc, pid)
    functions = {}
    for name, f in prog.functions.items():
        outer = gen.bound
        gen.bound = [p.name for p in f.params]
        body = gen.blocks(f.body)
        tail = gen.cleanup(keep=[r.name for r in f.returns])
        if tail is not None:
            tail.lines = (f.lines[1], f.lines[1])
            body.append(tail)
        params = [(p.name, "MATRIX" if p.type == "matrix" else "SCALAR") for p in f.params]
        functions[name] = RtFunction(name, params, [r.name for r in f.returns], body, f.lines)
        gen.bound = outer
    blocks = gen.blocks(prog.blocks)
    tail = gen.cleanup()
    if tail is not None:
        last = blocks[-1].lines[1] if blocks else 0
        tail.lines = (last, last)
        blocks.append(tail)
    return RuntimeProgram(blocks, functions)

