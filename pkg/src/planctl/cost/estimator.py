"""White-box time estimates for runtime programs.

The estimator walks the plan once in execution order.  A symbol table tracks
the size and location of every live variable, so a persistent input is read
by the first in-memory consumer only.  Instruction estimates are folded over
control flow: loops scale their body, conditionals average their branches.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..config import MB, ClusterConfig
from ..hops.characteristics import mem_estimate_matrix, serialized_size
from ..runtime.instructions import (BOOKKEEPING, Instruction, MRJob, RtFor, RtFunction,
                                    RtGeneric, RtIf, RtWhile, RuntimeProgram)
from .flops import cycle_estimate, flop_estimate
from .symbols import HDFS, MEM, CostError, SymbolTable, VariableState, track_instruction

JOB_COMPONENTS = ("latency", "hdfsread", "mapexec", "dcread", "shuffle", "redexec", "hdfswrite")
MAP_PHASES = ("rand", "map")
REDUCE_PHASES = ("shuffle", "agg", "other")


@dataclass
class InstCost:
    io: float
    compute: float
    read_io: float = 0.0          # part of ``io`` spent reading persistent inputs
    unknown: bool = False

    @property
    def total(self):
        return self.io + self.compute


@dataclass
class JobCost:
    nmap: int
    nred: int
    components: dict
    export: float = 0.0           # CP-side write of in-memory inputs
    unknown: bool = False
    read_io: float = 0.0

    @property
    def total(self) -> float:
        return sum(self.components.values()) + self.export


@dataclass
class CostReport:
    total: float
    instructions: dict = field(default_factory=dict)   # id(inst) -> InstCost | JobCost
    blocks: dict = field(default_factory=dict)         # id(block) -> estimate
    functions: dict = field(default_factory=dict)      # name -> estimate of one call
    underestimate: bool = False
    unknown_instructions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    read_events: list = field(default_factory=list)    # (region, source path)
    final_vars: list = field(default_factory=list)

    def cost_of(self, inst):
        return self.instructions.get(id(inst))

    @property
    def mr_jobs(self) -> list:
        return [c for c in self.instructions.values() if isinstance(c, JobCost)]


# --- control-flow aggregation --------------------------------------------------

def _exact(v):
    """Integral floats become ints so that exact (Fraction) arithmetic survives."""
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v


def _mean(values: list):
    total = sum(values)
    # keep exact arithmetic exact: int / int would turn into a float
    return Fraction(total, len(values)) if isinstance(total, int) else total / len(values)


def iteration_count(b, cc: ClusterConfig):
    n = getattr(b, "iterations", None)
    return n if n is not None else _exact(cc.calibration.unknown_iterations)


def block_weight(b, cc: ClusterConfig):
    if isinstance(b, RtFor) and b.parallel:
        n = iteration_count(b, cc)
        return -(-n // cc.k_local)
    if isinstance(b, (RtFor, RtWhile)):
        return iteration_count(b, cc)
    return 1


def aggregate_block(b, child_estimates: list, cc: ClusterConfig, predicate=0, read_io=0):
    """Fold child estimates into the estimate of block ``b``.

    For conditionals ``child_estimates`` holds one total per branch (a missing
    else branch counts as an empty one) and the predicate is charged once.
    For loops the predicate is part of every iteration, and ``read_io`` is
    the persistent-read share which only the first iteration pays.
    """
    if isinstance(b, RtIf):
        branches = list(child_estimates) + [0] * max(0, 2 - len(child_estimates))
        return predicate + _mean(branches)
    w = block_weight(b, cc)
    body = predicate + sum(child_estimates)
    if w == 1:
        return body
    return w * (body - read_io) + read_io


# --- instruction costing -------------------------------------------------------

def _finite(v: float) -> bool:
    return v is not None and math.isfinite(v)


def _unique(states: list) -> list:
    seen, out = set(), []
    for s in states:
        if id(s) not in seen:
            seen.add(id(s))
            out.append(s)
    return out


def cost_cp_instruction(inst: Instruction, st: SymbolTable, cc: ClusterConfig,
                        events: Optional[list] = None, region=None) -> InstCost:
    """[io, compute] of one CP instruction; updates ``st`` afterwards."""
    cal = cc.calibration
    if inst.opcode in BOOKKEEPING:
        track_instruction(inst, st)
        return InstCost(0.0, cal.bookkeeping_cycles / cal.clock_hz)
    text = inst.text()
    ins = [st.lookup(o.name, text) for o in inst.inputs if not o.literal]
    unknown = False
    io = read_io = 0.0
    for s in _unique(ins):
        if not s.is_matrix or s.location != HDFS:
            continue
        size = serialized_size(s.mc, s.format)
        if not _finite(size):
            unknown = True
            continue
        t = size / cal.read_bandwidth(s.format)
        io += t
        if s.source is not None:
            read_io += t
            if events is not None:
                events.append((region, s.source))

    outs = []
    for o in inst.outputs:
        if o.data_type != "MATRIX":
            st.scalar(o.name)
            continue
        s = st.get(o.name)
        if s is None:
            s = VariableState(o.name)
            st.put(s)
        outs.append(s)
    in_mcs = [s.mc for s in ins if s.is_matrix]
    out_mc = outs[0].mc if outs else None
    op = inst.opcode
    if op == "write":
        size = serialized_size(in_mcs[0], inst.fmt, cal.textcell_bytes_per_cell)
        if _finite(size):
            io += size / cal.write_bandwidth(inst.fmt)
        else:
            unknown = True
    elif op == "partition":
        size = serialized_size(out_mc, "binaryblock")
        if _finite(size):
            io += size / cal.write_bandwidth("binaryblock")
        else:
            unknown = True

    flops = flop_estimate(op, in_mcs, out_mc, cal, inst.args)
    cycles = cycle_estimate(op, in_mcs, cal, inst.fmt)
    traffic = sum(mem_estimate_matrix(mc) for mc in in_mcs)
    if out_mc is not None:
        traffic += mem_estimate_matrix(out_mc)
    if flops is None or cycles is None or not _finite(traffic):
        unknown = True
    compute = max((traffic if _finite(traffic) else 0.0) / (cal.main_memory_mbs * MB),
                  (flops or 0.0) / cal.cycles_per_second)
    compute += (cycles or 0.0) / cal.clock_hz

    for s in ins:
        if s.is_matrix and s.location == HDFS:
            s.location = MEM
    for s in outs:
        if op == "partition":
            s.location, s.dirty, s.partitioned = HDFS, False, True
        else:
            s.location, s.dirty = MEM, True
    return InstCost(io, compute, read_io, unknown)


def _num_reducers(job: MRJob, mcs: dict, cc: ClusterConfig) -> int:
    """Reduce tasks: one per result block, or per common-dimension block for cpmm."""
    if not job.has_reduce:
        return 0
    blocks = []
    for inst in job.instructions:
        if inst.phase == "shuffle" and inst.opcode == "cpmm":
            a = mcs[inst.inputs[0]]
            blocks.append(math.ceil(a.cols / cc.block_size) if a.dims_known else 1)
        elif inst.phase in REDUCE_PHASES:
            blocks.append(max(1, inst.mc.num_blocks()))
    return max(1, min(cc.num_reducers, max(blocks)))


def cost_mr_job(job: MRJob, st: SymbolTable, cc: ClusterConfig) -> JobCost:
    """Component breakdown of one MR job; job outputs end up on HDFS."""
    cal = cc.calibration
    states = [st.lookup(label, "MR-Job") for label in job.input_labels]

    export = 0.0
    for s in _unique(states):
        if s.location == MEM and s.dirty:
            size = serialized_size(s.mc, s.format)
            if _finite(size):
                export += size / cal.write_bandwidth("binaryblock")
            s.dirty = False

    sizes = [serialized_size(s.mc, s.format) for s in states]
    unknown = not all(_finite(v) for v in sizes)
    volume = sum(v for v in sizes if _finite(v))
    nmap = max(1, math.ceil(volume / cc.hdfs_block_size))
    disc = cal.parallelism_discount
    p_m = max(1.0, disc * min(cc.effective_k_map, nmap))
    comp = dict.fromkeys(JOB_COMPONENTS, 0.0)

    mcs = {i: s.mc for i, s in enumerate(states)}
    for inst in job.instructions:
        mcs[inst.output] = inst.mc
    producer = {inst.output: inst for inst in job.instructions}
    nred = _num_reducers(job, mcs, cc)
    p_r = max(1.0, disc * min(cc.effective_k_reduce, nred)) if nred else 1.0
    comp["latency"] = cal.job_latency_s + cal.task_latency_s * (nmap / p_m + nred / p_r)

    def ser(ix) -> float:
        fmt = states[ix].format if ix < len(states) else "binaryblock"
        return serialized_size(mcs[ix], fmt)

    if not unknown:
        comp["hdfsread"] = volume / (p_m * cal.hdfs_read_mbs * MB)
        map_flops = red_flops = shuffle = dc = 0.0
        for inst in job.instructions:
            ixs = [i for i in inst.inputs if isinstance(i, int)]
            in_mcs = [mcs[i] for i in ixs]
            if inst.phase in MAP_PHASES:
                f = flop_estimate(inst.opcode, in_mcs, inst.mc, cal, inst.args)
                unknown |= f is None
                map_flops += f or 0.0
                if inst.opcode == "mapmm":
                    bix = ixs[1] if inst.args and inst.args[0] == "RIGHT_PART" else ixs[0]
                    size = ser(bix)
                    per_task = size
                    if bix < len(states) and states[bix].partitioned:
                        parts = max(1, math.ceil(size / cc.partition_size))
                        per_task = size / parts * max(1, math.ceil(parts / nmap))
                    dc += per_task * nmap
                continue
            # reduce side
            if inst.opcode == "ak+":
                src = ixs[0]
                out_size = serialized_size(inst.mc)
                if src in producer and producer[src].phase in MAP_PHASES:
                    copies = nmap                  # one combined partial per map task
                else:
                    copies = max(1.0, min(nmap, ser(src) / out_size))
                shuffle += copies * out_size
                red_flops += cal.kahan_flops_per_cell * copies * inst.mc.cells
            else:
                shuffle += sum(ser(i) for i in ixs if i not in producer
                               or producer[i].phase in MAP_PHASES)
                f = flop_estimate(inst.opcode, in_mcs, inst.mc, cal, inst.args)
                unknown |= f is None
                red_flops += f or 0.0
        comp["mapexec"] = map_flops / (p_m * cal.cycles_per_second)
        comp["dcread"] = dc / (p_m * cal.local_disk_mbs * MB)
        comp["shuffle"] = shuffle / (p_m * cal.shuffle_mbs * MB)
        comp["redexec"] = red_flops / (p_r * cal.cycles_per_second)
        out_size = sum(serialized_size(mc) for mc in job.output_mcs)
        if _finite(out_size):
            comp["hdfswrite"] = out_size / ((p_r if nred else p_m) * cal.hdfs_write_mbs * MB)
        else:
            unknown = True
        if not all(_finite(v) for v in comp.values()):
            unknown = True
            comp = {k: (v if _finite(v) else 0.0) for k, v in comp.items()}

    for label, mc in zip(job.output_labels, job.output_mcs or [None] * len(job.output_labels)):
        s = st.get(label)
        if s is None:
            s = VariableState(label)
            st.put(s)
        if mc is not None and not s.mc.dims_known:
            s.mc = mc
        s.location, s.dirty = HDFS, False
    return JobCost(nmap, nred, comp, export, unknown)


# --- program walk --------------------------------------------------------------

class Estimator:
    """Single-pass plan walker.

    ``inst_coster(inst, st)`` may replace the built-in instruction model; it
    must return an object with ``total`` and ``read_io`` attributes.
    """

    def __init__(self, cc: ClusterConfig, functions: Optional[dict] = None,
                 inst_coster: Optional[Callable] = None, input_meta: Optional[dict] = None):
        self.cc = cc
        self.input_meta = input_meta or {}
        self.functions = functions or {}
        self.inst_coster = inst_coster
        self.report = CostReport(0.0)
        self.region = None

    def instruction(self, inst, st: SymbolTable):
        if self.inst_coster is not None:
            c = self.inst_coster(inst, st)
        elif isinstance(inst, MRJob):
            c = cost_mr_job(inst, st, self.cc)
        elif inst.opcode == "fcall":
            c = self.call(inst, st)
        else:
            c = cost_cp_instruction(inst, st, self.cc, self.report.read_events, self.region)
            if inst.opcode == "createvar" and not inst.temp and inst.path in self.input_meta:
                state = st.get(inst.outputs[0].name)
                if not state.mc.dims_known:
                    state.mc = self.input_meta[inst.path]
        self.report.instructions.setdefault(id(inst), c)
        if getattr(c, "unknown", False):
            self.report.underestimate = True
            text = "MR-Job" if isinstance(inst, MRJob) else inst.text()
            if text not in self.report.unknown_instructions:
                self.report.unknown_instructions.append(text)
        return c

    def call(self, inst: Instruction, st: SymbolTable) -> InstCost:
        name = inst.args[0]
        f = self.functions.get(name)
        if f is None:
            raise CostError(f"{inst.text()}: unknown function '{name}'")
        args = [st.lookup(o.name, inst.text()) if not o.literal else None for o in inst.inputs]
        if name in st.stack:
            # recursion: the body is already being charged by an outer call
            self.report.warnings.append(f"recursive call of '{name}' charged once")
            for o in inst.outputs:
                self._bind_output(st, o, None)
            return InstCost(0.0, 0.0)
        bindings = {}
        for (pname, ptype), s in zip(f.params, args):
            bindings[pname] = s if s is not None else VariableState(
                pname, location=MEM, is_matrix=(ptype == "MATRIX"))
        callee = st.enter(name, bindings)
        saved = self.region
        total, read_io = self.blocks(f.body, callee)
        self.region = saved
        self.report.functions.setdefault(name, total)
        for o, r in zip(inst.outputs, f.returns):
            self._bind_output(st, o, callee.get(r))
        return InstCost(0.0, total, read_io)

    @staticmethod
    def _bind_output(st: SymbolTable, o, state: Optional[VariableState]):
        if state is None:
            state = VariableState(o.name, location=MEM, is_matrix=o.data_type == "MATRIX")
        st.vars[o.name] = state

    def insts(self, insts: list, st: SymbolTable) -> tuple:
        total = read = 0
        for inst in insts:
            c = self.instruction(inst, st)
            total += c.total
            read += c.read_io
        return total, read

    def blocks(self, blocks: list, st: SymbolTable) -> tuple:
        total = read = 0
        for b in blocks:
            t, r = self.block(b, st)
            total += t
            read += r
        return total, read

    def block(self, b, st: SymbolTable) -> tuple:
        self.region = id(b)
        if isinstance(b, RtGeneric):
            t, r = self.insts(b.instructions, st)
            est = aggregate_block(b, [t], self.cc)
        elif isinstance(b, RtIf):
            pt, pr = self.insts(b.predicate, st)
            else_st = st.snapshot()
            tt, tr = self.blocks(b.then_blocks, st)
            et, er = self.blocks(b.else_blocks, else_st)
            st.merge(else_st)
            est = aggregate_block(b, [tt, et], self.cc, predicate=pt)
            r = pr + _mean([tr, er])
        elif isinstance(b, (RtWhile, RtFor)):
            if isinstance(b, RtFor) and b.var:
                st.scalar(b.var)
            own = b.predicate if isinstance(b, RtWhile) else b.header
            pt, pr = self.insts(own, st)
            bt, br = self.blocks(b.body, st)
            r = pr + br
            est = aggregate_block(b, [bt], self.cc, predicate=pt, read_io=r)
        else:
            raise TypeError(f"unknown block {b!r}")
        self.report.blocks.setdefault(id(b), est)
        return est, r


def cost_program(rp: RuntimeProgram, cc: ClusterConfig, input_meta: Optional[dict] = None,
                 inst_coster: Optional[Callable] = None) -> CostReport:
    """Estimate the execution time of ``rp`` in seconds.

    ``input_meta`` (path -> characteristics) fills in sizes that the plan
    left unknown for persistent reads.
    """
    est = Estimator(cc, rp.functions, inst_coster, input_meta)
    st = SymbolTable(warnings=est.report.warnings)
    total, _ = est.blocks(rp.blocks, st)
    rep = est.report
    rep.total = total
    rep.final_vars = sorted(st.vars)
    for f in rp.functions.values():
        rep.functions.setdefault(f.name, 0.0)
    return rep

