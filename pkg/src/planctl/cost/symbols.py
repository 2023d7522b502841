"""Live-variable tracking for the cost estimator.

Names map to shared :class:`VariableState` objects, so a ``cpvar`` alias and
its source see the same location: once either is read into memory, neither
pays the read again.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional

from ..hops.characteristics import MatrixCharacteristics

HDFS = "HDFS"
MEM = "MEM"
PENDING = "PENDING"      # created, not yet produced


class CostError(RuntimeError):
    """Malformed plan, e.g. a read of an undefined variable."""


@dataclass
class VariableState:
    name: str
    mc: MatrixCharacteristics = field(default_factory=MatrixCharacteristics)
    format: str = "binaryblock"
    location: str = PENDING
    partitioned: bool = False
    dirty: bool = False               # in memory only, not yet on HDFS
    source: Optional[str] = None      # path of a persistent read
    is_matrix: bool = True


@dataclass
class SymbolTable:
    vars: dict = field(default_factory=dict)
    stack: list = field(default_factory=list)      # active function names
    warnings: list = field(default_factory=list)

    def __contains__(self, name: str) -> bool:
        return name in self.vars

    def get(self, name: str) -> Optional[VariableState]:
        return self.vars.get(name)

    def lookup(self, name: str, inst_text: str) -> VariableState:
        st = self.vars.get(name)
        if st is None:
            raise CostError(f"{inst_text}: read of undefined variable '{name}'")
        return st

    def put(self, state: VariableState):
        self.vars[state.name] = state

    def scalar(self, name: str):
        if name not in self.vars:
            self.vars[name] = VariableState(name, MatrixCharacteristics.scalar(), location=MEM,
                                            is_matrix=False)

    def remove(self, name: str):
        if self.vars.pop(name, None) is None:
            self.warnings.append(f"rmvar of unknown variable '{name}'")

    def snapshot(self) -> "SymbolTable":
        """Deep copy that keeps aliasing between names intact."""
        return SymbolTable(copy.deepcopy(self.vars), list(self.stack), self.warnings)

    def enter(self, fname: str, bindings: dict) -> "SymbolTable":
        if fname in self.stack:
            raise CostError(f"recursive call of '{fname}' while costing")
        return SymbolTable(dict(bindings), self.stack + [fname], self.warnings)

    def merge(self, other: "SymbolTable"):
        """Join two branch states: a variable is in memory only if it is in both."""
        for name, st in other.vars.items():
            mine = self.vars.get(name)
            if mine is None:
                self.vars[name] = st
            elif mine is not st and mine.location != st.location:
                mine.location = HDFS if HDFS in (mine.location, st.location) else mine.location
                mine.dirty = mine.dirty or st.dirty


def track_instruction(inst, st: SymbolTable) -> SymbolTable:
    """Apply the bookkeeping effect of ``inst`` on ``st`` (in place)."""
    op = inst.opcode
    if op == "createvar":
        name = inst.outputs[0].name
        persistent = not inst.temp
        st.put(VariableState(name, inst.mc or MatrixCharacteristics(), inst.fmt,
                             HDFS if persistent else PENDING,
                             source=inst.path if persistent else None))
    elif op == "cpvar":
        src = st.lookup(inst.inputs[0].name, inst.text())
        st.vars[inst.outputs[0].name] = src
    elif op == "rmvar":
        for o in inst.inputs:
            st.remove(o.name)
    elif op == "assignvar":
        st.scalar(inst.outputs[0].name)
    elif op in ("rand", "seq"):
        out = inst.outputs[0].name
        state = st.get(out)
        if state is None:
            state = VariableState(out)
            st.put(state)
        state.location, state.dirty = MEM, True
    return st
