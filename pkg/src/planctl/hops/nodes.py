"""HOP DAG nodes and the program-block hierarchy that holds them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .characteristics import MatrixCharacteristics

DATA_OPS = ("PRead", "PWrite", "TRead", "TWrite")
MATRIX, SCALAR, STRING = "matrix", "scalar", "string"


class CompileError(Exception):
    def __init__(self, message: str, hop_id: Optional[int] = None, line: int = 0):
        self.message = message
        self.hop_id = hop_id
        self.line = line
        where = []
        if hop_id is not None:
            where.append(f"HOP {hop_id}")
        if line:
            where.append(f"line {line}")
        super().__init__((", ".join(where) + ": " if where else "") + message)


@dataclass(eq=False)
class Hop:
    id: int
    op: str
    children: list = field(default_factory=list)
    data_type: str = MATRIX
    value_type: str = "double"
    name: Optional[str] = None
    value: object = None
    params: dict = field(default_factory=dict)
    line: int = 0
    mc: MatrixCharacteristics = field(default_factory=MatrixCharacteristics)
    mem_estimate: float = 0.0
    exec_type: Optional[str] = None

    @property
    def is_literal(self) -> bool:
        return self.op == "literal"

    @property
    def is_matrix(self) -> bool:
        return self.data_type == MATRIX

    def __repr__(self):
        kids = ",".join(str(c.id) for c in self.children)
        label = f" {self.name}" if self.name else (f" {self.value!r}" if self.is_literal else "")
        return f"Hop({self.id} {self.op}{label} ({kids}))"


class HopIds:
    def __init__(self, start: int = 1):
        self._it = itertools.count(start)

    def __call__(self) -> int:
        return next(self._it)


@dataclass(eq=False)
class GenericBlock:
    roots: list
    lines: tuple
    live_out: frozenset = frozenset()
    recompile: bool = False
    kind: str = "generic"


@dataclass(eq=False)
class IfBlock:
    predicate: Hop
    then_blocks: list
    else_blocks: list
    lines: tuple
    recompile: bool = False
    kind: str = "if"


@dataclass(eq=False)
class WhileBlock:
    predicate: Hop
    body: list
    lines: tuple
    recompile: bool = False
    kind: str = "while"


@dataclass(eq=False)
class ForBlock:
    var: str
    start: Hop
    stop: Hop
    step: Optional[Hop]
    body: list
    lines: tuple
    parallel: bool = False
    recompile: bool = False

    @property
    def kind(self) -> str:
        return "parfor" if self.parallel else "for"


@dataclass(eq=False)
class FunctionBlock:
    name: str
    params: list      # list of frontend Param
    returns: list
    body: list
    lines: tuple
    recompile: bool = False
    kind: str = "function"


@dataclass(eq=False)
class HopProgram:
    blocks: list
    functions: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    ids: HopIds = field(default_factory=HopIds)


def block_dag_roots(block) -> list:
    """HOP roots owned directly by ``block`` (not by its children)."""
    if isinstance(block, GenericBlock):
        return list(block.roots)
    if isinstance(block, (IfBlock, WhileBlock)):
        return [block.predicate]
    if isinstance(block, ForBlock):
        return [h for h in (block.start, block.stop, block.step) if h is not None]
    return []


def child_blocks(block) -> list:
    if isinstance(block, IfBlock):
        return block.then_blocks + block.else_blocks
    if isinstance(block, (WhileBlock, ForBlock, FunctionBlock)):
        return block.body
    return []


def iter_blocks(blocks) -> Iterator:
    for b in blocks:
        yield b
        yield from iter_blocks(child_blocks(b))


def iter_program_blocks(prog: HopProgram) -> Iterator:
    for f in prog.functions.values():
        yield f
        yield from iter_blocks(f.body)
    yield from iter_blocks(prog.blocks)


def iter_dag(roots) -> Iterator[Hop]:
    """Children-first traversal visiting each HOP once, in root order."""
    seen = set()
    out = []

    def visit(h):
        if id(h) in seen:
            return
        seen.add(id(h))
        for c in h.children:
            visit(c)
        out.append(h)

    for r in roots:
        visit(r)
    return iter(out)


def iter_program_hops(prog: HopProgram) -> Iterator[Hop]:
    for b in iter_program_blocks(prog):
        yield from iter_dag(block_dag_roots(b))


def rewrite_dag(roots: list, fn: Callable[[Hop], Hop]) -> list:
    """Bottom-up rewrite: children are rewritten first, then ``fn(hop)``.

    ``fn`` returns the HOP to use in place of its argument (possibly itself).
    """
    memo: dict = {}

    def visit(h):
        if id(h) in memo:
            return memo[id(h)]
        h.children = [visit(c) for c in h.children]
        new = fn(h)
        memo[id(h)] = new
        return new

    return [visit(r) for r in roots]


def map_block_dags(blocks: list, fn: Callable[[Hop], Hop]) -> None:
    for b in iter_blocks(blocks):
        if isinstance(b, GenericBlock):
            b.roots = rewrite_dag(b.roots, fn)
        elif isinstance(b, (IfBlock, WhileBlock)):
            b.predicate = rewrite_dag([b.predicate], fn)[0]
        elif isinstance(b, ForBlock):
            b.start, b.stop = rewrite_dag([b.start, b.stop], fn)
            if b.step is not None:
                b.step = rewrite_dag([b.step], fn)[0]
