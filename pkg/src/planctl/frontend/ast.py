"""AST node types for the DML-subset scripting language.

Line numbers are carried on every node but excluded from equality, so two
parses of equivalent text compare equal regardless of layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass
class Num:
    value: Union[int, float]
    line: int = field(default=0, compare=False)

    @property
    def is_int(self) -> bool:
        return isinstance(self.value, int) and not isinstance(self.value, bool)


@dataclass
class Str:
    value: str
    line: int = field(default=0, compare=False)


@dataclass
class Bool:
    value: bool
    line: int = field(default=0, compare=False)


@dataclass
class Var:
    name: str
    line: int = field(default=0, compare=False)


@dataclass
class Call:
    name: str
    args: list = field(default_factory=list)
    kwargs: dict = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = field(default=0, compare=False)


@dataclass
class UnaryOp:
    op: str
    operand: "Expr"
    line: int = field(default=0, compare=False)


Expr = Union[Num, Str, Bool, Var, Call, BinOp, UnaryOp]


@dataclass
class Assign:
    target: str
    value: Expr
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass
class Write:
    source: Expr
    path: Expr
    format: Optional[str] = None
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass
class CallStmt:
    call: Call
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass
class If:
    predicate: Expr
    then_body: list
    else_body: list = field(default_factory=list)
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass
class For:
    var: str
    start: Expr
    stop: Expr
    step: Optional[Expr]
    body: list
    parallel: bool = False
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass
class While:
    predicate: Expr
    body: list
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


@dataclass
class Param:
    type: str  # "matrix" | "double" | "int" | "boolean" | "string"
    name: str


@dataclass
class FunctionDef:
    name: str
    params: list
    returns: list
    body: list
    line: int = field(default=0, compare=False)
    end_line: int = field(default=0, compare=False)


Statement = Union[Assign, Write, CallStmt, If, For, While, FunctionDef]


@dataclass
class Script:
    statements: list
    source_name: str = field(default="<string>", compare=False)

    @property
    def functions(self) -> dict:
        return {s.name: s for s in self.statements if isinstance(s, FunctionDef)}

    def statement_count(self) -> int:
        """Number of statements including those nested in blocks."""
        return sum(1 for _ in iter_statements(self.statements))


def iter_statements(stmts):
    for s in stmts:
        yield s
        for body in child_bodies(s):
            yield from iter_statements(body)


def child_bodies(stmt) -> list:
    if isinstance(stmt, If):
        return [stmt.then_body, stmt.else_body]
    if isinstance(stmt, (For, While, FunctionDef)):
        return [stmt.body]
    return []


def iter_exprs(expr):
    """Pre-order walk over an expression tree."""
    yield expr
    if isinstance(expr, BinOp):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)
    elif isinstance(expr, UnaryOp):
        yield from iter_exprs(expr.operand)
    elif isinstance(expr, Call):
        for a in expr.args:
            yield from iter_exprs(a)
        for a in expr.kwargs.values():
            yield from iter_exprs(a)


def expr_vars(expr) -> set:
    return {e.name for e in iter_exprs(expr) if isinstance(e, Var)}
