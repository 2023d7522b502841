"""Lowering of a validated script into program blocks of HOP DAGs.

Straight-line statements merge into generic blocks; values crossing block
boundaries travel through transient write/read pairs, emitted only for
variables that are live at block exit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend import ast
from ..frontend.builtins import BUILTINS, FORMATS, bind_args
from .nodes import (MATRIX, SCALAR, STRING, CompileError, ForBlock, FunctionBlock,
                    GenericBlock, Hop, HopIds, HopProgram, IfBlock, WhileBlock)

_ARITH = {"+", "-", "*", "/", "^", "==", "!=", "<", ">", "<=", ">=", "&", "|"}
_BOOL_OPS = {"==", "!=", "<", ">", "<=", ">=", "&", "|"}


# --- liveness over statement groups -------------------------------------------------

@dataclass(eq=False)
class _Proto:
    kind: str
    stmts: list = field(default_factory=list)     # generic
    stmt: object = None                           # control statement
    children: list = field(default_factory=list)  # [then, else] or [body]
    live_out: frozenset = frozenset()


def _is_user_call(expr, funcs) -> bool:
    return isinstance(expr, ast.Call) and expr.name in funcs


def _group(stmts: list, funcs: dict) -> list:
    out, run = [], []

    def flush():
        if run:
            out.append(_Proto("generic", stmts=list(run)))
            run.clear()

    for s in stmts:
        if isinstance(s, ast.FunctionDef):
            continue
        if isinstance(s, ast.Assign) and _is_user_call(s.value, funcs) or isinstance(s, ast.CallStmt):
            flush()
            out.append(_Proto("call", stmts=[s]))
        elif isinstance(s, (ast.Assign, ast.Write)):
            run.append(s)
        else:
            flush()
            if isinstance(s, ast.If):
                out.append(_Proto("if", stmt=s, children=[_group(s.then_body, funcs),
                                                          _group(s.else_body, funcs)]))
            else:
                out.append(_Proto("loop", stmt=s, children=[_group(s.body, funcs)]))
    flush()
    return out


def _uses_defs(stmts: list):
    uses, defs = set(), set()
    for s in stmts:
        if isinstance(s, ast.Assign):
            uses |= ast.expr_vars(s.value) - defs
            defs.add(s.target)
        elif isinstance(s, ast.Write):
            uses |= (ast.expr_vars(s.source) | ast.expr_vars(s.path)) - defs
        elif isinstance(s, ast.CallStmt):
            uses |= ast.expr_vars(s.call) - defs
    return uses, defs


def _live_seq(protos: list, live: set) -> set:
    live = set(live)
    for p in reversed(protos):
        live = _live_block(p, live)
    return live


def _live_block(p: _Proto, live: set) -> set:
    p.live_out = frozenset(live)
    if p.kind in ("generic", "call"):
        uses, defs = _uses_defs(p.stmts)
        return uses | (live - defs)
    s = p.stmt
    if p.kind == "if":
        return ast.expr_vars(s.predicate) | _live_seq(p.children[0], live) | _live_seq(p.children[1], live)
    if isinstance(s, ast.While):
        head = ast.expr_vars(s.predicate)
    else:
        head = set()
        for e in (s.start, s.stop, s.step):
            if e is not None:
                head |= ast.expr_vars(e)
    body_in: set = set()
    while True:
        out = live | head | body_in
        new_in = _live_seq(p.children[0], out)
        if new_in == body_in:
            break
        body_in = new_in
    if isinstance(s, ast.For):
        return head | ((live | body_in) - {s.var})
    return head | live | body_in


# --- HOP construction ---------------------------------------------------------------

class _DagBuilder:
    """Builds one DAG; resolves variable reads against the block's own writes."""

    def __init__(self, hb: "HopBuilder", types: dict):
        self.hb = hb
        self.types = types
        self.vars: dict = {}
        self.treads: dict = {}
        self.pwrites: list = []

    def new(self, op, children=(), dt=MATRIX, vt="double", line=0, **kw) -> Hop:
        return Hop(self.hb.ids(), op, list(children), dt, vt, line=line, **kw)

    def literal(self, value, line=0) -> Hop:
        if isinstance(value, bool):
            return self.new("literal", dt=SCALAR, vt="boolean", value=value, line=line)
        if isinstance(value, int):
            return self.new("literal", dt=SCALAR, vt="int", value=value, line=line)
        if isinstance(value, float):
            return self.new("literal", dt=SCALAR, vt="double", value=value, line=line)
        return self.new("literal", dt=STRING, vt="string", value=str(value), line=line)

    def read_var(self, name: str, line: int) -> Hop:
        if name in self.vars:
            return self.vars[name]
        if name not in self.treads:
            dt = self.types.get(name, MATRIX)
            vt = "string" if dt == STRING else "double"
            self.treads[name] = self.new("TRead", dt=dt, vt=vt, name=name, line=line)
        return self.treads[name]

    def expr(self, e, target: Optional[str] = None) -> Hop:
        line = getattr(e, "line", 0)
        if isinstance(e, (ast.Num, ast.Bool, ast.Str)):
            return self.literal(e.value, line)
        if isinstance(e, ast.Var):
            return self.read_var(e.name, line)
        if isinstance(e, ast.UnaryOp):
            c = self.expr(e.operand)
            vt = "boolean" if e.op == "!" else c.value_type
            return self.new(f"u({e.op})", [c], dt=c.data_type, vt=vt, line=line)
        if isinstance(e, ast.BinOp):
            left, right = self.expr(e.left), self.expr(e.right)
            if e.op == "%*%":
                return self.new("ba(+*)", [left, right], line=line)
            dt = MATRIX if MATRIX in (left.data_type, right.data_type) else SCALAR
            if dt == SCALAR and STRING in (left.data_type, right.data_type) and e.op == "+":
                dt = STRING
            if e.op in _BOOL_OPS:
                vt = "boolean" if dt == SCALAR else "double"
            elif dt == SCALAR and left.value_type == right.value_type == "int" and e.op in "+-*":
                vt = "int"
            else:
                vt = "string" if dt == STRING else "double"
            return self.new(f"b({e.op})", [left, right], dt=dt, vt=vt, line=line)
        if isinstance(e, ast.Call):
            return self.call(e, target)
        raise CompileError(f"unsupported expression {e!r}", line=line)

    def call(self, c: ast.Call, target: Optional[str]) -> Hop:
        line = c.line
        if c.name not in BUILTINS:
            raise CompileError(f"call to function '{c.name}' must be a plain assignment "
                               "or statement", line=line)
        bound = bind_args(BUILTINS[c.name], c.args, c.kwargs)
        if c.name == "read":
            path = bound["path"]
            if not isinstance(path, ast.Str):
                raise CompileError("read path must be a string literal or $-argument", line=line)
            fmt = "binaryblock"
            if "format" in bound:
                f = bound["format"]
                if not isinstance(f, ast.Str) or f.value not in FORMATS:
                    raise CompileError("read: unsupported format", line=line)
                fmt = FORMATS[f.value]
            name = target or f"_read{self.hb.ids()}"
            return self.new("PRead", name=name, params={"path": path.value, "format": fmt}, line=line)
        h = {k: self.expr(v) for k, v in bound.items()
             if k not in ("pdf", "seed", "sparsity")}
        if c.name == "matrix":
            return self.new("dg(rand)", [h["rows"], h["cols"], h["data"], h["data"]], line=line,
                            params={"sparsity": 1.0, "seed": -1, "pdf": "uniform"})
        if c.name == "rand":
            params = {"sparsity": 1.0, "seed": -1, "pdf": "uniform"}
            for k in ("sparsity", "seed", "pdf"):
                if k in bound:
                    v = bound[k]
                    if not isinstance(v, (ast.Num, ast.Str)):
                        raise CompileError(f"rand: {k} must be a literal", line=line)
                    params[k] = v.value
            lo = h.get("min") or self.literal(0.0, line)
            hi = h.get("max") or self.literal(1.0, line)
            return self.new("dg(rand)", [h["rows"], h["cols"], lo, hi], params=params, line=line)
        if c.name == "seq":
            incr = h.get("incr") or self.literal(1, line)
            return self.new("dg(seq)", [h["from"], h["to"], incr], line=line)
        if c.name in ("nrow", "ncol"):
            return self.new(f"u({c.name})", [h["target"]], dt=SCALAR, vt="int", line=line)
        if c.name == "sum":
            return self.new("ua(+)", [h["target"]], dt=SCALAR, line=line)
        if c.name == "t":
            return self.new("r(t)", [h["target"]], line=line)
        if c.name == "diag":
            return self.new("r(diag)", [h["target"]], line=line)
        if c.name == "append":
            return self.new("b(append)", [h["left"], h["right"]], line=line)
        if c.name == "solve":
            return self.new("b(solve)", [h["A"], h["b"]], line=line)
        raise CompileError(f"unsupported builtin {c.name}", line=line)


def _type_of(h: Hop) -> str:
    return h.data_type


class HopBuilder:
    def __init__(self, script: ast.Script):
        self.script = script
        self.funcs = script.functions
        self.ids = HopIds(1)

    def build(self) -> HopProgram:
        functions = {}
        for name, f in self.funcs.items():
            protos = _group(f.body, self.funcs)
            _live_seq(protos, {r.name for r in f.returns})
            types = {p.name: (MATRIX if p.type == "matrix" else STRING if p.type == "string" else SCALAR)
                     for p in f.params}
            body = self.blocks(protos, types)
            functions[name] = FunctionBlock(name, list(f.params), list(f.returns), body,
                                            (f.line, f.end_line))
        protos = _group(self.script.statements, self.funcs)
        _live_seq(protos, set())
        blocks = self.blocks(protos, {})
        return HopProgram(blocks, functions, ids=self.ids)

    def blocks(self, protos: list, types: dict) -> list:
        out = []
        for p in protos:
            out.append(self.block(p, types))
        return out

    def dag(self, types):
        return _DagBuilder(self, types)

    def block(self, p: _Proto, types: dict):
        if p.kind == "generic":
            return self.generic(p, types)
        if p.kind == "call":
            return self.call_block(p, types)
        s = p.stmt
        lines = (s.line, s.end_line)
        if p.kind == "if":
            pred = self.dag(types).expr(s.predicate)
            t_types, e_types = dict(types), dict(types)
            then_b = self.blocks(p.children[0], t_types)
            else_b = self.blocks(p.children[1], e_types)
            for k in set(t_types) | set(e_types):
                types[k] = t_types.get(k) or e_types.get(k)
            return IfBlock(pred, then_b, else_b, lines)
        if isinstance(s, ast.While):
            pred = self.dag(types).expr(s.predicate)
            return WhileBlock(pred, self.blocks(p.children[0], types), lines)
        d = self.dag(types)
        start, stop = d.expr(s.start), d.expr(s.stop)
        step = d.expr(s.step) if s.step is not None else None
        types[s.var] = SCALAR
        body = self.blocks(p.children[0], types)
        return ForBlock(s.var, start, stop, step, body, lines, parallel=s.parallel)

    def generic(self, p: _Proto, types: dict) -> GenericBlock:
        d = self.dag(types)
        roots = []
        for s in p.stmts:
            if isinstance(s, ast.Assign):
                h = d.expr(s.value, target=s.target)
                d.vars.pop(s.target, None)
                d.vars[s.target] = h
                types[s.target] = _type_of(h)
            else:
                src = d.expr(s.source)
                path = d.expr(s.path)
                if not (path.is_literal and path.data_type == STRING):
                    raise CompileError("write path must be a string literal or $-argument", line=s.line)
                name = s.source.name if isinstance(s.source, ast.Var) else "_out"
                fmt = s.format or ("textcell" if src.is_matrix else "textcell")
                roots.append(d.new("PWrite", [src], dt=src.data_type, vt=src.value_type,
                                   name=name, params={"path": path.value, "format": fmt}, line=s.line))
        for name, h in d.vars.items():
            if name in p.live_out:
                roots.append(d.new("TWrite", [h], dt=h.data_type, vt=h.value_type, name=name, line=h.line))
        lines = (p.stmts[0].line, p.stmts[-1].end_line)
        return GenericBlock(roots, lines, p.live_out)

    def call_block(self, p: _Proto, types: dict) -> GenericBlock:
        s = p.stmts[0]
        call = s.value if isinstance(s, ast.Assign) else s.call
        f = self.funcs[call.name]
        d = self.dag(types)
        args = [d.expr(a) for a in call.args]
        outputs = [s.target] if isinstance(s, ast.Assign) else []
        ret = f.returns[0] if f.returns else None
        dt = MATRIX if ret is None or ret.type == "matrix" else (STRING if ret.type == "string" else SCALAR)
        h = d.new("fcall", args, dt=dt, name=call.name, params={"outputs": outputs}, line=s.line)
        roots = []
        if outputs:
            types[s.target] = dt
            roots.append(d.new("TWrite", [h], dt=dt, vt=h.value_type, name=s.target, line=s.line))
        else:
            roots.append(h)
        return GenericBlock(roots, (s.line, s.end_line), p.live_out)


def build_hops(script: ast.Script) -> HopProgram:
    """Lower ``script`` into a :class:`HopProgram` (no folding or rewrites yet)."""
    return HopBuilder(script).build()
