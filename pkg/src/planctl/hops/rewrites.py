"""Constant folding (with cross-block scalar propagation) and static rewrites."""
from __future__ import annotations

import operator
from typing import Optional

from ..frontend.validate import Diagnostic
from .nodes import (SCALAR, STRING, ForBlock, GenericBlock, Hop, HopProgram, IfBlock,
                    WhileBlock, iter_blocks, iter_dag, map_block_dags, rewrite_dag)


class _FoldError(ArithmeticError):
    pass


def _div(a, b):
    if b == 0:
        raise _FoldError("division by zero")
    return a / b


def _pow(a, b):
    try:
        return a ** b
    except ZeroDivisionError:
        raise _FoldError("zero raised to a negative power")


_BINARY = {
    "+": operator.add, "-": operator.sub, "*": operator.mul, "/": _div, "^": _pow,
    "==": operator.eq, "!=": operator.ne, "<": operator.lt, ">": operator.gt,
    "<=": operator.le, ">=": operator.ge,
    "&": lambda a, b: bool(a) and bool(b), "|": lambda a, b: bool(a) or bool(b),
}


def literal_hop(ids, value, line: int = 0) -> Hop:
    if isinstance(value, bool):
        dt, vt = SCALAR, "boolean"
    elif isinstance(value, int):
        dt, vt = SCALAR, "int"
    elif isinstance(value, float):
        dt, vt = SCALAR, "double"
    else:
        dt, vt, value = STRING, "string", str(value)
    return Hop(ids(), "literal", [], dt, vt, value=value, line=line)


def eval_scalar_op(op: str, args: list):
    """Evaluate a scalar HOP operator over Python values; raises _FoldError."""
    if op.startswith("b(") and len(args) == 2:
        sym = op[2:-1]
        a, b = args
        if sym == "+" and (isinstance(a, str) or isinstance(b, str)):
            return _fmt_str(a) + _fmt_str(b)
        if isinstance(a, str) or isinstance(b, str):
            if sym in ("==", "!="):
                return _BINARY[sym](a, b)
            raise _FoldError(f"operator {sym} not defined on strings")
        fn = _BINARY.get(sym)
        if fn is None:
            raise _FoldError(f"cannot fold {op}")
        out = fn(a, b)
        if sym == "/" or isinstance(out, complex):
            if isinstance(out, complex):
                raise _FoldError("complex result")
            return float(out)
        if sym == "^" and isinstance(out, int) and not isinstance(out, bool) and b < 0:
            return float(out)
        return out
    if op == "u(-)" and len(args) == 1 and not isinstance(args[0], str):
        return -args[0]
    if op == "u(!)" and len(args) == 1:
        return not args[0]
    raise _FoldError(f"cannot fold {op}")


def _fmt_str(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    return str(v)


class _Folder:
    def __init__(self, prog: HopProgram):
        self.prog = prog
        self.ids = prog.ids
        self.diagnostics: list = []

    def fold_hop(self, h: Hop, env: dict) -> Hop:
        if h.op == "TRead" and h.name in env:
            return literal_hop(self.ids, env[h.name], h.line)
        if h.data_type in (SCALAR, STRING) and h.children and all(c.is_literal for c in h.children):
            if h.op.startswith(("b(", "u(")) and h.op not in ("u(nrow)", "u(ncol)"):
                try:
                    value = eval_scalar_op(h.op, [c.value for c in h.children])
                except _FoldError as e:
                    self.diagnostics.append(Diagnostic(h.line, f"constant folding: {e}; left unfolded"))
                    return h
                return literal_hop(self.ids, value, h.line)
        return h

    def fold_roots(self, roots: list, env: dict) -> list:
        return rewrite_dag(roots, lambda h: self.fold_hop(h, env))

    def blocks(self, blocks: list, env: dict) -> list:
        out = []
        for b in blocks:
            out.extend(self.block(b, env))
        return out

    def block(self, b, env: dict) -> list:
        if isinstance(b, GenericBlock):
            b.roots = self.fold_roots(b.roots, env)
            for r in b.roots:
                if r.op == "TWrite":
                    if r.children[0].is_literal:
                        env[r.name] = r.children[0].value
                    else:
                        env.pop(r.name, None)
                elif r.op == "fcall":
                    for o in r.params.get("outputs", []):
                        env.pop(o, None)
            return [b]
        if isinstance(b, IfBlock):
            (b.predicate,) = self.fold_roots([b.predicate], env)
            if b.predicate.is_literal:
                taken = b.then_blocks if b.predicate.value else b.else_blocks
                return self.blocks(taken, env)
            t_env, e_env = dict(env), dict(env)
            b.then_blocks = self.blocks(b.then_blocks, t_env)
            b.else_blocks = self.blocks(b.else_blocks, e_env)
            env.clear()
            env.update({k: v for k, v in t_env.items()
                        if k in e_env and e_env[k] == v and type(e_env[k]) is type(v)})
            return [b]
        if isinstance(b, ForBlock):
            b.start, b.stop = self.fold_roots([b.start, b.stop], env)
            if b.step is not None:
                (b.step,) = self.fold_roots([b.step], env)
            for name in assigned_in(b.body) | {b.var}:
                env.pop(name, None)
            b.body = self.blocks(b.body, dict(env))
            return [b]
        if isinstance(b, WhileBlock):
            for name in assigned_in(b.body):
                env.pop(name, None)
            (b.predicate,) = self.fold_roots([b.predicate], env)
            b.body = self.blocks(b.body, dict(env))
            return [b]
        return [b]


def assigned_in(blocks: list) -> set:
    """Variables written (transiently or by call outputs) anywhere in ``blocks``."""
    names = set()
    for b in iter_blocks(blocks):
        if isinstance(b, GenericBlock):
            for r in b.roots:
                if r.op == "TWrite":
                    names.add(r.name)
                elif r.op == "fcall":
                    names.update(r.params.get("outputs", []))
        elif isinstance(b, ForBlock):
            names.add(b.var)
    return names


def constant_fold(prog: HopProgram, args: Optional[dict] = None) -> HopProgram:
    """Fold literal subexpressions and propagate scalar literals across blocks.

    ``args`` optionally seeds known scalar variable values.  If-blocks whose
    predicate becomes a literal are replaced by the taken branch.  Folding
    failures (such as division by zero) are recorded in ``prog.diagnostics``.
    """
    folder = _Folder(prog)
    for f in prog.functions.values():
        f.body = folder.blocks(f.body, {})
    prog.blocks = folder.blocks(prog.blocks, dict(args or {}))
    prog.diagnostics.extend(folder.diagnostics)
    return prog


# --- static rewrites ----------------------------------------------------------------

def _is_const_rand(h: Hop, value=None) -> bool:
    if h.op != "dg(rand)":
        return False
    lo, hi = h.children[2], h.children[3]
    if not (lo.is_literal and hi.is_literal and lo.value == hi.value):
        return False
    return value is None or lo.value == value


def _diag_scalar_rewrite(h: Hop, ids) -> Hop:
    """diag(matrix(1,n,1)) * s  ->  diag(matrix(s,n,1))."""
    if h.op != "b(*)" or len(h.children) != 2:
        return h
    a, b = h.children
    for diag, scalar in ((a, b), (b, a)):
        if diag.op == "r(diag)" and scalar.data_type == SCALAR and _is_const_rand(diag.children[0], 1):
            rand = diag.children[0]
            if rand.children[1].is_literal and rand.children[1].value != 1:
                continue  # only column vectors turn into diagonal matrices
            new_rand = Hop(ids(), "dg(rand)", [rand.children[0], rand.children[1], scalar, scalar],
                           rand.data_type, rand.value_type, params=dict(rand.params), line=rand.line)
            return Hop(ids(), "r(diag)", [new_rand], diag.data_type, diag.value_type, line=diag.line)
    return h


def _cse_key(h: Hop):
    if h.op in ("PRead", "PWrite", "TWrite", "fcall"):
        return None
    if h.op == "dg(rand)" and not _is_const_rand(h) and h.params.get("seed", -1) == -1:
        return None  # fresh random data each time
    if h.is_literal:
        return ("literal", h.value_type, repr(h.value))
    params = tuple(sorted((k, repr(v)) for k, v in h.params.items()))
    return (h.op, tuple(id(c) for c in h.children), h.name, h.data_type, params)


def _cse(roots: list) -> list:
    table: dict = {}

    def fn(h):
        key = _cse_key(h)
        if key is None:
            return h
        return table.setdefault(key, h)

    return rewrite_dag(roots, fn)


def _drop_noop_twrites(roots: list) -> list:
    return [r for r in roots
            if not (r.op == "TWrite" and r.children[0].op == "TRead" and r.children[0].name == r.name)]


def apply_static_rewrites(prog: HopProgram) -> HopProgram:
    """Diag-of-constant scaling, per-DAG CSE and removal of no-op transient writes."""
    blocks = [b for f in prog.functions.values() for b in iter_blocks(f.body)]
    blocks += list(iter_blocks(prog.blocks))
    ids = prog.ids
    for b in blocks:
        if isinstance(b, GenericBlock):
            roots = rewrite_dag(b.roots, lambda h: _diag_scalar_rewrite(h, ids))
            b.roots = _drop_noop_twrites(_cse(roots))
    for f in prog.functions.values():
        map_block_dags(f.body, lambda h: _diag_scalar_rewrite(h, ids))
    map_block_dags(prog.blocks, lambda h: _diag_scalar_rewrite(h, ids))
    return prog


def count_hops(roots: list) -> int:
    return sum(1 for _ in iter_dag(roots))
