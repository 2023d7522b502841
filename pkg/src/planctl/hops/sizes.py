"""Size (dimension and non-zero) propagation over the whole program."""
from __future__ import annotations

import math
from typing import Optional

from .characteristics import UNKNOWN, MatrixCharacteristics
from .nodes import (MATRIX, CompileError, ForBlock, GenericBlock, Hop,
                    HopProgram, IfBlock, WhileBlock, block_dag_roots, iter_dag)
from .rewrites import _FoldError, assigned_in, eval_scalar_op

_SCALAR_MC = MatrixCharacteristics.scalar()


def scalar_value(h: Hop, env: Optional[dict] = None):
    """Best-effort compile-time value of a scalar HOP, or None."""
    if h.is_literal:
        return h.value
    if h.op in ("u(nrow)", "u(ncol)"):
        mc = h.children[0].mc
        if not mc.dims_known:
            return None
        return mc.rows if h.op == "u(nrow)" else mc.cols
    if h.op == "TRead" and env is not None:
        return env.get(("value", h.name))
    if h.op.startswith(("b(", "u(")) and h.data_type != MATRIX:
        args = [scalar_value(c, env) for c in h.children]
        if any(a is None for a in args):
            return None
        try:
            return eval_scalar_op(h.op, args)
        except _FoldError:
            return None
    return None


def _as_dim(v) -> int:
    if v is None or isinstance(v, (str, bool)):
        return UNKNOWN
    if isinstance(v, float):
        if not math.isfinite(v) or v < 0:
            return UNKNOWN
        v = int(v)
    return v if v >= 0 else UNKNOWN


def _merge(a: MatrixCharacteristics, b: MatrixCharacteristics) -> MatrixCharacteristics:
    vals = [x if x == y else UNKNOWN for x, y in zip(a.as_list(), b.as_list())]
    return MatrixCharacteristics(*vals)


class _Propagator:
    def __init__(self, meta: dict, block_size: int, formats: Optional[dict]):
        self.meta = meta
        self.block_size = block_size
        self.formats = formats or {}

    def matrix(self, rows: int, cols: int, nnz: int = UNKNOWN) -> MatrixCharacteristics:
        if rows >= 0 and cols >= 0 and nnz > rows * cols:
            nnz = UNKNOWN
        return MatrixCharacteristics(rows, cols, self.block_size, self.block_size, nnz)

    def fail(self, h: Hop, msg: str):
        raise CompileError(msg, hop_id=h.id, line=h.line)

    def infer(self, h: Hop, env: dict) -> MatrixCharacteristics:
        op, ch = h.op, h.children
        if h.data_type != MATRIX:
            return _SCALAR_MC
        if op == "PRead":
            path = h.params.get("path")
            if path in self.formats:
                h.params["format"] = self.formats[path]
            mc = self.meta.get(path)
            if mc is None:
                return MatrixCharacteristics().with_blocks(self.block_size)
            return self.matrix(mc.rows, mc.cols, mc.nnz)
        if op == "TRead":
            mc = env.get(h.name)
            return mc if mc is not None else MatrixCharacteristics().with_blocks(self.block_size)
        if op == "TWrite":
            return ch[0].mc
        if op == "PWrite":
            mc = ch[0].mc
            if h.params.get("format") == "textcell":
                return MatrixCharacteristics(mc.rows, mc.cols, UNKNOWN, UNKNOWN, mc.nnz)
            return mc
        if op == "r(t)":
            mc = ch[0].mc
            return self.matrix(mc.cols, mc.rows, mc.nnz)
        if op == "ba(+*)":
            a, b = ch[0].mc, ch[1].mc
            for c in ch:
                if c.data_type != MATRIX:
                    self.fail(h, "%*% requires matrix operands")
            if a.cols >= 0 and b.rows >= 0 and a.cols != b.rows:
                self.fail(h, f"matrix multiply inner dimensions differ ({a.cols} vs {b.rows})")
            return self.matrix(a.rows, b.cols)
        if op == "r(diag)":
            mc = ch[0].mc
            if not mc.dims_known:
                return self.matrix(UNKNOWN, UNKNOWN)
            if mc.cols == 1:
                return self.matrix(mc.rows, mc.rows, mc.nnz)
            if mc.rows == mc.cols:
                return self.matrix(mc.rows, 1)
            self.fail(h, f"diag needs a column vector or square matrix, got {mc.rows}x{mc.cols}")
        if op == "dg(rand)":
            rows = _as_dim(scalar_value(ch[0], env))
            cols = _as_dim(scalar_value(ch[1], env))
            nnz = UNKNOWN
            if rows >= 0 and cols >= 0:
                lo, hi = ch[2], ch[3]
                if lo.is_literal and hi.is_literal and lo.value == hi.value:
                    nnz = 0 if lo.value == 0 else rows * cols
                elif h.params.get("sparsity", 1.0) == 1.0:
                    nnz = rows * cols
            return self.matrix(rows, cols, nnz)
        if op == "dg(seq)":
            vals = [scalar_value(c, env) for c in ch]
            rows = UNKNOWN
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals) and vals[2] != 0:
                rows = max(0, int(math.floor((vals[1] - vals[0]) / vals[2] + 1e-9)) + 1)
            return self.matrix(rows, 1)
        if op == "b(append)":
            a, b = ch[0].mc, ch[1].mc
            if a.rows >= 0 and b.rows >= 0 and a.rows != b.rows:
                self.fail(h, f"append needs equal row counts ({a.rows} vs {b.rows})")
            rows = a.rows if a.rows >= 0 else b.rows
            cols = a.cols + b.cols if a.cols >= 0 and b.cols >= 0 else UNKNOWN
            nnz = a.nnz + b.nnz if a.nnz_known and b.nnz_known else UNKNOWN
            return self.matrix(rows, cols, nnz)
        if op == "b(solve)":
            a, b = ch[0].mc, ch[1].mc
            if a.dims_known and a.rows != a.cols:
                self.fail(h, f"solve needs a square matrix, got {a.rows}x{a.cols}")
            if a.rows >= 0 and b.rows >= 0 and a.rows != b.rows:
                self.fail(h, f"solve right-hand side has {b.rows} rows, expected {a.rows}")
            return self.matrix(a.cols, b.cols)
        if op == "u(-)":
            mc = ch[0].mc
            return self.matrix(mc.rows, mc.cols, mc.nnz)
        if op.startswith(("b(", "u(")):
            mats = [c.mc for c in ch if c.data_type == MATRIX]
            if len(mats) == 2:
                a, b = mats
                if a.dims_known and b.dims_known and (a.rows, a.cols) != (b.rows, b.cols):
                    self.fail(h, f"elementwise {op} on {a.rows}x{a.cols} and {b.rows}x{b.cols}")
                rows = a.rows if a.rows >= 0 else b.rows
                cols = a.cols if a.cols >= 0 else b.cols
                return self.matrix(rows, cols)
            mc = mats[0]
            return self.matrix(mc.rows, mc.cols)
        # fcall and anything else: sizes are not propagated across calls
        return self.matrix(UNKNOWN, UNKNOWN)

    def dag(self, roots: list, env: dict):
        for h in iter_dag(roots):
            h.mc = self.infer(h, env)

    def blocks(self, blocks: list, env: dict):
        for b in blocks:
            self.block(b, env)

    def block(self, b, env: dict):
        if isinstance(b, GenericBlock):
            self.dag(b.roots, env)
            values = {r.name: scalar_value(r.children[0], env) for r in b.roots
                      if r.op == "TWrite" and r.data_type != MATRIX}
            for r in b.roots:
                if r.op == "TWrite":
                    if r.data_type == MATRIX:
                        env[r.name] = r.mc
                    env.pop(("value", r.name), None)
                    if values.get(r.name) is not None:
                        env[("value", r.name)] = values[r.name]
                elif r.op == "fcall":
                    for o in r.params.get("outputs", []):
                        env.pop(o, None)
                        env.pop(("value", o), None)
            return
        if isinstance(b, IfBlock):
            self.dag([b.predicate], env)
            t_env, e_env = dict(env), dict(env)
            self.blocks(b.then_blocks, t_env)
            self.blocks(b.else_blocks, e_env)
            merged = {}
            for k in set(t_env) | set(e_env):
                if k in t_env and k in e_env:
                    x, y = t_env[k], e_env[k]
                    if isinstance(x, MatrixCharacteristics):
                        merged[k] = _merge(x, y)
                    elif x == y:
                        merged[k] = x
                elif not isinstance(k, tuple):
                    merged[k] = t_env.get(k) or e_env.get(k)
            env.clear()
            env.update(merged)
            return
        if isinstance(b, (WhileBlock, ForBlock)):
            self.dag(block_dag_roots(b), env)
            names = assigned_in(b.body)
            if isinstance(b, ForBlock):
                names.add(b.var)
            for n in names:
                env.pop(("value", n), None)
            trial = dict(env)
            self.blocks(b.body, trial)
            for n in names:
                if n in env and n in trial:
                    env[n] = _merge(env[n], trial[n])
                elif n in trial and isinstance(trial[n], MatrixCharacteristics):
                    env[n] = MatrixCharacteristics().with_blocks(self.block_size)
            if isinstance(b, WhileBlock):
                self.dag([b.predicate], env)
            # second pass with loop-invariant sizes only
            self.blocks(b.body, env)
            for n in names:
                env.pop(("value", n), None)
            return


def propagate_sizes(prog: HopProgram, input_meta: dict, block_size: int = 1000,
                    formats: Optional[dict] = None) -> HopProgram:
    """Infer output characteristics for every HOP.

    ``input_meta`` maps persistent-read paths to :class:`MatrixCharacteristics`;
    paths without metadata yield unknown sizes.  ``formats`` optionally
    overrides the storage format of persistent reads by path.
    """
    p = _Propagator(input_meta, block_size, formats)
    for f in prog.functions.values():
        env = {}
        p.blocks(f.body, env)
    p.blocks(prog.blocks, {})
    return prog

