"""Static checks: definite assignment and scalar/matrix type inference."""
from __future__ import annotations

from dataclasses import dataclass

from . import ast
from .builtins import BUILTINS, bind_args
from .parser import call_error

SCALAR, MATRIX, STRING, UNKNOWN = "scalar", "matrix", "string", "unknown"


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


def _param_kind(p: ast.Param) -> str:
    return {"matrix": MATRIX, "string": STRING}.get(p.type, SCALAR)


class _Checker:
    def __init__(self, script: ast.Script):
        self.funcs = script.functions
        self.diags: list = []

    def report(self, line, msg):
        self.diags.append(Diagnostic(line, msg))

    def expr(self, e, env: dict) -> str:
        if isinstance(e, ast.Num) or isinstance(e, ast.Bool):
            return SCALAR
        if isinstance(e, ast.Str):
            return STRING
        if isinstance(e, ast.Var):
            if e.name not in env:
                self.report(e.line, f"undefined variable {e.name}")
                return UNKNOWN
            return env[e.name]
        if isinstance(e, ast.UnaryOp):
            return self.expr(e.operand, env)
        if isinstance(e, ast.BinOp):
            lt, rt = self.expr(e.left, env), self.expr(e.right, env)
            if e.op == "%*%":
                for side, t in (("left", lt), ("right", rt)):
                    if t in (SCALAR, STRING):
                        self.report(e.line, f"%*% {side} operand must be a matrix")
                return MATRIX
            if MATRIX in (lt, rt):
                return MATRIX
            if UNKNOWN in (lt, rt):
                return UNKNOWN
            if STRING in (lt, rt) and e.op == "+":
                return STRING
            return SCALAR
        if isinstance(e, ast.Call):
            return self.call(e, env)
        return UNKNOWN

    def call(self, c: ast.Call, env: dict) -> str:
        types = [self.expr(a, env) for a in c.args]
        kw_types = {k: self.expr(v, env) for k, v in c.kwargs.items()}
        err = call_error(c, self.funcs)
        if err:
            self.report(c.line, err)
            return UNKNOWN
        if c.name in BUILTINS:
            sig = BUILTINS[c.name]
            bound = bind_args(sig, types, kw_types)
            for p in sig.matrix_params:
                if bound.get(p) in (SCALAR, STRING):
                    self.report(c.line, f"{c.name}: argument '{p}' must be a matrix")
            for p, t in bound.items():
                if p not in sig.matrix_params and p not in ("path", "pdf", "format") and t == MATRIX:
                    self.report(c.line, f"{c.name}: argument '{p}' must be a scalar")
            return MATRIX if sig.result == "matrix" else SCALAR
        f = self.funcs[c.name]
        for p, t in zip(f.params, types):
            want = _param_kind(p)
            if t != UNKNOWN and t != want:
                self.report(c.line, f"{c.name}: argument '{p.name}' expects {want}, got {t}")
        if len(f.returns) == 1:
            return _param_kind(f.returns[0])
        return UNKNOWN

    def block(self, stmts: list, env: dict) -> dict:
        env = dict(env)
        for s in stmts:
            if isinstance(s, ast.Assign):
                env[s.target] = self.expr(s.value, env)
                if isinstance(s.value, ast.Call) and s.value.name in self.funcs \
                        and len(self.funcs[s.value.name].returns) != 1:
                    self.report(s.line, f"{s.value.name} does not return exactly one value")
            elif isinstance(s, ast.Write):
                if isinstance(s.source, ast.Var) and s.source.name not in env:
                    self.report(s.line, f"write target {s.source.name} does not exist")
                else:
                    self.expr(s.source, env)
                if self.expr(s.path, env) == MATRIX:
                    self.report(s.line, "write path must be a string")
            elif isinstance(s, ast.CallStmt):
                self.call(s.call, env)
            elif isinstance(s, ast.If):
                self.predicate(s.predicate, env, s.line)
                t_env = self.block(s.then_body, env)
                e_env = self.block(s.else_body, env)
                for name in set(t_env) & set(e_env):
                    if name not in env:
                        env[name] = t_env[name] if t_env[name] == e_env[name] else UNKNOWN
                    elif t_env[name] != e_env[name]:
                        env[name] = UNKNOWN
                    else:
                        env[name] = t_env[name]
            elif isinstance(s, (ast.For, ast.While)):
                if isinstance(s, ast.For):
                    for e in (s.start, s.stop, s.step):
                        if e is not None and self.expr(e, env) == MATRIX:
                            self.report(s.line, "loop bounds must be scalar")
                    body_env = dict(env, **{s.var: SCALAR})
                else:
                    self.predicate(s.predicate, env, s.line)
                    body_env = env
                after = self.block(s.body, body_env)
                for name, t in after.items():
                    if name in env and env[name] != t:
                        env[name] = UNKNOWN
            elif isinstance(s, ast.FunctionDef):
                fenv = {p.name: _param_kind(p) for p in s.params}
                out = self.block(s.body, fenv)
                for r in s.returns:
                    if r.name not in out:
                        self.report(s.end_line or s.line, f"function {s.name}: return value {r.name} never assigned")
        return env

    def predicate(self, e, env, line):
        if self.expr(e, env) == MATRIX:
            self.report(line, "predicate must be scalar")


def validate(script: ast.Script) -> list:
    """Return diagnostics for ``script``; an empty list means it is well formed."""
    checker = _Checker(script)
    checker.block(script.statements, {})
    return sorted(set(checker.diags), key=lambda d: (d.line, d.message))
