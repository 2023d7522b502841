"""Source pretty-printer; its output re-parses to a structurally equal AST."""
from . import ast

_PREC = {"|": 1, "&": 2, "==": 4, "!=": 4, "<": 4, ">": 4, "<=": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%*%": 7, "^": 9}


def _num(v) -> str:
    if isinstance(v, int):
        return str(v)
    s = repr(float(v))
    return s if ("." in s or "e" in s or "n" in s) else s + ".0"


def _str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def format_expr(e, prec: int = 0) -> str:
    if isinstance(e, ast.Num):
        s = _num(e.value)
        return f"({s})" if e.value < 0 and prec > 0 else s
    if isinstance(e, ast.Str):
        return _str(e.value)
    if isinstance(e, ast.Bool):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.UnaryOp):
        inner = format_expr(e.operand, 8)
        s = f"{e.op}{inner}"
        return f"({s})" if prec > 0 else s
    if isinstance(e, ast.BinOp):
        p = _PREC[e.op]
        if e.op == "^":
            s = f"{format_expr(e.left, p + 1)} ^ {format_expr(e.right, p)}"
        else:
            s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, ast.Call):
        parts = [format_expr(a) for a in e.args]
        parts += [f"{k}={format_expr(v)}" for k, v in e.kwargs.items()]
        return f"{e.name}({', '.join(parts)})"
    raise TypeError(f"not an expression: {e!r}")


def _params(ps) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in ps)


def format_statements(stmts, indent: int = 0) -> list:
    pad = "  " * indent
    out = []
    for s in stmts:
        if isinstance(s, ast.Assign):
            out.append(f"{pad}{s.target} = {format_expr(s.value)};")
        elif isinstance(s, ast.Write):
            fmt = f', format="{s.format}"' if s.format else ""
            out.append(f"{pad}write({format_expr(s.source)}, {format_expr(s.path)}{fmt});")
        elif isinstance(s, ast.CallStmt):
            out.append(f"{pad}{format_expr(s.call)};")
        elif isinstance(s, ast.If):
            out.append(f"{pad}if ({format_expr(s.predicate)}) {{")
            out += format_statements(s.then_body, indent + 1)
            if s.else_body:
                out.append(f"{pad}}} else {{")
                out += format_statements(s.else_body, indent + 1)
            out.append(f"{pad}}}")
        elif isinstance(s, ast.For):
            kw = "parfor" if s.parallel else "for"
            if s.step is None:
                rng = f"{format_expr(s.start, 5)}:{format_expr(s.stop, 5)}"
            else:
                rng = f"seq({format_expr(s.start)}, {format_expr(s.stop)}, {format_expr(s.step)})"
            out.append(f"{pad}{kw} ({s.var} in {rng}) {{")
            out += format_statements(s.body, indent + 1)
            out.append(f"{pad}}}")
        elif isinstance(s, ast.While):
            out.append(f"{pad}while ({format_expr(s.predicate)}) {{")
            out += format_statements(s.body, indent + 1)
            out.append(f"{pad}}}")
        elif isinstance(s, ast.FunctionDef):
            ret = f" return ({_params(s.returns)})" if s.returns else ""
            out.append(f"{pad}{s.name} = function({_params(s.params)}){ret} {{")
            out += format_statements(s.body, indent + 1)
            out.append(f"{pad}}}")
    return out


def format_script(script: ast.Script) -> str:
    return "\n".join(format_statements(script.statements)) + "\n"
