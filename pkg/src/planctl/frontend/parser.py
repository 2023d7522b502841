"""Lexer and recursive-descent parser for the DML subset.

Positional ``$k`` references are substituted during lexing: an argument that
lexes as a number becomes a numeric literal, anything else a string literal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import ast
from .builtins import BUILTINS, FORMATS, WRITE_PARAMS, Signature, bind_args


class ScriptError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        loc = f"line {line}, col {col}: " if line else ""
        super().__init__(loc + message)


@dataclass
class Token:
    kind: str    # NUM, STR, ID, OP, NL, EOF
    value: object
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<str>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<arg>\$\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op>%\*%|==|!=|<=|>=|&&|\|\||[-+*/^<>=!&|(){}\[\],;:])
""", re.VERBOSE)

KEYWORDS = {"if", "else", "for", "parfor", "while", "in", "function", "return",
            "TRUE", "FALSE"}

_NUM_RE = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")


def _number(text: str):
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    return float(text)


def tokenize(source: str, args: list) -> list:
    tokens = []
    depth = 0
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise ScriptError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        pos = m.end()
        if kind == "nl":
            if depth == 0:
                tokens.append(Token("NL", "\n", line, col))
            line += 1
            line_start = pos
        elif kind in ("ws", "comment"):
            continue
        elif kind == "num":
            tokens.append(Token("NUM", _number(text), line, col))
        elif kind == "str":
            tokens.append(Token("STR", bytes(text[1:-1], "utf-8").decode("unicode_escape"), line, col))
        elif kind == "arg":
            k = int(text[1:])
            if k < 1 or k > len(args):
                raise ScriptError(f"unbound argument {text}", line, col)
            val = str(args[k - 1])
            if _NUM_RE.fullmatch(val.strip()):
                tokens.append(Token("NUM", _number(val.strip()), line, col))
            else:
                tokens.append(Token("STR", val, line, col))
        elif kind == "id":
            tokens.append(Token("ID", text, line, col))
        else:
            if text in "([":
                depth += 1
            elif text in ")]":
                depth = max(0, depth - 1)
            tokens.append(Token("OP", text, line, col))
    tokens.append(Token("EOF", None, line, pos - line_start + 1))
    return tokens


_TYPE_NAMES = {"matrix": "matrix", "double": "double", "int": "int", "integer": "int",
               "boolean": "boolean", "string": "string"}

_CMP = ("==", "!=", "<", ">", "<=", ">=")


class Parser:
    def __init__(self, tokens: list, strict: bool = True):
        self.toks = tokens
        self.i = 0
        self.strict = strict
        self.calls: list = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind, value=None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "OP" and self.tok.value in ops

    def expect(self, kind, value=None) -> Token:
        if not self.at(kind, value):
            t = self.tok
            want = value if value is not None else kind
            got = "end of input" if t.kind == "EOF" else repr(t.value)
            raise ScriptError(f"expected {want!r}, got {got}", t.line, t.col)
        return self.advance()

    def skip_newlines(self):
        while self.at("NL") or self.at_op(";"):
            self.advance()

    def prev_line(self) -> int:
        return self.toks[self.i - 1].line if self.i else 1

    # statements
    def parse_program(self) -> list:
        stmts = []
        self.skip_newlines()
        while not self.at("EOF"):
            stmts.append(self.statement())
            self.skip_newlines()
        return stmts

    def statement(self):
        t = self.tok
        if t.kind == "ID" and t.value == "if":
            return self.if_stmt()
        if t.kind == "ID" and t.value in ("for", "parfor"):
            return self.for_stmt()
        if t.kind == "ID" and t.value == "while":
            return self.while_stmt()
        if t.kind == "ID" and t.value == "write" and self.toks[self.i + 1].value == "(":
            return self.write_stmt()
        if t.kind == "ID" and t.value not in KEYWORDS:
            nxt = self.toks[self.i + 1]
            if nxt.kind == "OP" and nxt.value == "=":
                self.advance()
                self.advance()
                if self.at("ID", "function"):
                    return self.function_def(t)
                value = self.expr()
                self.end_statement()
                return ast.Assign(t.value, value, line=t.line, end_line=self.prev_line())
            if nxt.kind == "OP" and nxt.value == "(":
                call = self.postfix()
                if not isinstance(call, ast.Call):
                    raise ScriptError("expected call statement", t.line, t.col)
                self.end_statement()
                return ast.CallStmt(call, line=t.line, end_line=self.prev_line())
        raise ScriptError(f"unexpected token {t.value!r}", t.line, t.col)

    def end_statement(self):
        if self.at_op(";") or self.at("NL"):
            self.advance()
        elif not (self.at("EOF") or self.at_op("}")):
            t = self.tok
            raise ScriptError(f"expected end of statement, got {t.value!r}", t.line, t.col)

    def block(self) -> list:
        while self.at("NL"):
            self.advance()
        if self.at_op("{"):
            self.advance()
            stmts = []
            self.skip_newlines()
            while not self.at_op("}"):
                if self.at("EOF"):
                    raise ScriptError("unterminated block", self.tok.line, self.tok.col)
                stmts.append(self.statement())
                self.skip_newlines()
            self.advance()
            return stmts
        return [self.statement()]

    def paren_expr(self):
        self.expect("OP", "(")
        e = self.expr()
        self.expect("OP", ")")
        return e

    def if_stmt(self):
        start = self.advance()
        pred = self.paren_expr()
        then_body = self.block()
        else_body = []
        # else may follow on the next line
        j = self.i
        while self.toks[j].kind == "NL":
            j += 1
        if self.toks[j].kind == "ID" and self.toks[j].value == "else":
            self.i = j + 1
            if self.at("ID", "if"):
                else_body = [self.if_stmt()]
            else:
                else_body = self.block()
        return ast.If(pred, then_body, else_body, line=start.line, end_line=self.prev_line())

    def for_stmt(self):
        start = self.advance()
        self.expect("OP", "(")
        var = self.expect("ID").value
        self.expect("ID", "in")
        first = self.expr()
        if self.at_op(":"):
            self.advance()
            lo, hi, step = first, self.expr(), None
        elif isinstance(first, ast.Call) and first.name == "seq" and 2 <= len(first.args) <= 3:
            lo, hi = first.args[0], first.args[1]
            step = first.args[2] if len(first.args) == 3 else None
        else:
            raise ScriptError("for-loop range must be 'a:b' or seq(a, b[, c])", start.line, start.col)
        self.expect("OP", ")")
        body = self.block()
        return ast.For(var, lo, hi, step, body, parallel=start.value == "parfor",
                       line=start.line, end_line=self.prev_line())

    def while_stmt(self):
        start = self.advance()
        pred = self.paren_expr()
        body = self.block()
        return ast.While(pred, body, line=start.line, end_line=self.prev_line())

    def write_stmt(self):
        start = self.tok
        call = self.postfix()
        self.calls.pop()
        try:
            bound = bind_args(Signature(WRITE_PARAMS, 2, "none"), call.args, call.kwargs)
        except ValueError as e:
            raise ScriptError(f"write: {e}", start.line, start.col)
        fmt = None
        if "format" in bound:
            f = bound["format"]
            if not isinstance(f, ast.Str) or f.value not in FORMATS:
                raise ScriptError("write: format must be one of " + ", ".join(sorted(FORMATS)),
                                  start.line, start.col)
            fmt = FORMATS[f.value]
        self.end_statement()
        return ast.Write(bound["source"], bound["path"], fmt, line=start.line, end_line=self.prev_line())

    def params(self) -> list:
        self.expect("OP", "(")
        out = []
        while not self.at_op(")"):
            t = self.expect("ID")
            tname = t.value.lower()
            if self.at_op("["):
                self.advance()
                self.expect("ID")
                self.expect("OP", "]")
            if tname not in _TYPE_NAMES:
                raise ScriptError(f"unknown parameter type {t.value!r}", t.line, t.col)
            name = self.expect("ID").value
            out.append(ast.Param(_TYPE_NAMES[tname], name))
            if not self.at_op(")"):
                self.expect("OP", ",")
        self.advance()
        return out

    def function_def(self, name_tok: Token):
        self.expect("ID", "function")
        params = self.params()
        returns = []
        if self.at("ID", "return"):
            self.advance()
            returns = self.params()
        body = self.block()
        return ast.FunctionDef(name_tok.value, params, returns, body,
                               line=name_tok.line, end_line=self.prev_line())

    # expressions, lowest precedence first
    def expr(self):
        return self.or_expr()

    def _binary(self, ops, sub):
        left = sub()
        while self.at_op(*ops):
            t = self.advance()
            while self.at("NL"):
                self.advance()
            op = {"&&": "&", "||": "|"}.get(t.value, t.value)
            left = ast.BinOp(op, left, sub(), line=t.line)
        return left

    def or_expr(self):
        return self._binary(("|", "||"), self.and_expr)

    def and_expr(self):
        return self._binary(("&", "&&"), self.not_expr)

    def not_expr(self):
        if self.at_op("!"):
            t = self.advance()
            return ast.UnaryOp("!", self.not_expr(), line=t.line)
        return self.cmp_expr()

    def cmp_expr(self):
        return self._binary(_CMP, self.add_expr)

    def add_expr(self):
        return self._binary(("+", "-"), self.mul_expr)

    def mul_expr(self):
        return self._binary(("*", "/"), self.matmul_expr)

    def matmul_expr(self):
        return self._binary(("%*%",), self.unary_expr)

    def unary_expr(self):
        if self.at_op("-", "+"):
            t = self.advance()
            operand = self.unary_expr()
            if t.value == "+":
                return operand
            if isinstance(operand, ast.Num):
                return ast.Num(-operand.value, line=t.line)
            return ast.UnaryOp("-", operand, line=t.line)
        return self.power_expr()

    def power_expr(self):
        base = self.postfix()
        if self.at_op("^"):
            t = self.advance()
            return ast.BinOp("^", base, self.unary_expr(), line=t.line)
        return base

    def postfix(self):
        t = self.tok
        if self.at_op("!"):
            # as in R, a negation may open any operand and extends to its right
            self.advance()
            return ast.UnaryOp("!", self.not_expr(), line=t.line)
        if t.kind == "NUM":
            self.advance()
            return ast.Num(t.value, line=t.line)
        if t.kind == "STR":
            self.advance()
            return ast.Str(t.value, line=t.line)
        if t.kind == "ID" and t.value in ("TRUE", "FALSE"):
            self.advance()
            return ast.Bool(t.value == "TRUE", line=t.line)
        if t.kind == "ID" and t.value not in KEYWORDS:
            self.advance()
            if self.at_op("("):
                return self.call_args(t)
            return ast.Var(t.value, line=t.line)
        if self.at_op("("):
            return self.paren_expr()
        got = "end of input" if t.kind == "EOF" else repr(t.value)
        raise ScriptError(f"unexpected {got} in expression", t.line, t.col)

    def call_args(self, name_tok: Token):
        self.expect("OP", "(")
        args, kwargs = [], {}
        while not self.at_op(")"):
            if self.at("ID") and self.toks[self.i + 1].kind == "OP" and self.toks[self.i + 1].value == "=":
                key = self.advance().value
                self.advance()
                kwargs[key] = self.expr()
            else:
                if kwargs:
                    raise ScriptError("positional argument after named argument", self.tok.line, self.tok.col)
                args.append(self.expr())
            if not self.at_op(")"):
                self.expect("OP", ",")
        self.advance()
        call = ast.Call(name_tok.value, args, kwargs, line=name_tok.line)
        self.calls.append((call, name_tok))
        return call


def parse_script(source: str, args: Optional[list] = None, source_name: str = "<string>",
                 strict: bool = True) -> ast.Script:
    """Parse ``source`` with positional arguments bound to ``$1..$n``.

    With ``strict`` (the default) calls are checked against the builtin set and
    the script's function definitions: unknown names and arity mismatches
    raise :class:`ScriptError`. ``strict=False`` leaves those checks to
    :func:`planctl.frontend.validate.validate`.
    """
    parser = Parser(tokenize(source, list(args or [])), strict)
    stmts = parser.parse_program()
    script = ast.Script(stmts, source_name=source_name)
    if strict:
        funcs = script.functions
        for call, tok in parser.calls:
            err = call_error(call, funcs)
            if err:
                raise ScriptError(err, tok.line, tok.col)
    return script


def call_error(call: ast.Call, funcs: dict) -> Optional[str]:
    if call.name in BUILTINS:
        try:
            bind_args(BUILTINS[call.name], call.args, call.kwargs)
        except ValueError as e:
            return f"{call.name}: {e}"
        return None
    if call.name in funcs:
        f = funcs[call.name]
        if call.kwargs:
            return f"{call.name}: named arguments not supported for user functions"
        if len(call.args) != len(f.params):
            return f"{call.name}: expects {len(f.params)} arguments, got {len(call.args)}"
        return None
    return f"unknown builtin or function '{call.name}'"
