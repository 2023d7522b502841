import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LINREG
from planctl.frontend import ScriptError, format_script, parse_script, validate
from planctl.frontend import ast
from scriptgen import random_script


def all_statements(stmts):
    for s in stmts:
        yield s
        for body in ast.child_bodies(s):
            yield from all_statements(body)


def test_linreg_parses_into_twelve_statements():
    script = parse_script(LINREG, ["X", "y", "0", "b"])
    assert len(list(all_statements(script.statements))) == 12
    ifs = [s for s in script.statements if isinstance(s, ast.If)]
    assert [(s.line, s.end_line) for s in ifs] == [(4, 7)]


def test_empty_source_gives_empty_script():
    assert parse_script("", []).statements == []


def test_unbound_argument_is_named():
    with pytest.raises(ScriptError, match=r"\$1"):
        parse_script("X = read($1)", [])


@pytest.mark.parametrize("src,fragment", [
    ("x = foo(1);", "unknown builtin"),
    ("x = 1 +;", "unexpected"),
    ("A = matrix(1, 2, 2); beta = solve(A);", "solve"),
    ("x = (1 + 2;", "line 1"),
])
def test_syntax_and_arity_errors(src, fragment):
    with pytest.raises(ScriptError, match=fragment):
        parse_script(src, [])


def test_error_carries_line_and_column():
    with pytest.raises(ScriptError, match=r"line 2, col \d+"):
        parse_script("a = 1;\nb = a +;\n", [])


def test_arguments_become_literals():
    script = parse_script("n = $1; p = $2;", ["42", "some/path"])
    a, b = script.statements
    assert a.value == ast.Num(42) and isinstance(a.value.value, int)
    assert b.value == ast.Str("some/path")


def test_validate_clean_script():
    assert validate(parse_script(LINREG, ["X", "y", "0", "b"])) == []


def test_validate_undefined_variable():
    diags = validate(parse_script("y = X + 1"))
    assert len(diags) == 1
    assert "undefined variable X" in diags[0].message and diags[0].line == 1


def test_validate_arity_in_lenient_mode():
    diags = validate(parse_script("A = matrix(1,2,2); beta = solve(A)", strict=False))
    assert any("solve" in d.message for d in diags)


def test_validate_scalar_predicate():
    diags = validate(parse_script("X = matrix(1, 2, 2); if (X) { y = 1; }", strict=False))
    assert diags


def test_parfor_and_while_parse():
    src = "s = 0;\nparfor (i in 1:4) { s = s + i; }\nwhile (s > 0.1) { s = s / 2; }\n"
    script = parse_script(src, [])
    kinds = [type(s).__name__ for s in script.statements]
    assert kinds == ["Assign", "For", "While"]
    assert script.statements[1].parallel


def _roundtrip(src: str, args=()):
    first = parse_script(src, list(args))
    again = parse_script(format_script(first), [])
    assert again == first


def test_roundtrip_linreg():
    _roundtrip(LINREG, ["X", "y", "0", "b"])


def test_roundtrip_random_scripts():
    rng = random.Random(11)
    for _ in range(50):
        _roundtrip(random_script(rng), ["X", "y"])


_leaf = st.one_of(st.integers(0, 99).map(str), st.sampled_from(["a", "b", "0.5", "1e-3"]))


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*", "/", "^", "<", "==", "&"]), children)
        .map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        children.map(lambda c: f"-{c}"),
        children.map(lambda c: f"!({c})"),
    )


@settings(max_examples=150, deadline=None)
@given(st.recursive(_leaf, _combine, max_leaves=12))
def test_roundtrip_random_expressions(expr):
    _roundtrip(f"a = 1;\nb = 2;\nc = {expr};\n")


def test_line_spans_monotone():
    rng = random.Random(5)
    for _ in range(30):
        script = parse_script(random_script(rng), ["X", "y"])
        lines = [s.line for s in script.statements]
        assert lines == sorted(lines)


def test_no_argument_placeholders_survive():
    script = parse_script(LINREG, ["X", "y", "0", "b"])
    assert "$" not in format_script(script)
