import re

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import compile_linreg, golden
from planctl.compiler import compile_hops, compile_script
from planctl.config import MB, load_config
from planctl.hops.characteristics import MatrixCharacteristics
from planctl.hops.exectype import CP_ONLY
from planctl.hops.nodes import (DATA_OPS, MATRIX, CompileError, GenericBlock, IfBlock,
                                iter_program_blocks, iter_program_hops)
from planctl.frontend import parse_script

_HOP = re.compile(r"^(-*)\((\d+)\) (\S+)(?: ([A-Za-z_]\w*))?(?: \(([\d,]+)\))? "
                  r"(\[[^\]]*\]) \[(\d+|\?)MB\] (CP|MR)$")


def parse_hop_explain(text: str) -> tuple:
    """Header/block lines verbatim and HOP lines as dicts."""
    frame, hops = [], []
    for line in text.splitlines():
        m = _HOP.match(line)
        if m is None:
            frame.append(line)
            continue
        depth, hid, op, name, kids, mc, mem, et = m.groups()
        hops.append({"depth": len(depth), "id": int(hid), "op": op, "name": name,
                     "kids": [int(k) for k in kids.split(",")] if kids else [],
                     "mc": mc, "mem": mem, "exec": et})
        frame.append(f"{depth}HOP")
    return frame, hops


def mb_of(text: str) -> float:
    return float("inf") if text == "?" else float(text)


class TestGoldenExplain:
    def test_xs_matches_reference_modulo_ids(self, default_cc):
        frame_g, want = parse_hop_explain(golden("xs_hops.txt"))
        frame_o, got = parse_hop_explain(compile_linreg("XS", default_cc).hop_explain)
        assert frame_o == frame_g
        assert len(got) == len(want)
        rename = {}
        for g, w in zip(got, want):
            rename[g["id"]] = w["id"]
            assert (g["depth"], g["op"], g["name"]) == (w["depth"], w["op"], w["name"])
            assert [rename[k] for k in g["kids"]] == w["kids"]
            assert g["mc"] == w["mc"], g
            assert g["exec"] == w["exec"] == "CP"
            gm, wm = mb_of(g["mem"]), mb_of(w["mem"])
            assert abs(gm - wm) <= max(0.1 * wm, 1.0), (g, w)

    def test_xs_budget_header(self, default_cc):
        text = compile_linreg("XS", default_cc).hop_explain
        assert text.splitlines()[0] == "# Memory Budget local/remote = 1434MB/1434MB/1434MB"

    def test_xl1_sizes_and_types(self, default_cc):
        _, hops = parse_hop_explain(compile_linreg("XL1", default_cc).hop_explain)
        by_op = {}
        for h in hops:
            by_op.setdefault(h["op"], []).append(h)
        assert by_op["r(t)"][0]["exec"] == "MR"
        assert [h["exec"] for h in by_op["ba(+*)"]] == ["MR", "MR"]
        assert by_op["b(solve)"][0]["exec"] == "CP"
        assert by_op["PRead"][0]["mc"] == "[1e8,1e3,1e3,1e3,1e11]"


class TestRewrites:
    def test_constant_false_branch_is_removed(self, default_cc):
        plan = compile_linreg("XS", default_cc, intercept="0")
        assert not any(isinstance(b, IfBlock) for b in iter_program_blocks(plan.hops))
        assert not any(h.op == "b(append)" for h in iter_program_hops(plan.hops))

    def test_constant_true_branch_is_inlined(self, default_cc):
        plan = compile_linreg("XS", default_cc, intercept="1")
        assert not any(isinstance(b, IfBlock) for b in iter_program_blocks(plan.hops))
        appends = [h for h in iter_program_hops(plan.hops) if h.op == "b(append)"]
        assert len(appends) == 1
        assert (appends[0].mc.rows, appends[0].mc.cols) == (10_000, 1001)
        solve = next(h for h in iter_program_hops(plan.hops) if h.op == "b(solve)")
        assert (solve.mc.rows, solve.mc.cols) == (1001, 1)

    def test_unknown_predicate_keeps_branch(self, default_cc):
        src = "X = read($1);\nif (sum(X) > 0) {\n  X = X * 2;\n}\nwrite(X, $2);\n"
        plan = compile_script(src, ["./data/X", "./data/o"], {"./data/X": MatrixCharacteristics(10, 10)},
                              default_cc)
        assert any(isinstance(b, IfBlock) for b in iter_program_blocks(plan.hops))

    def test_scalar_expressions_fold(self, default_cc):
        src = "a = 2 + 3 * 4;\nX = matrix(a, 2, a - 12);\nwrite(X, $1);\n"
        plan = compile_script(src, ["./data/o"], {}, default_cc)
        rand = next(h for h in iter_program_hops(plan.hops) if h.op == "dg(rand)")
        assert (rand.mc.rows, rand.mc.cols) == (2, 2)
        assert rand.children[2].is_literal and rand.children[2].value == 14

    def test_diag_scaling_folds_into_generator(self, default_cc):
        plan = compile_linreg("XS", default_cc)
        hops = list(iter_program_hops(plan.hops))
        assert not any(h.op == "b(*)" for h in hops)
        rand = next(h for h in hops if h.op == "dg(rand)")
        lo, hi = rand.children[2], rand.children[3]
        assert lo.is_literal and hi.is_literal and lo.value == hi.value == 0.001

    def test_transpose_is_shared(self, default_cc):
        plan = compile_linreg("XS", default_cc)
        _, hops = parse_hop_explain(plan.hop_explain)
        transposes = [h for h in hops if h["op"] == "r(t)"]
        assert len(transposes) == 1
        consumers = [h for h in hops if transposes[0]["id"] in h["kids"]]
        assert [h["op"] for h in consumers] == ["ba(+*)", "ba(+*)"]

    def test_cse_merges_identical_subexpressions(self, default_cc):
        src = "X = read($1);\nA = t(X) %*% X;\nB = t(X) %*% X;\nwrite(A + B, $2);\n"
        plan = compile_script(src, ["./data/X", "./data/o"],
                              {"./data/X": MatrixCharacteristics(100, 10, 1000, 1000, 1000)}, default_cc)
        assert sum(1 for h in iter_program_hops(plan.hops) if h.op == "ba(+*)") == 1

    def test_random_generators_are_not_merged(self, default_cc):
        src = "A = rand(rows=3, cols=3);\nB = rand(rows=3, cols=3);\nwrite(A + B, $1);\n"
        plan = compile_script(src, ["./data/o"], {}, default_cc)
        assert sum(1 for h in iter_program_hops(plan.hops) if h.op == "dg(rand)") == 2


# --- size propagation against numpy ---------------------------------------------

@st.composite
def shaped_expr(draw, names: dict, depth: int = 3):
    """(dml text, numpy value) pairs of well-formed matrix expressions."""
    if depth == 0 or draw(st.booleans()):
        name = draw(st.sampled_from(sorted(names)))
        return name, names[name]
    text, val = draw(shaped_expr(names, depth - 1))
    kind = draw(st.sampled_from(["t", "mm", "ew", "scalar", "diag", "append", "neg"]))
    if kind == "t":
        return f"t({text})", val.T
    if kind == "neg":
        return f"-({text})", -val
    if kind == "scalar":
        return f"({text} * 2)", val * 2
    if kind == "diag":
        if val.shape[1] == 1:
            return f"diag({text})", np.diag(val[:, 0])
        if val.shape[0] == val.shape[1]:
            return f"diag({text})", np.diag(val).reshape(-1, 1)
        return text, val
    k = draw(st.integers(1, 8))
    if kind == "mm":
        other = np.ones((val.shape[1], k))
        return f"({text} %*% matrix(1, {val.shape[1]}, {k}))", val @ other
    if kind == "append":
        other = np.ones((val.shape[0], k))
        return f"append({text}, matrix(1, {val.shape[0]}, {k}))", np.hstack([val, other])
    other_text, other = draw(shaped_expr(names, depth - 1))
    if other.shape == val.shape:
        return f"({text} + {other_text})", val + other
    return f"({text} + {text})", val + val


DIMS = {"A": (3, 5), "B": (5, 5), "C": (8, 1), "D": (1, 7)}
ARRAYS = {k: np.ones(v) for k, v in DIMS.items()}


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(shaped_expr(ARRAYS))
def test_sizes_match_numpy(pair):
    text, val = pair
    names = sorted(DIMS)
    lines = [f"{n} = read(${i + 1});" for i, n in enumerate(names)]
    lines.append(f"R = {text};")
    lines.append(f"write(R, ${len(names) + 1});")
    meta = {f"./in/{n}": MatrixCharacteristics(*DIMS[n], 1000, 1000, DIMS[n][0] * DIMS[n][1])
            for n in names}
    args = [f"./in/{n}" for n in names] + ["./out/R"]
    script = parse_script("\n".join(lines) + "\n", args)
    prog = compile_hops(script, meta, load_config())
    out = next(h for h in iter_program_hops(prog) if h.op == "PWrite")
    assert (out.mc.rows, out.mc.cols) == val.shape, text


# --- memory and execution types ----------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6), st.integers(1, 2000))
def test_memory_monotone_in_rows(r1, r2, cols):
    lo, hi = sorted((r1, r2))
    cc = load_config()

    def estimates(rows):
        meta = {"./data/X": MatrixCharacteristics(rows, cols, 1000, 1000, rows * cols),
                "./data/y": MatrixCharacteristics(rows, 1, 1000, 1000, rows)}
        from conftest import ARGS, LINREG
        prog = compile_hops(parse_script(LINREG, ARGS), meta, cc)
        return [(h.op, h.mem_estimate) for h in iter_program_hops(prog)]

    small, large = estimates(lo), estimates(hi)
    assert [o for o, _ in small] == [o for o, _ in large]
    for (op, a), (_, b) in zip(small, large):
        assert a <= b, op


@pytest.mark.parametrize("ratio", [0.05, 0.2, 0.5, 0.7, 0.9])
@pytest.mark.parametrize("scenario", ["XS", "XL1", "XL3"])
def test_exec_types_follow_budget(scenario, ratio):
    cc = load_config(overrides={"budget_ratio": str(ratio)})
    plan = compile_linreg(scenario, cc)
    for h in iter_program_hops(plan.hops):
        if h.op in DATA_OPS or h.op in CP_ONLY or h.is_literal:
            assert h.exec_type == "CP"
        elif h.data_type == MATRIX or any(c.data_type == MATRIX for c in h.children):
            assert (h.exec_type == "MR") == (h.mem_estimate > cc.local_budget), h


def test_budget_ratio_half_gives_1024mb():
    cc = load_config(overrides={"budget_ratio": "0.5"})
    assert cc.local_budget == 1024 * MB


class TestRecompile:
    def test_small_plan_needs_no_recompile(self, default_cc):
        plan = compile_linreg("XS", default_cc)
        assert not any(b.recompile for b in iter_program_blocks(plan.hops))

    def test_mr_block_is_flagged(self, default_cc):
        plan = compile_linreg("XL1", default_cc)
        flags = [b.recompile for b in plan.hops.blocks if isinstance(b, GenericBlock)]
        assert flags == [False, True]

    def test_unknown_dimension_is_flagged(self, default_cc):
        src = "X = read($1);\ns = sum(X);\nY = matrix(1, s, 10);\nZ = t(Y) %*% Y;\nwrite(Z, $2);\n"
        plan = compile_script(src, ["./data/X", "./data/Z"],
                              {"./data/X": MatrixCharacteristics(10, 10, 1000, 1000, 100)}, default_cc)
        rand = next(h for h in iter_program_hops(plan.hops) if h.op == "dg(rand)")
        assert not rand.mc.dims_known
        assert rand.exec_type == "MR"
        assert any(b.recompile for b in iter_program_blocks(plan.hops))


class TestCompileErrors:
    def compile(self, src, shapes):
        meta = {f"./in/{n}": MatrixCharacteristics(r, c, 1000, 1000, r * c) for n, (r, c) in shapes.items()}
        args = [f"./in/{n}" for n in shapes] + ["./out/o"]
        return compile_script(src, args, meta, load_config())

    @pytest.mark.parametrize("src,line,needle", [
        ("A = read($1);\nB = read($2);\nC = A %*% B;\nwrite(C, $3);\n", 3, "inner dimensions"),
        ("A = read($1);\nB = read($2);\nC = A + t(B);\nwrite(C, $3);\n", 3, "elementwise"),
        ("A = read($1);\nB = read($2);\n\nC = solve(A, B);\nwrite(C, $3);\n", 4, "square"),
        ("A = read($1);\nB = read($2);\nC = append(A, t(B));\nwrite(C, $3);\n", 3, "append"),
    ])
    def test_dimension_errors_name_hop_and_line(self, src, line, needle):
        with pytest.raises(CompileError) as ei:
            self.compile(src, {"A": (3, 4), "B": (3, 4)})
        err = ei.value
        assert needle in err.message
        assert err.line == line
        assert err.hop_id is not None
        assert f"line {line}" in str(err)

    def test_diag_of_rectangular_matrix(self):
        with pytest.raises(CompileError, match="diag"):
            self.compile("A = read($1);\nD = diag(A);\nwrite(D, $2);\n", {"A": (3, 4)})

    def test_undefined_variable(self):
        with pytest.raises(CompileError):
            compile_script("write(Q, $1);\n", ["./o"], {}, load_config())
