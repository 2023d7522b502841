"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""
import random
import time
from collections import Counter
from types import SimpleNamespace

import pytest

from conftest import compile_linreg, golden, normalize_runtime, scenario_meta
from scriptgen import random_script
from test_cli import UNKNOWN_DIM, call, machine
from test_cost import dense, hdfs_var, mem_var, oracle, random_tree
from test_hops import mb_of, parse_hop_explain
from test_piggyback import _asap, _scheduled, brute_force_min, random_ops, valid

from planctl.compiler import compile_script
from planctl.config import format_budget_mb, load_config
from planctl.cost import (SymbolTable, cost_cp_instruction, cost_program, flop_estimate,
                          format_seconds)
from planctl.runtime import Instruction, MRJob, Operand, explain_runtime
from planctl.runtime.instructions import RuntimeProgram
from planctl.runtime.piggyback import piggyback


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, failures: list):
        with capsys.disabled():
            status = "PASS" if not failures else "FAIL"
            detail = "" if not failures else ": " + "; ".join(failures[:3])
            print(f"\n[{status}] {number} {title}{detail}")
        assert not failures, failures
    return emit


def check(failures: list, ok: bool, what: str):
    if not ok:
        failures.append(what)


def test_1_plan_shapes(verdict):
    cc, failures = load_config(), []
    want = {"XS": lambda n: n == 0, "XL1": lambda n: n == 1, "XL2": lambda n: n >= 2,
            "XL3": lambda n: n == 3, "XL4": lambda n: n == 3}
    start, plans = time.perf_counter(), {}
    for name, ok in want.items():
        plans[name] = compile_linreg(name, cc)
        cost_program(plans[name].runtime, cc)
        n = plans[name].runtime.counts[1]
        check(failures, ok(n), f"{name} has {n} MR jobs")
    elapsed = time.perf_counter() - start
    check(failures, elapsed < 1.0, f"took {elapsed:.2f}s")

    xs = [i for i in plans["XS"].runtime.all_instructions() if not isinstance(i, MRJob)]
    ops = [i.opcode for i in xs]
    check(failures, any(i.opcode == "tsmm" and i.args == ["LEFT"] for i in xs), "XS tsmm LEFT")
    k = ops.index("ba+*") if "ba+*" in ops else -1
    check(failures, k > 0 and "r'" in ops[:k] and "r'" in ops[k:], "XS transposed multiply rewrite")
    job = plans["XL1"].runtime.mr_jobs[0]
    check(failures, sorted(i.opcode for i in job.phase("map")) == ["mapmm", "r'", "tsmm"], "XL1 map phase")
    check(failures, [i.opcode for i in job.phase("agg")] == ["ak+", "ak+"], "XL1 agg phase")
    check(failures, "partition" in [i.opcode for i in plans["XL1"].runtime.all_instructions()],
          "XL1 partition")
    for name in ("XL2", "XL3"):
        mr_ops = [i.opcode for j in plans[name].runtime.mr_jobs for i in j.instructions]
        check(failures, "cpmm" in mr_ops, f"{name} cpmm")
        # XL3's y no longer fits the map budget, so no multiply may broadcast it
        check(failures, name == "XL2" or "mapmm" not in mr_ops, f"{name} mapmm")
    verdict(1, f"plan shapes XS/XL1/XL2/XL3/XL4 = 0/1/>=2/3/3 jobs in {elapsed:.2f}s", failures)


def test_2_worked_examples(verdict):
    cc, paper, failures = load_config(), load_config(calibration="paper"), []
    check(failures, flop_estimate("tsmm", [dense(10**4, 10**3)], args=["LEFT"]) == 0.5e10, "tsmm flops")
    st = SymbolTable()
    st.put(hdfs_var("X", dense(10**4, 10**3)))
    st.put(mem_var("_mVar2", dense(1000, 1000)))
    c = cost_cp_instruction(Instruction("tsmm", [Operand("X")], [Operand("_mVar2")], ["LEFT"]), st, cc)
    check(failures, c.compute == 2.5, f"tsmm compute {c.compute}")
    check(failures, abs(c.io - 0.509) <= 0.005 * 0.509, f"tsmm io {c.io}")
    check(failures, flop_estimate("ba+*", [dense(1, 10**4), dense(10**4, 10**3)]) == 1e7, "ba+* flops")
    check(failures, flop_estimate("solve", [dense(1000, 1000), dense(1000, 1)]) == 1e9, "solve flops")
    check(failures, format_seconds(1e9 / paper.calibration.cycles_per_second) == "0.465s", "solve time")
    inst = Instruction("createvar", [], [Operand("_mVar3")], path="x", mc=dense(2, 2))
    check(failures, format_seconds(cost_cp_instruction(inst, SymbolTable(), paper).compute) == "4.65E-9s",
          "createvar time")
    check(failures, format_budget_mb(cc.local_budget) == "1434MB", "local budget")
    verdict(2, "worked examples (tsmm, ba+*, solve, createvar, budget)", failures)


def test_3_reference_figures(verdict):
    paper, failures = load_config(calibration="paper"), []
    xs = cost_program(compile_linreg("XS", paper).runtime, paper).total
    check(failures, abs(xs - 3.31) <= 0.10 * 3.31, f"XS total {xs:.3f}")
    rp = compile_linreg("XL1", paper).runtime
    rep = cost_program(rp, paper)
    check(failures, abs(rep.total - 606.9) <= 0.10 * 606.9, f"XL1 total {rep.total:.1f}")
    (job,) = rep.mr_jobs
    comp = job.components
    for key, ref, tol in [("latency", 144.5, 0.02), ("hdfsread", 70.7, 0.02), ("mapexec", 324.7, 0.05)]:
        check(failures, abs(comp[key] - ref) <= tol * ref, f"{key} {comp[key]:.2f} vs {ref}")
    check(failures, abs(job.nmap - 5967) <= 0.01 * 5967, f"nmap {job.nmap}")
    part = next(i for i in rp.all_instructions() if getattr(i, "opcode", "") == "partition")
    rest = [comp[k] for k in ("dcread", "shuffle", "redexec", "hdfswrite")] + [rep.cost_of(part).compute]
    check(failures, all(v > 0 for v in rest), f"uncalibrated components {rest}")
    check(failures, sum(rest) <= 0.15 * job.total, f"uncalibrated share {sum(rest) / job.total:.3f}")
    verdict(3, f"reference figures (XS {xs:.2f}s, XL1 {rep.total:.1f}s, nmap {job.nmap})", failures)


def test_4_hop_explain_golden(verdict):
    failures = []
    frame_g, want = parse_hop_explain(golden("xs_hops.txt"))
    frame_o, got = parse_hop_explain(compile_linreg("XS", load_config()).hop_explain)
    check(failures, frame_o == frame_g, "block structure differs")
    check(failures, len(got) == len(want), f"{len(got)} vs {len(want)} HOPs")
    rename = {}
    for g, w in zip(got, want):
        rename[g["id"]] = w["id"]
        same = (g["depth"], g["op"], g["name"], g["mc"], g["exec"]) == \
            (w["depth"], w["op"], w["name"], w["mc"], w["exec"])
        check(failures, same and [rename.get(k) for k in g["kids"]] == w["kids"], f"HOP {w['id']}")
        gm, wm = mb_of(g["mem"]), mb_of(w["mem"])
        check(failures, abs(gm - wm) <= max(0.1 * wm, 1.0), f"HOP {w['id']} memory {gm} vs {wm}")
    verdict(4, "XS HOP explain matches the reference modulo ids", failures)


def test_5_runtime_goldens(verdict):
    cc, failures = load_config(), []
    for name, file, counts in [("XS", "xs_runtime.txt", (34, 0)), ("XL1", "xl1_runtime.txt", (29, 1))]:
        rp = compile_linreg(name, cc).runtime
        check(failures, rp.counts == counts, f"{name} counts {rp.counts}")
        check(failures, normalize_runtime(explain_runtime(rp)) == normalize_runtime(golden(file)),
              f"{name} listing differs")
    verdict(5, "runtime listings XS 34/0 and XL1 29/1 match the reference", failures)


def test_6_aggregation_oracle(verdict):
    cc, failures = load_config(), []
    coster = lambda inst, st: SimpleNamespace(total=inst.total, read_io=inst.read)
    for seed in range(1000):
        rng = random.Random(seed)
        blocks = random_tree(rng, rng.randint(0, 3))
        got = cost_program(RuntimeProgram(blocks), cc, inst_coster=coster).total
        check(failures, got == oracle(blocks, cc.k_local, 10)[0], f"seed {seed}")
    verdict(6, "control-flow fold equals the exact oracle on 1000 trees", failures)


def test_7_piggyback_oracle(verdict):
    failures = []
    for seed in range(500):
        ops = random_ops(random.Random(seed))
        plans = piggyback(ops)
        sched = _scheduled(ops)
        jobs = [[i for i in p.ops if i in sched] for p in plans]
        check(failures, valid(jobs, sched, _asap(sched)), f"seed {seed} invalid")
        check(failures, len(plans) == brute_force_min(ops), f"seed {seed} not minimal")
    verdict(7, "piggybacking is valid and minimal on 500 random DAGs", failures)


def test_8_symbol_table_fuzz(verdict):
    cc, failures = load_config(), []
    for seed in range(200):
        src = random_script(random.Random(1000 + seed))
        meta, fmts = scenario_meta("XS" if seed % 2 else "XL1")
        rep = cost_program(compile_script(src, ["./data/X", "./data/y"], meta, cc, fmts).runtime, cc)
        check(failures, all(v == 1 for v in Counter(rep.read_events).values()), f"seed {seed} reads")
        check(failures, rep.final_vars == [], f"seed {seed} leaks {rep.final_vars}")
    verdict(8, "symbol table: reads charged once per region, no leaks, 200 scripts", failures)


def test_9_unknown_sizes(verdict, tmp_path):
    failures = []
    script = tmp_path / "unk.dml"
    script.write_text(UNKNOWN_DIM)
    (tmp_path / "X.mtd").write_text("rows=100\ncols=10\nnnz=1000\n")
    args = (str(script), str(tmp_path / "X"), str(tmp_path / "Z"))
    code, out, _ = call("cost", *args, "--machine")
    check(failures, code == 0, f"exit code {code}")
    kv = machine(out)
    check(failures, kv.get("underestimate") == "true", "underestimate flag not set")
    check(failures, int(kv.get("mr_jobs", "0")) >= 1, "no MR job")
    check(failures, "[recompile=true]" in call("explain-hops", *args)[1], "recompile flag missing")
    verdict(9, "unknown sizes compile to MR, flag recompile and underestimate, exit 0", failures)
