import re
from pathlib import Path

import pytest

from planctl.compiler import compile_script
from planctl.config import load_config
from planctl.scenarios import SCENARIOS

GOLDEN = Path(__file__).parent / "golden"
LINREG = (Path(__file__).parents[1] / "src" / "planctl" / "scripts" / "linreg.dml").read_text()
ARGS = ["./data/X", "./data/y", "0", "./data/b"]


def scenario_meta(name: str) -> tuple:
    inputs = SCENARIOS[name].inputs()
    meta = {"./data/X": inputs["X"].mc, "./data/y": inputs["y"].mc}
    return meta, {p: "binaryblock" for p in meta}


def compile_linreg(name: str, cc=None, pid: int = 4242, intercept: str = "0"):
    meta, fmts = scenario_meta(name)
    args = list(ARGS)
    args[2] = intercept
    return compile_script(LINREG, args, meta, cc or load_config(), fmts,
                          source_name="linreg.dml", pid=pid)


def golden(name: str) -> str:
    return (GOLDEN / name).read_text()


def normalize_runtime(text: str) -> list:
    """(depth, tokens) per logical line; scratch pids/hosts and field wrapping ignored."""
    out = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        raw = re.sub(r"_p\d+_[^/]+//", "_pPID_HOST//", raw)
        m = re.match(r"^(-*)\s*(.*)$", raw)
        depth, body = len(m.group(1)), m.group(2).strip()
        if body.startswith("MR ") and out and "=" in " ".join(out[-1][1]):
            out[-1] = (out[-1][0], out[-1][1] + body.replace(",", " ").split())
            continue
        out.append((depth, body.replace(",", " ").split()))
    return out


@pytest.fixture(scope="session")
def default_cc():
    return load_config()


@pytest.fixture(scope="session")
def paper_cc():
    return load_config(calibration="paper")
