"""``planctl``: compile scripts and print plan and cost explains.

Exit codes: 0 success, 2 usage error, 3 script not found, 4 compile error,
5 metadata error, 6 costing error, 7 configuration error.
"""
from __future__ import annotations

import argparse
import io
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

from .compiler import compile_script
from .config import ConfigError, load_config
from .cost import CostError, cost_program, explain_with_costs, machine_lines
from .frontend import ScriptError, parse_script
from .hops import build_hops
from .hops.nodes import CompileError, iter_program_hops
from .metadata import MetadataError, format_metadata, read_metadata, write_metadata
from .runtime import explain_runtime
from .runtime.piggyback import PiggybackError
from .scenarios import SCENARIOS

EXIT_OK, EXIT_USAGE, EXIT_NO_SCRIPT, EXIT_COMPILE, EXIT_META, EXIT_COST, EXIT_CONFIG = (
    0, 2, 3, 4, 5, 6, 7)
COMMANDS = ("explain-hops", "explain-runtime", "cost", "scenario")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planctl", description=__doc__.splitlines()[0])
    p.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    p.add_argument("target", nargs="?", help="script path, or scenario name for 'scenario'")
    p.add_argument("args", nargs="*", help="script arguments bound to $1..$n")
    p.add_argument("--config", help="cluster configuration file (key=value lines)")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), help="use scenario input metadata")
    p.add_argument("--full", action="store_true", help="include rmvar instructions")
    p.add_argument("--calibration", choices=("default", "paper"), default="default")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration or calibration constant")
    p.add_argument("--machine", action="store_true", help="cost: key=value lines only")
    p.add_argument("--out", default=".", help="scenario: directory for the sidecar files")
    p.add_argument("--pid", type=int, help="process id used in scratch paths")
    p.add_argument("--output", help="write the explain text to this file instead of stdout")
    return p


def _overrides(pairs: list) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise CliError(EXIT_USAGE, f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def resolve_script(target: str) -> tuple:
    """Script text and display name; bundled scripts are found by file name."""
    path = Path(target)
    if path.is_file():
        return path.read_text(encoding="utf-8"), str(path)
    bundled = resources.files("planctl") / "scripts" / path.name
    if path.parent == Path(".") and bundled.is_file():
        return bundled.read_text(encoding="utf-8"), path.name
    raise CliError(EXIT_NO_SCRIPT, f"script not found: {target}")


def input_metadata(source: str, args: list, scenario: Optional[str], block_size: int,
                   name: str) -> tuple:
    """Characteristics and formats for every persistent read of the script."""
    prog = build_hops(parse_script(source, args, source_name=name))
    paths = sorted({h.params["path"] for h in iter_program_hops(prog) if h.op == "PRead"})
    given = SCENARIOS[scenario].inputs(block_size) if scenario else {}
    meta, formats = {}, {}
    for path in paths:
        m = given.get(path) or given.get(Path(path).name)
        if m is None:
            m = read_metadata(path, block_size)
        meta[path] = m.mc
        formats[path] = m.format
    return meta, formats


def run(argv: list, out=sys.stdout, err=sys.stderr) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        if ns.output and ns.command != "scenario":
            buf = io.StringIO()
            code = _dispatch(ns, buf, err)
            try:
                Path(ns.output).write_text(buf.getvalue(), encoding="utf-8")
            except OSError as e:
                raise CliError(EXIT_USAGE, f"cannot write {ns.output}: {e}")
            return code
        return _dispatch(ns, out, err)
    except CliError as e:
        print(f"planctl: {e}", file=err)
        return e.code


def _dispatch(ns, out, err) -> int:
    if ns.command not in COMMANDS:
        raise CliError(EXIT_USAGE, f"unknown command '{ns.command}' "
                                   f"(expected one of {', '.join(COMMANDS)})")
    try:
        cc = load_config(ns.config, ns.calibration, _overrides(ns.set))
    except (ConfigError, OSError) as e:
        raise CliError(EXIT_CONFIG, f"configuration error: {e}")

    if ns.command == "scenario":
        name = ns.target or ns.scenario
        if name not in SCENARIOS:
            raise CliError(EXIT_USAGE, f"unknown scenario {name!r} "
                                       f"(expected one of {', '.join(SCENARIOS)})")
        outdir = Path(ns.out)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            for label, meta in SCENARIOS[name].inputs(cc.block_size).items():
                side = write_metadata(str(outdir / label), meta)
                out.write(f"# {side}\n{format_metadata(meta)}")
        except OSError as e:
            raise CliError(EXIT_META, f"cannot write metadata: {e}")
        return EXIT_OK

    if not ns.target:
        raise CliError(EXIT_USAGE, f"'{ns.command}' needs a script path")
    source, name = resolve_script(ns.target)
    try:
        meta, formats = input_metadata(source, ns.args, ns.scenario, cc.block_size, name)
    except MetadataError as e:
        raise CliError(EXIT_META, f"metadata error: {e}")
    except (ScriptError, CompileError) as e:
        raise CliError(EXIT_COMPILE, f"compile error: {e}")
    try:
        plan = compile_script(source, ns.args, meta, cc, formats, source_name=name, pid=ns.pid)
    except (ScriptError, CompileError, PiggybackError) as e:
        raise CliError(EXIT_COMPILE, f"compile error: {e}")
    for d in plan.diagnostics:
        print(f"planctl: warning: {d}", file=err)

    if ns.command == "explain-hops":
        out.write(plan.hop_explain)
    elif ns.command == "explain-runtime":
        out.write(explain_runtime(plan.runtime, simplify=not ns.full))
    else:
        try:
            report = cost_program(plan.runtime, cc)
        except CostError as e:
            raise CliError(EXIT_COST, f"cost error: {e}")
        if not ns.machine:
            out.write(explain_with_costs(plan.runtime, report, simplify=not ns.full))
            out.write("\n")
        out.write(machine_lines(plan.runtime, report))
        if report.underestimate:
            print("planctl: warning: some sizes are unknown; the estimate is a lower bound",
                  file=err)
        for w in report.warnings:
            print(f"planctl: warning: {w}", file=err)
    return EXIT_OK


def main(argv: Optional[list] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
