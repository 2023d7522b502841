"""Runtime plan listing annotated with cost estimates, plus key=value export."""
from __future__ import annotations

from ..runtime.instructions import MRJob, RtFor, RtFunction, RtGeneric, RtIf, RtWhile
from .estimator import JOB_COMPONENTS, CostReport, JobCost


def format_seconds(v: float) -> str:
    """0s, 4.7E-9s, 0.00465s, 3.31s, 606.9s."""
    v = float(v)
    if v == 0:
        return "0s"
    if abs(v) >= 100:
        return f"{v:.1f}s"
    s = f"{v:.3g}"
    if "e" in s:
        mant, exp = s.split("e")
        s = f"{mant}E{int(exp)}"
    return s + "s"


def _pair(c) -> str:
    text = f"C=[{format_seconds(c.io)}, {format_seconds(c.compute)}]"
    return text + " (unknown size)" if c.unknown else text


class _Lister:
    def __init__(self, report: CostReport, simplify: bool):
        self.report = report
        self.simplify = simplify
        self.rows = []      # (text, annotation or None)

    def add(self, text: str, note=None):
        self.rows.append((text, note))

    def insts(self, insts: list, depth: int):
        pad = "-" * depth
        for inst in insts:
            c = self.report.cost_of(inst)
            if isinstance(inst, MRJob):
                self.job(inst, c, depth)
            elif not (self.simplify and inst.opcode == "rmvar"):
                self.add(pad + inst.short_text(), _pair(c) if c is not None else None)

    def job(self, job: MRJob, c: JobCost, depth: int):
        pad = "-" * depth
        inner = "-" * (depth + 4)
        if c is None:
            self.add(f"{pad}MR-Job[", None)
            comp, head = {}, ""
        else:
            comp = c.components
            head = f" # nmap={c.nmap} nred={c.nred}"
            note = f"C=[{format_seconds(c.total)}]" + (" (unknown size)" if c.unknown else "")
            self.add(f"{pad}MR-Job[{head}", note)

        def ann(key):
            return f"{key}=[{format_seconds(comp[key])}]" if key in comp else None

        def field_rows(label, insts, notes):
            texts = [i.short_text() for i in insts] or [""]
            for k, t in enumerate(texts):
                sep = "," if k < len(texts) - 1 else ""
                head_ = f"{label:<7} = " if k == 0 else " " * 10
                note = notes[k] if k < len(notes) else None
                self.add(f"{inner}{head_}{t}{sep}".rstrip(), note)

        self.add(f"{inner}{'jobtype':<7} = {job.job_type}", ann("latency"))
        self.add(f"{inner}{'inputs':<7} = [{', '.join(job.input_labels)}]", ann("hdfsread"))
        if job.phase("rand"):
            field_rows("rand", job.phase("rand"), [])
        maps = job.phase("map")
        if len(maps) > 1:
            notes = [ann("mapexec")] + [None] * (len(maps) - 2) + [ann("dcread")]
        else:
            both = " ".join(n for n in (ann("mapexec"), ann("dcread")) if n)
            notes = [both or None]
        field_rows("map", maps, notes)
        field_rows("shuffle", job.phase("shuffle"), [ann("shuffle")])
        field_rows("agg", job.phase("agg"), [ann("redexec")])
        if job.phase("other"):
            field_rows("other", job.phase("other"), [])
        self.add(f"{inner}{'outputs':<7} = [{', '.join(job.output_labels)}]", ann("hdfswrite"))
        export = f"export=[{format_seconds(c.export)}]" if c is not None and c.export else None
        self.add(f"{inner}{'ret ix':<7} = ," + ",".join(str(i) for i in job.result_indices), export)
        self.add(f"{inner}{'repl':<7} = {job.replication} ]")

    def block(self, b, depth: int):
        pad = "-" * depth
        est = self.report.blocks.get(id(b))
        note = f"C={format_seconds(est)}" if est is not None else "C=0s (not executed)"
        lines = f"(lines {b.lines[0]}-{b.lines[1]})"
        if isinstance(b, RtGeneric):
            self.add(f"{pad}GENERIC {lines}", note)
            self.insts(b.instructions, depth + 2)
        elif isinstance(b, RtIf):
            self.add(f"{pad}IF {lines}", note)
            self.insts(b.predicate, depth + 2)
            for c in b.then_blocks:
                self.block(c, depth + 2)
            if b.else_blocks:
                self.add(f"{pad}ELSE")
                for c in b.else_blocks:
                    self.block(c, depth + 2)
        elif isinstance(b, (RtWhile, RtFor)):
            self.add(f"{pad}{b.kind.upper()} {lines}", note)
            self.insts(b.predicate if isinstance(b, RtWhile) else b.header, depth + 2)
            for c in b.body:
                self.block(c, depth + 2)
        elif isinstance(b, RtFunction):
            per_call = self.report.functions.get(b.name, 0.0)
            self.add(f"{pad}FUNCTION {b.name} {lines}", f"C={format_seconds(per_call)} per call")
            for c in b.body:
                self.block(c, depth + 2)

    def render(self) -> str:
        width = max((len(t) for t, n in self.rows if n), default=0) + 1
        out = []
        for text, note in self.rows:
            out.append(f"{text:<{width}}# {note}" if note else text)
        return "\n".join(out) + "\n"


def explain_with_costs(rp, report: CostReport, simplify: bool = True) -> str:
    """Plan listing with per-instruction, per-job and per-block costs."""
    ls = _Lister(report, simplify)
    head = f"total cost C={format_seconds(report.total)}"
    if report.underestimate:
        head += f" (underestimate: {len(report.unknown_instructions)} instruction(s) of unknown size)"
    ls.add("PROGRAM", head)
    if rp.functions:
        ls.add("--FUNCTIONS")
        for f in rp.functions.values():
            ls.block(f, 4)
    ls.add("--MAIN PROGRAM", f"C={format_seconds(report.total)}")
    for b in rp.blocks:
        ls.block(b, 4)
    return ls.render()


def _num(v) -> str:
    return format(float(v), ".10g")


def machine_lines(rp, report: CostReport) -> str:
    """One ``key=value`` line per cost item."""
    cp, mr = rp.counts
    out = [f"total={_num(report.total)}",
           f"underestimate={'true' if report.underestimate else 'false'}",
           f"cp_instructions={cp}", f"mr_jobs={mr}"]
    n_inst = n_job = 0
    for inst in rp.all_instructions():
        c = report.cost_of(inst)
        if c is None:
            continue
        if isinstance(inst, MRJob):
            key = f"job.{n_job}"
            out.append(f"{key}.nmap={c.nmap}")
            out.append(f"{key}.nred={c.nred}")
            for comp in JOB_COMPONENTS:
                out.append(f"{key}.{comp}={_num(c.components[comp])}")
            out.append(f"{key}.export={_num(c.export)}")
            out.append(f"{key}.total={_num(c.total)}")
            n_job += 1
        else:
            key = f"inst.{n_inst}.{inst.opcode}"
            out.append(f"{key}.io={_num(c.io)}")
            out.append(f"{key}.compute={_num(c.compute)}")
            n_inst += 1
    for w in report.unknown_instructions:
        out.append(f"unknown={w}")
    return "\n".join(out) + "\n"
