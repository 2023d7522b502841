"""Packing MR operations into MR jobs, wave by wave.

Each operation runs in one phase of a job: rand < map < shuffle < agg < other.
Two job types exist: GMR (generic; everything except cpmm) and MMCJ, which
holds exactly one cpmm (the shuffle phase) plus replicated transposes.

A producer and consumer may share a GMR job iff the producer's phase comes
strictly before the consumer's, or both run in the map phase.  Transposes over
job inputs are *replicable*: they are copied into every consuming job instead
of being scheduled themselves.

Jobs execute in waves.  Every non-replicable operation gets the earliest
wave compatible with its inputs: a producer it cannot share a job with pushes
it one wave later.  All GMR operations of a wave form one job and every cpmm
forms its own MMCJ job in its wave.  Within that wave discipline the job count
is minimal; delaying operations into later waves could sometimes save a job,
but the wave discipline is what yields three jobs for a cpmm followed by an
independent aggregation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

PHASE_ORDER = {"rand": 0, "map": 1, "shuffle": 2, "agg": 3, "other": 4}
GMR, MMCJ = "GMR", "MMCJ"


class PiggybackError(RuntimeError):
    pass


@dataclass(frozen=True)
class MROp:
    id: int
    phase: str
    preds: tuple = ()            # ids of producing MR operations in the same set
    replicable: bool = False

    @property
    def job_type(self) -> str:
        return MMCJ if self.phase == "shuffle" else GMR


@dataclass
class JobPlan:
    job_type: str
    ops: list = field(default_factory=list)     # op ids, dependency ordered


def shares_job(p: MROp, c: MROp) -> bool:
    """True iff ``c`` may consume ``p`` inside the same GMR job."""
    if p.job_type != GMR or c.job_type != GMR:
        return False
    return PHASE_ORDER[p.phase] < PHASE_ORDER[c.phase] or p.phase == c.phase == "map"


def topo_order(ops: list) -> list:
    by_id = {o.id: o for o in ops}
    seen, out, active = set(), [], set()

    def visit(o):
        if o.id in seen:
            return
        if o.id in active:
            raise PiggybackError("cyclic dependency among MR operations")
        active.add(o.id)
        for p in o.preds:
            if p in by_id:
                visit(by_id[p])
        active.discard(o.id)
        seen.add(o.id)
        out.append(o)

    for o in ops:
        visit(o)
    return out


def wave_levels(order: list) -> dict:
    """Earliest wave of every non-replicable op (``order`` is topological)."""
    by_id = {o.id: o for o in order}
    level: dict = {}
    for o in order:
        if o.replicable:
            continue
        lv = 0
        for pid in o.preds:
            p = by_id.get(pid)
            if p is None or p.replicable:
                continue
            lv = max(lv, level[p.id] + (0 if shares_job(p, o) else 1))
        level[o.id] = lv
    return level


def piggyback(ops: list) -> list:
    """Group ``ops`` into jobs; returns :class:`JobPlan` s in execution order."""
    order = topo_order(ops)
    consumed = {pid for o in order for pid in o.preds}
    # a replicable op nobody consumes is scheduled like any map operation
    order = [o if not o.replicable or o.id in consumed else MROp(o.id, o.phase, o.preds)
             for o in order]
    by_id = {o.id: o for o in order}
    level = wave_levels(order)
    rank = {o.id: i for i, o in enumerate(order)}
    jobs = []
    for lv in sorted({level[o.id] for o in order if o.id in level and o.job_type == GMR}):
        members = [o.id for o in order
                   if level.get(o.id) == lv and o.job_type == GMR]
        jobs.append(((lv, 1, rank[members[0]]), JobPlan(GMR, members)))
    for o in order:
        if o.id in level and o.job_type == MMCJ:
            jobs.append(((level[o.id], 0, rank[o.id]), JobPlan(MMCJ, [o.id])))
    jobs.sort(key=lambda kv: kv[0])
    plans = [j for _, j in jobs]
    # copy replicable transposes into every job that consumes them
    for plan in plans:
        members = set(plan.ops)
        extra = {pid for oid in plan.ops for pid in by_id[oid].preds
                 if pid in by_id and by_id[pid].replicable}
        plan.ops = sorted(members | extra, key=rank.get)
    return plans


def job_count(ops: list) -> int:
    return len(piggyback(ops))
