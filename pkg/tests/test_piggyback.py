import random

import pytest

from planctl.runtime.piggyback import GMR, MMCJ, PHASE_ORDER, MROp, PiggybackError, piggyback

PHASES = list(PHASE_ORDER)


def random_ops(rng: random.Random) -> list:
    n = rng.randint(1, 5)
    ops = []
    for i in range(n):
        preds = tuple(sorted(rng.sample(range(i), k=rng.randint(0, min(i, 2)))))
        phase = rng.choice(PHASES)
        replicable = phase == "map" and not preds and rng.random() < 0.4
        ops.append(MROp(i, phase, preds, replicable))
    rng.shuffle(ops)
    return ops


def set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def _can_share(p: MROp, c: MROp) -> bool:
    order = {"rand": 0, "map": 1, "shuffle": 2, "agg": 3, "other": 4}
    if "shuffle" in (p.phase, c.phase):
        return False
    return order[p.phase] < order[c.phase] or p.phase == c.phase == "map"


def _asap(ops: dict) -> dict:
    wave: dict = {}

    def w(i):
        if i not in wave:
            o = ops[i]
            wave[i] = max([w(p) + (0 if _can_share(ops[p], o) else 1)
                           for p in o.preds if p in ops], default=0)
        return wave[i]

    for i in ops:
        w(i)
    return wave


def _scheduled(ops: list) -> dict:
    consumed = {p for o in ops for p in o.preds}
    return {o.id: o for o in ops if not (o.replicable and o.id in consumed)}


def valid(jobs: list, ops: dict, wave: dict) -> bool:
    """Typed jobs, legal intra-job edges, every op in its earliest wave."""
    where = {i: k for k, job in enumerate(jobs) for i in job}
    for job in jobs:
        shuffles = [i for i in job if ops[i].phase == "shuffle"]
        if shuffles and len(job) != 1:
            return False
        if len({wave[i] for i in job}) != 1:
            return False
    for c in ops.values():
        for p in c.preds:
            if p not in ops:
                continue
            if where[p] == where[c.id]:
                if not _can_share(ops[p], c):
                    return False
            elif wave[p] >= wave[c.id]:
                return False
    return True


def brute_force_min(ops: list) -> int:
    sched = _scheduled(ops)
    wave = _asap(sched)
    return min(len(jobs) for jobs in set_partitions(sorted(sched)) if valid(jobs, sched, wave))


@pytest.mark.parametrize("seed", range(500))
def test_greedy_matches_brute_force(seed):
    ops = random_ops(random.Random(seed))
    plans = piggyback(ops)
    sched = _scheduled(ops)
    by_id = {o.id: o for o in ops}
    # the greedy plan is itself a legal plan once replicated copies are dropped
    jobs = [[i for i in p.ops if i in sched] for p in plans]
    assert sorted(i for j in jobs for i in j) == sorted(sched)
    assert valid(jobs, sched, _asap(sched))
    for p in plans:
        assert p.job_type == (MMCJ if any(by_id[i].phase == "shuffle" for i in p.ops) else GMR)
        for i in p.ops:
            if i not in sched:
                assert any(i in by_id[j].preds for j in p.ops), "unused replica"
    assert len(plans) == brute_force_min(ops)


def test_execution_order_respects_dependencies():
    for seed in range(200):
        ops = random_ops(random.Random(seed))
        seen = set()
        by_id = {o.id: o for o in ops}
        for plan in piggyback(ops):
            for i in plan.ops:
                for p in by_id[i].preds:
                    assert p in seen or p in plan.ops
            seen.update(plan.ops)


def test_cpmm_then_aggregation_uses_three_jobs():
    # transpose, cpmm, its aggregation, and an independent map+agg chain
    ops = [MROp(0, "map", (), True), MROp(1, "shuffle", (0,)), MROp(2, "agg", (1,)),
           MROp(3, "map", ()), MROp(4, "agg", (3,))]
    plans = piggyback(ops)
    assert [p.job_type for p in plans] == [MMCJ, GMR, GMR]
    assert plans[0].ops == [0, 1]
    assert plans[1].ops == [3, 4]
    assert plans[2].ops == [2]


def test_map_chain_shares_one_job():
    ops = [MROp(0, "map", ()), MROp(1, "map", (0,)), MROp(2, "agg", (1,)), MROp(3, "agg", (0,))]
    assert len(piggyback(ops)) == 1


def test_agg_feeding_map_needs_a_second_job():
    ops = [MROp(0, "map", ()), MROp(1, "agg", (0,)), MROp(2, "map", (1,))]
    assert [p.ops for p in piggyback(ops)] == [[0, 1], [2]]


def test_cycle_is_rejected():
    with pytest.raises(PiggybackError):
        piggyback([MROp(0, "map", (1,)), MROp(1, "map", (0,))])


def test_unconsumed_transpose_is_scheduled():
    plans = piggyback([MROp(0, "map", (), True)])
    assert [(p.job_type, p.ops) for p in plans] == [(GMR, [0])]
