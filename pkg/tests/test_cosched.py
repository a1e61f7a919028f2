import math

import numpy as np
import pytest
from cosched_ref import feasible, mutate

from mgon.cosched import (
    LOCAL,
    ClusterNet,
    CycleError,
    Job,
    OracleTooLarge,
    ResourceState,
    Schedule,
    TaskSlot,
    Transfer,
    admit_dynamic,
    critical_path_bound,
    dump_jobs,
    earliest_transfer,
    estimated_deadline,
    generate_arrivals,
    generate_jobs,
    job_order,
    layerize,
    load_jobs,
    make_cluster,
    optimal_makespan,
    run_dynamic,
    schedule_jobs,
    task_weights,
    validate_schedule,
)
from mgon.net import load_topology, parse_topology


@pytest.fixture(scope="module")
def cs5():
    return make_cluster(load_topology("cs5"), 0)


def _single_node(vms=2):
    return ClusterNet(parse_topology("nodes 1\nslots 4\n"), (vms,))


def _pair(vms=(4, 4), slots=8, guard=2):
    return ClusterNet(parse_topology(f"nodes 2\nslots {slots}\nlink 0 1 1\n"), vms, guard)


def test_layers():
    diamond = Job(0, (1, 1, 1, 1), {(0, 1): 1, (0, 2): 1, (1, 3): 1, (2, 3): 1})
    assert layerize(diamond) == [[0], [1, 2], [3]]
    skip = Job(1, (1, 1, 1), {(0, 1): 1, (1, 2): 1, (0, 2): 1})
    assert layerize(skip) == [[0], [1], [2]]
    assert layerize(Job(2, (3,), {})) == [[0]]


def test_cycle_rejected():
    with pytest.raises(CycleError):
        layerize(Job(0, (1, 1, 1), {(0, 1): 1, (1, 2): 1, (2, 0): 1}))


def test_bad_jobs():
    with pytest.raises(ValueError):
        Job(0, (), {})
    with pytest.raises(ValueError):
        Job(0, (1, 0), {})
    with pytest.raises(ValueError):
        Job(0, (1, 1), {(0, 0): 1})
    with pytest.raises(ValueError):
        Job(0, (1, 1), {(0, 1): 0})


def test_weights():
    assert task_weights(Job(0, (10,), {}), 0.5, 1.0).theta == (5.0,)
    chain = task_weights(Job(0, (5, 2), {(0, 1): 3}), 0.5, 1.0)
    assert chain.theta == (6.5, 1.0) and chain.job == 6.5
    fork = task_weights(Job(0, (2, 4, 1), {(0, 1): 1, (0, 2): 9}), 1.0, 1.0)
    assert fork.theta[0] == 2 + max(1 + 4, 9 + 1)


def test_weight_scaling_keeps_order():
    jobs = generate_jobs(12, 4)
    a = [j.id for j, _ in job_order(jobs, "ca", 0.5, 1.0)]
    b = [j.id for j, _ in job_order(jobs, "ca", 5.0, 10.0)]
    assert a == b


def test_estimated_deadline():
    job = Job(0, (100, 100), {(0, 1): 300})
    assert estimated_deadline(job) == math.ceil(0.01 * 100 + 0.01 * 300 + 0.01 * 100)


def test_processing_length():
    net = _single_node(3)
    s = schedule_jobs([Job(0, (6,), {})], net, "ca")
    t = s.tasks[(0, 0)]
    assert (t.k, t.finish - t.start) == (3, 1)


def test_one_node_jobs_run_back_to_back():
    net = _single_node(2)
    for alg in ("ff", "ca"):
        s = schedule_jobs([Job(0, (4,), {}), Job(1, (4,), {})], net, alg)
        assert s.tasks[(0, 0)] == TaskSlot(0, 2, 1, 2)
        assert s.tasks[(1, 0)] == TaskSlot(0, 2, 3, 4)
        assert validate_schedule(s, [Job(0, (4,), {}), Job(1, (4,), {})], net) == []


def test_colocated_child_is_local():
    net = _single_node(2)
    job = Job(0, (2, 2), {(0, 1): 5})
    s = schedule_jobs([job], net, "ca")
    assert s.transfers[(0, 0, 1)] == LOCAL
    assert s.tasks[(0, 1)].start == s.tasks[(0, 0)].finish + 1


def test_earliest_transfer_respects_guard():
    net = _pair(slots=8, guard=2)
    st = ResourceState(net)
    links = net.route(0, 1)[1]
    st.reserve_band(links, 0, 3, 1, 4)
    x = earliest_transfer(st, links, 3, 1)
    # width 3 fits only at subcarrier 5 (3 + guard); width 1..2 would take longer
    assert (x.first, x.width, x.start, x.finish) == (5, 3, 1, 1)
    assert earliest_transfer(st, links, 30, 1, limit=2) is None


def test_deadline_zero_rejected_state_untouched(cs5):
    st = ResourceState(cs5)
    admit_dynamic(Job(0, (8, 8), {(0, 1): 15}, deadline=50), cs5, st, 0)
    before = st.copy()
    assert admit_dynamic(Job(1, (5,), {}, deadline=0), cs5, st, 3) is None
    assert admit_dynamic(Job(2, (500, 500), {(0, 1): 20}, deadline=2), cs5, st, 3) is None
    assert st.same_as(before)


def test_dynamic_respects_release_and_deadlines():
    net = make_cluster(load_topology("nsf").with_slots(320), 1, "nsf")
    jobs = generate_arrivals(25, 1)
    res = run_dynamic(jobs, net, "ca")
    kept = [j for j in jobs if j.id in res.admitted]
    assert validate_schedule(res.schedule, kept, net, {j.id: j.arrival + 1 for j in kept}) == []
    for j in kept:
        assert res.schedule.job_finish(j.id) <= res.deadlines[j.id]
    assert res.offered == 25 and res.blocked == 25 - len(kept)


def test_validator_flags_overlap():
    net = _pair(vms=(4, 4), slots=8, guard=1)
    a = Job(0, (4, 4), {(0, 1): 4})
    b = Job(1, (4, 4), {(0, 1): 4})
    links = net.route(0, 1)[1]
    s = Schedule(
        {(0, 0): TaskSlot(0, 2, 1, 2), (0, 1): TaskSlot(1, 2, 4, 5), (1, 0): TaskSlot(0, 2, 1, 2), (1, 1): TaskSlot(1, 2, 4, 5)},
        {(0, 0, 1): Transfer(links, 0, 4, 3, 3), (1, 0, 1): Transfer(links, 2, 4, 3, 3)},
    )
    letters = {v.letter for v in validate_schedule(s, [a, b], net)}
    assert letters == {"k"}
    s.transfers[(1, 0, 1)] = Transfer(links, 4, 4, 3, 3)  # touching: inside the guardband
    assert {v.letter for v in validate_schedule(s, [a, b], net)} == {"k"}
    assert not feasible(s, [a, b], net)


def test_validator_letters():
    net = _pair(vms=(2, 2), slots=8, guard=0)
    job = Job(0, (4, 4), {(0, 1): 4})
    links = net.route(0, 1)[1]
    good = Schedule({(0, 0): TaskSlot(0, 2, 1, 2), (0, 1): TaskSlot(1, 2, 4, 5)}, {(0, 0, 1): Transfer(links, 0, 4, 3, 3)})
    assert validate_schedule(good, [job], net) == []

    def letters(tasks=None, transfers=None):
        s = Schedule({**good.tasks, **(tasks or {})}, {**good.transfers, **(transfers or {})})
        return {v.letter for v in validate_schedule(s, [job], net)}

    assert "a" in letters({(0, 0): TaskSlot(0, 3, 1, 2)})
    assert "b" in letters(transfers={(0, 0, 1): LOCAL})
    assert "c" in letters({(0, 0): TaskSlot(0, 2, 0, 1)})
    assert "d" in letters({(0, 0): TaskSlot(0, 2, 1, 3)})
    assert "g" in letters(transfers={(0, 0, 1): Transfer(links, 6, 4, 3, 3)})
    assert "h" in letters(transfers={(0, 0, 1): Transfer(links, 0, 4, 2, 2)})
    assert "i" in letters({(0, 1): TaskSlot(1, 2, 3, 4)})
    assert "j" in letters(transfers={(0, 0, 1): Transfer((99,), 0, 4, 3, 3)})
    missing = Schedule(dict(good.tasks), {})
    assert {v.letter for v in validate_schedule(missing, [job], net)} == {"f"}
    crowded = Schedule({**good.tasks, (1, 0): TaskSlot(0, 1, 1, 4)}, dict(good.transfers))
    assert "e" in {v.letter for v in validate_schedule(crowded, [job, Job(1, (4,), {})], net)}


def test_generated_schedules_clean(cs5):
    for seed in range(30):
        jobs = generate_jobs(5, seed)
        for alg in ("ff", "ca"):
            s = schedule_jobs(jobs, cs5, alg)
            assert validate_schedule(s, jobs, cs5) == []
            assert feasible(s, jobs, cs5)


def test_validator_agrees_with_reference_on_mutations(cs5):
    rng = np.random.default_rng(8)
    agree = total = 0
    for seed in range(40):
        jobs = generate_jobs(3, seed)
        s = schedule_jobs(jobs, cs5, "ca" if seed % 2 else "ff")
        for _ in range(25):
            m = mutate(s, jobs, cs5, rng)
            total += 1
            agree += (validate_schedule(m, jobs, cs5) == []) == feasible(m, jobs, cs5)
    assert agree / total >= 0.99, (agree, total)


def test_critical_path_bound(cs5):
    for seed in range(20):
        jobs = generate_jobs(1, seed)
        s = schedule_jobs(jobs, cs5, "ca")
        assert s.makespan >= critical_path_bound(jobs[0], max(cs5.vms))


def test_deterministic(cs5):
    jobs = generate_jobs(5, 3)
    a = schedule_jobs(jobs, cs5, "ca")
    b = schedule_jobs(generate_jobs(5, 3), cs5, "ca")
    assert a.rows() == b.rows()


def test_oracle_small_cases(cs5):
    for seed in range(6):
        jobs = [j for j in generate_jobs(2, seed) if j.n_tasks <= 3]
        if len(jobs) < 2:
            continue
        M, sched = optimal_makespan(jobs, cs5)
        assert validate_schedule(sched, jobs, cs5) == []
        assert sched.makespan == M
        assert M <= schedule_jobs(jobs, cs5, "ca").makespan
    with pytest.raises(OracleTooLarge):
        optimal_makespan(generate_jobs(3, 0), cs5)


def test_job_file_round_trip(tmp_path):
    jobs = generate_jobs(4, 2)
    p = tmp_path / "jobs.yaml"
    p.write_text(dump_jobs(jobs))
    back = load_jobs(p)
    assert [(j.id, j.workloads, j.edges) for j in back] == [(j.id, j.workloads, j.edges) for j in jobs]


def test_horizon_grows():
    net = _single_node(1)
    jobs = [Job(i, (40,), {}) for i in range(3)]
    s = schedule_jobs(jobs, net, "ff")
    assert s.makespan == 120
    assert validate_schedule(s, jobs, net) == []
