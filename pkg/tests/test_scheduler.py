import pytest

from splitq import corpus
from splitq.cluster import (
    ClusterConfig,
    Coordinator,
    QueryArrival,
    RegisteredData,
    Simulation,
    WorkerCache,
    simulate,
)
from splitq.engine import QueryJob
from splitq.errors import ProtocolError, QuerySyntaxError
from splitq.store import generate_events

DATA = generate_events(4000, seed=55)
SRC = corpus.query_source("max_pt")
SPECS = {"max_pt": corpus.default_spec("max_pt")}


def make_coordinator(num_partitions=10, lease=5.0):
    coord = Coordinator(lease_timeout=lease)
    coord.register_dataset("dy", DATA, num_partitions)
    return coord


def arrivals(n, interval=0.05, dataset="dy", source=SRC, specs=SPECS):
    return [
        QueryArrival(time=round(i * interval, 9), source=source, dataset_id=dataset, specs=specs)
        for i in range(n)
    ]


# --- coordinator unit behavior -------------------------------------------------


def test_submit_advertises_one_subtask_per_partition():
    coord = make_coordinator(10)
    qid = coord.submit_query(SRC, "dy", SPECS, now=0.0)
    assert len(coord.board.advertised) == 10
    assert {k[0] for k in coord.board.advertised} == {qid}


def test_submit_malformed_query_is_synchronous_and_advertises_nothing():
    coord = make_coordinator()
    with pytest.raises(QuerySyntaxError):
        coord.submit_query("for event dataset:\n  x = 1\n", "dy", SPECS)
    assert len(coord.board.advertised) == 0


def test_submit_unknown_dataset():
    coord = make_coordinator()
    with pytest.raises(ProtocolError):
        coord.submit_query(SRC, "nope", SPECS)


def test_submit_partition_count_must_match_registration():
    coord = make_coordinator(10)
    with pytest.raises(ProtocolError):
        coord.submit_query(SRC, "dy", SPECS, num_partitions=4)
    qid = coord.submit_query(SRC, "dy", SPECS, num_partitions=10)
    assert coord.queries[qid].num_subtasks == 10


def test_two_queries_have_independent_subtasks():
    coord = make_coordinator(10)
    q1 = coord.submit_query(SRC, "dy", SPECS)
    q2 = coord.submit_query(SRC, "dy", SPECS)
    assert q1 != q2
    assert len(coord.board.advertised) == 20


def test_pull_prefers_cached_partition():
    coord = make_coordinator(4)
    coord.submit_query(SRC, "dy", SPECS)
    got = coord.pull_work("w0", {("dy", 2)}, allow_remote=True, now=0.0)
    assert got.partition_index == 2


def test_pull_local_only_returns_nothing_without_cache_hit():
    coord = make_coordinator(4)
    coord.submit_query(SRC, "dy", SPECS)
    assert coord.pull_work("w0", set(), allow_remote=False, now=0.0) is None
    got = coord.pull_work("w0", set(), allow_remote=True, now=0.0)
    assert got is not None and got.partition_index == 0  # FIFO order


def test_claim_is_atomic():
    coord = make_coordinator(1)
    coord.submit_query(SRC, "dy", SPECS)
    first = coord.pull_work("w0", {("dy", 0)}, allow_remote=True, now=0.0)
    second = coord.pull_work("w1", {("dy", 0)}, allow_remote=True, now=0.0)
    assert first is not None and second is None


def test_completion_dedup_first_accepted_wins():
    coord = make_coordinator(1, lease=1.0)
    qid = coord.submit_query(SRC, "dy", SPECS)
    sub = coord.pull_work("w0", set(), allow_remote=True, now=0.0)
    job = QueryJob.prepare(SRC, DATA.schema, SPECS)
    partials, _ = job.run(DATA, engine="flat")
    # w0's lease expires; the retry lands on w1, which finishes first
    assert coord.expire_leases(now=2.0) != []
    retry = coord.pull_work("w1", set(), allow_remote=True, now=2.0)
    assert retry.attempt == 1
    assert coord.complete_subtask("w1", qid, 0, retry.attempt, partials, now=3.0) == "accepted"
    assert coord.complete_subtask("w0", qid, 0, sub.attempt, partials, now=4.0) == "duplicate"
    merged, fraction = coord.aggregate(qid)
    assert fraction == 1.0
    whole, _ = job.run(DATA, engine="flat")
    assert merged == whole


def test_late_completion_after_expiry_but_before_retry_is_accepted():
    coord = make_coordinator(1, lease=1.0)
    qid = coord.submit_query(SRC, "dy", SPECS)
    sub = coord.pull_work("w0", set(), allow_remote=True, now=0.0)
    coord.expire_leases(now=2.0)
    assert coord.complete_subtask("w0", qid, 0, sub.attempt, {}, now=2.5) == "accepted"
    # the re-advertised copy is gone from the board
    assert len(coord.board.advertised) == 0


def test_unknown_subtask_completion_is_protocol_error():
    coord = make_coordinator(2)
    qid = coord.submit_query(SRC, "dy", SPECS)
    with pytest.raises(ProtocolError):
        coord.complete_subtask("w0", qid, 99, 0, {}, now=0.0)
    with pytest.raises(ProtocolError):
        coord.complete_subtask("w0", "q99999", 0, 0, {}, now=0.0)


def test_cancel_before_pull_removes_everything():
    coord = make_coordinator(5)
    qid = coord.submit_query(SRC, "dy", SPECS)
    coord.cancel_query(qid)
    assert len(coord.board.advertised) == 0
    assert coord.pull_work("w0", set(), allow_remote=True, now=0.0) is None
    coord.cancel_query(qid)  # idempotent


def test_cancelled_completion_discarded_and_resubmit_is_fresh():
    coord = make_coordinator(2)
    qid = coord.submit_query(SRC, "dy", SPECS)
    sub = coord.pull_work("w0", set(), allow_remote=True, now=0.0)
    coord.cancel_query(qid)
    assert coord.complete_subtask("w0", qid, sub.partition_index, 0, {"x": 1}, now=1.0) == "cancelled"
    merged, fraction = coord.aggregate(qid)
    assert fraction == 0.0 and all(h.num_fills == 0 for h in merged.values())

    qid2 = coord.submit_query(SRC, "dy", SPECS)
    assert qid2 != qid
    assert len(coord.board.advertised) == 2
    merged2, fraction2 = coord.aggregate(qid2)
    assert fraction2 == 0.0


def test_aggregate_fraction_progression():
    coord = make_coordinator(4)
    qid = coord.submit_query(SRC, "dy", SPECS)
    job = coord.queries[qid].job
    fractions = [coord.aggregate(qid)[1]]
    for i in range(4):
        sub = coord.pull_work("w0", set(), allow_remote=True, now=float(i))
        data = coord.datasets["dy"].slice_for(sub.partition_index)
        partials, _ = job.run(data, engine="flat")
        coord.complete_subtask("w0", qid, sub.partition_index, sub.attempt, partials, now=float(i))
        fractions.append(coord.aggregate(qid)[1])
    assert fractions == [0.0, 0.25, 0.5, 0.75, 1.0]
    merged, _ = coord.aggregate(qid)
    whole, _ = job.run(DATA, engine="flat")
    assert merged == whole


# --- worker cache ------------------------------------------------------------------


def test_cache_lru_eviction():
    cache = WorkerCache(100)
    assert cache.add(("d", 0), 40) == []
    assert cache.add(("d", 1), 40) == []
    assert cache.add(("d", 2), 40) == [("d", 0)]
    cache.touch(("d", 1))
    assert cache.add(("d", 3), 40) == [("d", 2)]
    assert cache.keys() == {("d", 1), ("d", 3)}
    assert cache.used_bytes == 80


def test_cache_oversized_item_still_loads():
    cache = WorkerCache(10)
    assert cache.add(("d", 0), 50) == []
    assert ("d", 0) in cache


# --- simulation behavior ---------------------------------------------------------------


def sim_config(**kw):
    base = dict(
        num_workers=4,
        cache_bytes=10**9,
        policy="two-round-pull",
        payload="real",
        round2_delay=0.2,
    )
    base.update(kw)
    return ClusterConfig(**base)


def test_cold_worker_claims_only_after_round2_delay():
    datasets = {"dy": RegisteredData(DATA, 1)}
    metrics = simulate(sim_config(num_workers=1), arrivals(1), datasets, seed=0)
    claims = [e for e in metrics.events if e["kind"] == "claim"]
    assert claims[0]["detail"] == "remote"
    assert claims[0]["t"] == pytest.approx(0.2)  # round-two delay, not zero


def test_warm_worker_claims_immediately():
    datasets = {"dy": RegisteredData(DATA, 1)}
    metrics = simulate(sim_config(num_workers=1), arrivals(2, interval=10.0), datasets, seed=0)
    claims = [e for e in metrics.events if e["kind"] == "claim"]
    assert claims[0]["detail"] == "remote"
    assert claims[1]["detail"] == "local"
    assert claims[1]["t"] == pytest.approx(10.0)  # second arrival claims with no delay


def test_first_query_cold_second_hits():
    datasets = {"dy": RegisteredData(DATA, 4)}
    metrics = simulate(sim_config(num_workers=1), arrivals(2, interval=30.0), datasets, seed=0)
    assert metrics.executed_subtasks == 8
    assert metrics.cache_hits == 4  # all of query two
    assert metrics.cache_hit_rate == 0.5


def test_simulation_deterministic_replay():
    datasets = {"dy": RegisteredData(DATA, 10)}
    cfg = sim_config(straggler_prob=0.2, straggler_factor=5.0)
    a = simulate(cfg, arrivals(10), datasets, seed=9)
    b = simulate(cfg, arrivals(10), datasets, seed=9)
    assert a.to_json_text() == b.to_json_text()
    assert a.events_csv() == b.events_csv()
    c = simulate(cfg, arrivals(10), datasets, seed=10)
    assert a.to_json_text() != c.to_json_text()


def test_delay_payload_mode_runs_without_data():
    datasets = {"synthetic": RegisteredData(None, 8, partition_bytes=1_000_000)}
    cfg = sim_config(payload="delay", num_workers=2)
    metrics = simulate(cfg, arrivals(5, dataset="synthetic"), datasets, seed=3)
    assert all(q["completed"] is not None for q in metrics.queries)
    assert metrics.executed_subtasks >= 40


def test_snapshot_fractions_monotonic_per_query():
    datasets = {"dy": RegisteredData(DATA, 10)}
    cfg = sim_config(aggregate_interval=0.05)
    metrics = simulate(cfg, arrivals(6), datasets, seed=2)
    per_query: dict[str, list[float]] = {}
    for e in metrics.events:
        if e["kind"] == "snapshot":
            frac = float(e["detail"].split(";")[0].split("=")[1])
            per_query.setdefault(e["query"], []).append(frac)
    assert per_query
    for qid, fracs in per_query.items():
        assert fracs == sorted(fracs), qid


def test_exactness_final_aggregate_equals_single_machine():
    datasets = {"dy": RegisteredData(DATA, 7)}
    job = QueryJob.prepare(SRC, DATA.schema, SPECS)
    whole, _ = job.run(DATA, engine="flat")
    for policy in ("two-round-pull", "round-robin-push", "least-busy-push", "any-pull-no-affinity"):
        metrics = simulate(sim_config(policy=policy), arrivals(5), datasets, seed=4)
        for qid, res in metrics.final_results.items():
            assert res["fraction_complete"] == 1.0, (policy, qid)
            assert res["histograms"]["max_pt"] == whole["max_pt"].to_json(), (policy, qid)


def test_straggler_lease_expiry_recovers():
    datasets = {"dy": RegisteredData(DATA, 6)}
    cfg = sim_config(
        num_workers=2,
        straggler_prob=0.3,
        straggler_factor=100.0,
        lease_timeout=0.1,
    )
    metrics = simulate(cfg, arrivals(4), datasets, seed=13)
    assert all(q["completed"] is not None for q in metrics.queries)
    expired = [e for e in metrics.events if e["kind"] == "lease-expired"]
    duplicates = [e for e in metrics.events if e["kind"] == "complete" and e["detail"] == "duplicate"]
    assert expired, "expected at least one lease expiry under heavy stragglers"
    assert len(duplicates) >= 0  # duplicates allowed, never double-counted
    accepted = [e for e in metrics.events if e["kind"] == "complete" and e["detail"] == "accepted"]
    assert len(accepted) == 4 * 6


def test_worker_death_liveness_and_exactness():
    datasets = {"dy": RegisteredData(DATA, 8)}
    cfg = sim_config(num_workers=3, lease_timeout=0.5, worker_death=(1, 0.05))
    metrics = simulate(cfg, arrivals(4, interval=0.02), datasets, seed=21)
    assert any(e["kind"] == "death" for e in metrics.events)
    assert all(q["completed"] is not None for q in metrics.queries)
    job = QueryJob.prepare(SRC, DATA.schema, SPECS)
    whole, _ = job.run(DATA, engine="flat")
    for res in metrics.final_results.values():
        assert res["histograms"]["max_pt"] == whole["max_pt"].to_json()


def brute_force_hit_rate(metrics) -> float:
    claims = [e for e in metrics.events if e["kind"] == "claim"]
    hits = sum(1 for e in claims if e["detail"] == "local")
    return hits / len(claims) if claims else 0.0


def test_hit_rate_matches_event_log():
    datasets = {"dy": RegisteredData(DATA, 10)}
    metrics = simulate(sim_config(), arrivals(20), datasets, seed=6)
    assert metrics.cache_hit_rate == pytest.approx(brute_force_hit_rate(metrics))


def test_two_round_pull_beats_round_robin_push_on_affinity():
    part_bytes = max(p.byte_size for p in make_coordinator(10).datasets["dy"].partitions)
    datasets = {"dy": RegisteredData(DATA, 10)}
    results = {}
    for policy in ("two-round-pull", "round-robin-push"):
        cfg = sim_config(policy=policy, cache_bytes=4 * part_bytes)
        results[policy] = simulate(cfg, arrivals(60), datasets, seed=1).cache_hit_rate
    assert results["two-round-pull"] > results["round-robin-push"] + 0.30


def test_elastic_scaling_hot_dataset():
    # Queries arrive faster than one worker can serve them; extra workers take
    # remote work after the round-two delay and start caching the hot
    # partitions, so replication grows and never shrinks.
    datasets = {"hot": RegisteredData(DATA, 2)}
    cfg = sim_config(num_workers=4, seconds_per_event=2e-5)
    metrics = simulate(cfg, arrivals(40, interval=0.01, dataset="hot"), datasets, seed=8)
    owners: set[str] = set()
    replication = []
    for e in metrics.events:
        if e["kind"] == "load":
            owners.add(e["worker"])
        if e["kind"] == "evict":
            owners.discard(e["worker"])
        replication.append(len(owners))
    assert all(b >= a for a, b in zip(replication, replication[1:]))
    assert max(replication) >= 3


def test_event_budget_guard():
    sim = Simulation(sim_config(), arrivals(1), {"dy": RegisteredData(DATA, 2)}, seed=0)
    sim.MAX_EVENTS = 3
    with pytest.raises(ProtocolError):
        sim.run()


# --- JSON config surfaces -------------------------------------------------------


def test_cluster_config_from_json_strict():
    cfg = ClusterConfig.from_json({"num_workers": 8, "policy": "least-busy-push"})
    assert cfg.num_workers == 8
    with pytest.raises(Exception) as err:
        ClusterConfig.from_json({"num_workerz": 8})
    assert "unknown cluster config keys" in str(err.value)
    with pytest.raises(Exception):
        ClusterConfig.from_json({"policy": "magic"})


def test_query_arrival_from_json_strict():
    q = QueryArrival.from_json(
        {"time": 1.5, "query": SRC, "dataset": "dy", "hists": ["max_pt:100:0:200"]}
    )
    assert q.time == 1.5 and "max_pt" in q.specs
    with pytest.raises(Exception) as err:
        QueryArrival.from_json({"time": 0, "query": SRC, "dataset": "dy", "bogus": 1})
    assert "unknown workload keys" in str(err.value)


def test_worker_death_config_validated():
    with pytest.raises(Exception):
        simulate(
            sim_config(num_workers=2, worker_death=(5, 0.1)),
            arrivals(1),
            {"dy": RegisteredData(DATA, 2)},
            seed=0,
        )
