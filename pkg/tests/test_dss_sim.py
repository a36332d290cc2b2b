import itertools
import json

import numpy as np
import pytest

from msrsec.dss_sim import (
    EveLog,
    UnsupportedScenarioError,
    attempt_decode,
    collect,
    eve_accumulate,
    eve_recover,
    events_jsonl,
    fail_and_repair,
    observed_pattern,
    scenario_fig1,
    store,
)
from msrsec.secrecy import EavesdropperPattern as P, PatternError, gabidulin_precoder, perfect_secrecy_check


@pytest.fixture
def pre423(tower423):
    return gabidulin_precoder(8, 2, tower423)


def test_zero_store_is_zero(code423, pre423):
    state = store(code423, pre423, [0, 0], keys=np.zeros(6, dtype=np.int64))
    assert all(not n.any() for n in state.node_contents)
    ev = fail_and_repair(state, 1)
    assert all(not t.any() for t in ev.transcripts.values())
    assert not ev.restored.any()


def test_store_is_deterministic(code423, pre423):
    a = store(code423, pre423, [1, 2], seed=7)
    b = store(code423, pre423, [1, 2], seed=7)
    c = store(code423, pre423, [1, 2], seed=8)
    assert a.digest() == b.digest() != c.digest()


def test_store_size_mismatch(code423, pre423):
    with pytest.raises(ValueError):
        store(code423, pre423, [1, 2, 3])


def test_collect_every_subset(code423, pre423):
    secret = [123, 45678]
    state = store(code423, pre423, secret, seed=1)
    for A in itertools.combinations(range(1, 5), 2):
        assert collect(state, A).tolist() == secret
    with pytest.raises(ValueError):
        collect(state, [1])


def test_repair_restores_and_counts_download(code423, pre423):
    state = store(code423, pre423, [9, 9], seed=2)
    before = state.digest()
    for i in (1, 2):
        lost = state.node_contents[i - 1].copy()
        ev = fail_and_repair(state, i)
        assert np.array_equal(ev.restored, lost)
        assert ev.download == 6
        assert state.digest() == before
    assert state.generation == 2
    assert state.check_invariant()


def test_parity_failure_unsupported(code423, pre423):
    state = store(code423, pre423, [1, 1])
    with pytest.raises(UnsupportedScenarioError):
        fail_and_repair(state, 3)


def test_repair_sequences_keep_invariant(code534, tower534):
    pre = gabidulin_precoder(24, 4, tower534)
    secret = [1, 2, 3, 4]
    state = store(code534, pre, secret, seed=3)
    start = state.digest()
    rng = np.random.default_rng(0)
    for i in rng.integers(1, 4, size=12):
        fail_and_repair(state, int(i))
        assert state.digest() == start
        A = sorted(rng.choice(np.arange(1, 6), size=3, replace=False).tolist())
        assert collect(state, A).tolist() == secret


def test_eve_log_empty_leaks_nothing(code423, pre423):
    assert attempt_decode(EveLog(P(), pre423), code423) == 0


def test_eve_repair_observation_secure_at_capacity(code423, pre423):
    state = store(code423, pre423, [5, 6], seed=4)
    log = EveLog(P([], [1]), pre423)
    ev = fail_and_repair(state, 1)
    eve_accumulate(state, log, [ev])
    assert attempt_decode(log, code423) == 0
    assert log.consistent_with(state)
    assert eve_recover(log, code423) is None
    with pytest.raises(PatternError):
        eve_accumulate(state, log, [fail_and_repair(state, 2)])


def test_attempt_decode_monotone_and_matches_check(code423, tower423):
    pre = gabidulin_precoder(8, 4, tower423)
    state = store(code423, pre, [1, 2, 3, 4], seed=5)
    pattern = P([], [1])
    log = EveLog(pattern, pre)
    ev = fail_and_repair(state, 1)
    leaks = [attempt_decode(log, code423)]
    for h in ev.helpers:
        partial = type(ev)(ev.failed, (h,), {h: ev.transcripts[h]}, ev.restored, ev.generation)
        eve_accumulate(state, log, [partial])
        leaks.append(attempt_decode(log, code423))
    assert leaks == sorted(leaks)
    assert (leaks[-1] == 0) == perfect_secrecy_check(code423, pre, pattern)
    assert leaks[-1] == 2 * 8
    assert observed_pattern(log) == pattern


@pytest.mark.parametrize("ms,leak", [(2, 0), (4, 2 * 24)])
def test_event_order_does_not_change_view(code534, tower534, ms, leak):
    pre = gabidulin_precoder(24, ms, tower534)
    pattern = P([], [1, 2])
    leaks = []
    for order in ((1, 2), (2, 1), (1, 2, 1)):
        state = store(code534, pre, [7] * ms, seed=6)
        log = EveLog(pattern, pre)
        for i in order:
            eve_accumulate(state, log, [fail_and_repair(state, i)])
        leaks.append(attempt_decode(log, code534))
    assert leaks == [leak] * 3


def test_events_jsonl(code423, pre423):
    state = store(code423, pre423, [1, 2], seed=0)
    ev = fail_and_repair(state, 2)
    line = json.loads(events_jsonl([ev]))
    assert line["type"] == "repair" and line["node"] == 2
    assert line["helpers"] == [1, 3, 4]
    assert set(line["transcript_digests"]) == {"1", "3", "4"}


def test_scenario_fig1():
    report = scenario_fig1()
    assert report.stored_only == {1: 0, 2: 0, 3: 0}
    assert report.repair_leak == 1
    assert report.recovered == 1
    again = scenario_fig1(secret=2, key=0)
    assert again.recovered == 2
    assert json.loads(json.dumps(report.to_dict()))["repair_node1_leaked"] == 1
