import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _oracles import statevector_grover
from kacbench.core import KeyDistribution, random_instance
from kacbench.grover import (
    MeteredView, PredicateOracle, TableView, attack_first_last_equal, attack_repeated_keys,
    attack_same_key, encrypt_with, first_last_predicate, grover_iterations, grover_run,
    grover_success_probability, predicate_for, repeated_key_predicate, same_key_predicate,
    trace_distinct_key,
)
from kacbench.oracles import AccessPolicy, OracleSession


def marked_predicate(n, marked):
    marked = np.array(sorted(marked))
    return PredicateOracle(n, lambda view, xs: np.isin(xs, marked), "fixed")


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("M", [1, 2, 4])
def test_engine_matches_statevector(n, M):
    N = 1 << n
    if M > N:
        pytest.skip("more marked items than the domain")
    rng = np.random.default_rng(n * 10 + M)
    marked = rng.choice(N, size=M, replace=False).tolist()
    pred = marked_predicate(n, marked)
    for m in range(0, grover_iterations(N, M) + 4):
        rep = grover_run(pred, rng, m, table_view=object())
        assert abs(rep.success_prob - statevector_grover(N, marked, m)) < 1e-9


@given(n=st.integers(2, 12), data=st.data())
def test_auto_iterations_near_optimal(n, data):
    N = 1 << n
    M = data.draw(st.integers(1, max(1, N // 8)))
    m = grover_iterations(N, M)
    assert m == math.floor(math.pi / 4 * math.sqrt(N / M))
    assert grover_success_probability(N, M, m) >= 1 - M / N - 1e-12


def test_zero_marked_items():
    pred = marked_predicate(4, [])
    rep = grover_run(pred, np.random.default_rng(0), table_view=object())
    assert rep.iterations == 0 and rep.outcome is None and rep.success_prob == 0


def test_negative_iterations_rejected():
    with pytest.raises(ValueError):
        grover_run(marked_predicate(3, [1]), np.random.default_rng(0), -1, table_view=object())


def test_outcome_frequency_matches_probability():
    pred = marked_predicate(6, [5, 9])
    rng = np.random.default_rng(3)
    reps = [grover_run(pred, rng, 2, table_view=object()) for _ in range(4000)]
    p = reps[0].success_prob
    hits = sum(r.outcome_marked for r in reps)
    assert abs(hits / 4000 - p) < 4 * math.sqrt(p * (1 - p) / 4000)
    assert all((r.outcome in (5, 9)) == r.outcome_marked for r in reps)


def test_metered_iterations_cost_predicate_queries():
    inst = random_instance(6, 3, np.random.default_rng(1), KeyDistribution.all_equal())
    session = OracleSession(inst, AccessPolicy.q1(3))
    y = inst.encrypt(7)
    pred = PredicateOracle(6, same_key_predicate(3, 7, y))
    rep = grover_run(pred, np.random.default_rng(2), "auto", session)
    assert session.ledger.quantum("P1") == rep.iterations
    assert session.ledger.totals()["quantum"] == 3 * rep.iterations
    assert session.ledger.totals()["classical"] == 0


@given(seed=st.integers(0, 2**32 - 1))
def test_same_key_predicate_marks_true_key(seed):
    inst = random_instance(6, 3, np.random.default_rng(seed), KeyDistribution.all_equal())
    x = seed % 64
    marked = PredicateOracle(6, same_key_predicate(3, x, inst.encrypt(x))).evaluate(
        TableView(inst))
    assert marked[inst.keys[0]]


@given(seed=st.integers(0, 2**32 - 1))
def test_first_last_predicate_marks_true_key(seed):
    inst = random_instance(6, 2, np.random.default_rng(seed), KeyDistribution.first_last_equal())
    x1, x2 = 3, 40
    pred = first_last_predicate(x1, inst.encrypt(x1), x2, inst.encrypt(x2))
    assert PredicateOracle(6, pred).evaluate(TableView(inst))[inst.keys[0]]


@pytest.mark.parametrize("t,j", [(2, 0), (2, 1), (2, 2), (3, 1), (3, 3), (4, 2)])
def test_trace_recovers_distinct_key(t, j):
    inst = random_instance(6, t, np.random.default_rng(t * 7 + j),
                           KeyDistribution.repeated_except(j))
    k_star = inst.keys[(j + 1) % (t + 1)]
    view = TableView(inst)
    kj = trace_distinct_key(view, np.int64(k_star), t, j, 9, inst.encrypt(9))
    assert int(kj) == inst.keys[j]
    pred = repeated_key_predicate(t, j, 9, inst.encrypt(9), 21, inst.encrypt(21))
    assert PredicateOracle(6, pred).evaluate(view)[k_star]


def test_encrypt_with_matches_instance(rng):
    inst = random_instance(5, 3, rng)
    keys = [np.full(32, k) for k in inst.keys]
    assert np.array_equal(encrypt_with(TableView(inst), keys, 3, np.arange(32)),
                          inst.codebook())


def test_metered_view_counts(rng):
    inst = random_instance(5, 2, rng)
    s = OracleSession(inst, AccessPolicy.q1(2))
    MeteredView(s).P(2, "inv", np.arange(32))
    assert s.ledger.quantum("P2", "inv") == 1


@pytest.mark.parametrize("attack,dist,t,e_queries,cost", [
    (attack_same_key, KeyDistribution.all_equal(), 3, 2, 3),
    (attack_first_last_equal, KeyDistribution.first_last_equal(), 2, 3, 4),
    (attack_repeated_keys, KeyDistribution.repeated_except(1), 3, 3, 6),
])
def test_attack_ledgers(attack, dist, t, e_queries, cost):
    rng = np.random.default_rng(5)
    for _ in range(5):
        inst = random_instance(8, t, rng, dist)
        r = attack(inst, rng)
        led = r["ledger"]
        assert led.quantum("E") == 0
        assert led.classical("E") == e_queries
        assert led.totals()["quantum"] == cost * r["iterations"]
        assert sum(led.classical(f"P{i}") for i in range(1, t + 1)) == 0
        if r["success"]:
            assert r["keys"] == list(inst.keys)


@pytest.mark.parametrize("attack,dist", [
    (attack_same_key, KeyDistribution.independent()),
    (attack_first_last_equal, KeyDistribution.all_equal()),
    (attack_repeated_keys, KeyDistribution.all_equal()),
])
def test_attacks_check_distribution(attack, dist, rng):
    with pytest.raises(ValueError):
        attack(random_instance(6, 2, rng, dist), rng)


def test_retry_budget_is_respected(rng):
    inst = random_instance(6, 2, rng, KeyDistribution.all_equal())
    r = attack_same_key(inst, rng, iterations=0, max_runs=3)
    assert r["runs"] <= 3 and r["iterations"] == 0
    with pytest.raises(ValueError):
        attack_same_key(inst, rng, max_runs=0)


def test_predicate_for_dispatch(rng):
    inst = random_instance(5, 2, rng, KeyDistribution.first_last_equal())
    pairs = [(1, inst.encrypt(1)), (2, inst.encrypt(2))]
    assert predicate_for(inst, pairs).evaluate(TableView(inst))[inst.keys[0]]
    with pytest.raises(ValueError):
        predicate_for(random_instance(5, 2, rng), pairs)
