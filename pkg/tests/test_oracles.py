import numpy as np
import pytest
from hypothesis import given, strategies as st

from kacbench.core import random_instance
from kacbench.oracles import (
    AccessPolicy, OracleSession, PolicyViolation, QueryLedger, ledger_report,
)


@pytest.fixture
def inst():
    return random_instance(6, 2, np.random.default_rng(0))


@pytest.mark.parametrize("spec,quantum", [
    ("q1", {"P1", "P2"}),
    ("q2", {"E", "P1", "P2"}),
    ("classical", set()),
    ("mixed:P1", {"P1"}),
    ("mixed:P1,P2", {"P1", "P2"}),
])
def test_policy_parse(spec, quantum):
    assert set(AccessPolicy.parse(spec, 2).quantum_set) == quantum


@pytest.mark.parametrize("spec", ["q3", "mixed:P5", "mixed:X"])
def test_policy_parse_rejects(spec):
    with pytest.raises(ValueError):
        AccessPolicy.parse(spec, 2)


def test_classical_batches_count_per_element(inst):
    s = OracleSession(inst, AccessPolicy.q1(2))
    out = s.E.query_classical("fwd", np.arange(10))
    assert np.array_equal(out, inst.encrypt(np.arange(10)))
    assert s.ledger.classical("E") == 10
    assert s.E.query_classical("inv", int(out[3])) == 3
    assert s.ledger.classical("E", "inv") == 1


def test_quantum_query_costs_one(inst):
    s = OracleSession(inst, AccessPolicy.q1(2))
    out = s.P[1].query_quantum("fwd", np.arange(64))
    assert np.array_equal(out, inst.perms[0].table)
    assert s.ledger.quantum("P1") == 1
    assert s.ledger.totals()["quantum"] == 1


@pytest.mark.parametrize("policy", ["q1", "classical", "mixed:P2"])
def test_quantum_cipher_query_is_a_violation(inst, policy):
    s = OracleSession(inst, AccessPolicy.parse(policy, 2))
    with pytest.raises(PolicyViolation):
        s.E.query_quantum("fwd", [0, 1])


def test_mixed_policy_routes_queries(inst):
    s = OracleSession(inst, AccessPolicy.mixed(2, ["P2"]))
    s.query_perm(1, "fwd", np.arange(4))
    s.query_perm(2, "fwd", np.arange(4))
    assert s.ledger.classical("P1") == 4 and s.ledger.quantum("P1") == 0
    assert s.ledger.classical("P2") == 0 and s.ledger.quantum("P2") == 1


def test_out_of_range_query_is_rejected(inst):
    s = OracleSession(inst, AccessPolicy.q2(2))
    with pytest.raises(ValueError):
        s.E.query_classical("fwd", 64)
    assert s.ledger.totals()["total"] == 0


@given(ops=st.lists(st.tuples(st.sampled_from(["E", "P1", "P2"]),
                              st.sampled_from(["fwd", "inv"]),
                              st.sampled_from(["classical", "quantum"]),
                              st.integers(0, 5)), max_size=30))
def test_ledger_totals_are_sums(ops):
    led = QueryLedger.for_rounds(2)
    for o, d, kind, amount in ops:
        led.record(o, d, kind, amount)
    tot = led.totals()
    assert tot["classical"] == sum(a for _, _, k, a in ops if k == "classical")
    assert tot["quantum"] == sum(a for _, _, k, a in ops if k == "quantum")
    assert tot["total"] == tot["classical"] + tot["quantum"]
    assert sum(v["classical"] + v["quantum"] for v in tot["per_oracle"].values()) == tot["total"]


def test_ledger_rejects_negative():
    with pytest.raises(ValueError):
        QueryLedger.for_rounds(1).record("E", "fwd", "classical", -1)


def test_ledger_report_merges():
    a, b = QueryLedger.for_rounds(1), QueryLedger.for_rounds(1)
    a.record("E", "fwd", "classical", 3)
    b.record("P1", "inv", "quantum", 2)
    merged, totals = ledger_report([a, b])
    assert totals["classical"] == 3 and totals["quantum"] == 2
    assert merged.quantum("P1", "inv") == 2
    with pytest.raises(ValueError):
        ledger_report([a, QueryLedger.for_rounds(2)])
    assert ledger_report([])[1]["total"] == 0


def test_snapshot_is_frozen(inst):
    s = OracleSession(inst, AccessPolicy.q1(2))
    snap = s.ledger.snapshot()
    s.E.query_classical("fwd", 1)
    assert snap != s.ledger.snapshot()
    assert s.ledger.copy().totals() == s.ledger.totals()
