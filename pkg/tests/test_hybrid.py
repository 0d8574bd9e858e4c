import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _oracles import dense_pure_overlap, dense_reduced_trace_distance, dense_state
from kacbench.hybrid import (
    WORLDS, AdversaryScript, SupportExplosion, advantage_bound_squared, advantage_bounds,
    build_joint_state, certificate, collision_probability_bound, collision_rate,
    compute_reprogram_targets, coupled_real_p2, encrypt2, flag_function, h1h2_bound, overlap,
    pure_pair_distance, q2_term_squared, reprogram_permutation, run_hybrid_trials,
    sample_hybrid, sum_capture_expectation, trace_distance,
)


def _dense(world, script, s):
    q = lambda qs: [list(zip(a.support.tolist(), a.amps.tolist())) for a in qs]
    return dense_state(world, script.n, list(script.x_list), q(script.p1), q(script.p2),
                       s.keys, s.P1, s.P2, s.R)


@pytest.mark.parametrize("n,q_E,q1,q2,support", [
    (3, 1, 1, 1, 8), (3, 2, 1, 1, 8), (3, 2, 2, 1, 4), (3, 1, 1, 2, 5), (4, 3, 1, 1, 6),
])
def test_states_match_dense_oracle(n, q_E, q1, q2, support):
    rng = np.random.default_rng(n * 100 + q_E * 10 + q1 + q2)
    for _ in range(6):
        script = AdversaryScript.random(n, q_E, q1, q2, support, rng)
        s = sample_hybrid(n, rng)
        states = {w: build_joint_state(w, script, s) for w in WORLDS}
        dense = {w: _dense(w, script, s) for w in WORLDS}
        for a, b in [("H1", "H2"), ("H0", "H1"), ("H0", "H2")]:
            for keep, mode in [(True, "full"), (False, "adversary")]:
                want = dense_pure_overlap(dense[a], dense[b], keep)
                assert abs(overlap(states[a], states[b], mode) - want) < 1e-12
            want = dense_reduced_trace_distance(dense[a], dense[b])
            assert trace_distance(states[a], states[b], "reduced") == pytest.approx(want, abs=1e-9)


@given(seed=st.integers(0, 2**32 - 1))
def test_trace_distances_are_metrics(seed):
    rng = np.random.default_rng(seed)
    script = AdversaryScript.random(4, 2, 1, 1, 5, rng)
    s = sample_hybrid(4, rng)
    st_ = {w: build_joint_state(w, script, s) for w in WORLDS}
    for mode in ("full", "adversary", "reduced"):
        for w in WORLDS:
            assert trace_distance(st_[w], st_[w], mode) == pytest.approx(0, abs=1e-7)
        d = [trace_distance(st_["H0"], st_["H1"], mode), trace_distance(st_["H1"], st_["H2"], mode),
             trace_distance(st_["H0"], st_["H2"], mode)]
        assert all(-1e-12 <= v <= 1 + 1e-12 for v in d)
        assert d[2] <= d[0] + d[1] + 1e-7
    # discarding the register never increases distance
    assert (trace_distance(st_["H1"], st_["H2"], "reduced")
            <= trace_distance(st_["H1"], st_["H2"], "full") + 1e-9)


@given(seed=st.integers(0, 2**32 - 1), q_E=st.integers(1, 6))
def test_reprogramming_is_a_bijection(seed, q_E):
    rng = np.random.default_rng(seed)
    s = sample_hybrid(6, rng)
    xs = rng.choice(64, size=q_E, replace=False)
    rec = compute_reprogram_targets(s.keys, s.P1, s.P2, s.R, xs)
    flags = rng.random(q_E) < 0.5
    p = reprogram_permutation(s.P2, rec.swaps, flags)
    assert sorted(p.table.tolist()) == list(range(64))


@given(seed=st.integers(0, 2**32 - 1), q_E=st.integers(1, 6))
def test_collision_free_swaps_make_cipher_match_R(seed, q_E):
    rng = np.random.default_rng(seed)
    s = sample_hybrid(6, rng)
    xs = rng.choice(64, size=q_E, replace=False)
    rec = compute_reprogram_targets(s.keys, s.P1, s.P2, s.R, xs)
    if rec.collision:
        return
    p2s = coupled_real_p2(s, rec)
    assert np.array_equal(p2s[rec.X], s.R[xs] ^ s.keys[2])
    assert np.array_equal(encrypt2(s.keys, s.P1, p2s, xs), s.R[xs])


def test_flag_function():
    # targets x ^ k0 = [7, 4, 1]
    assert flag_function([4, 5], [1, 2, 7], 6).tolist() == [False, True, False]


def test_script_validation():
    with pytest.raises(ValueError):
        AdversaryScript(3, (1, 1), (), ())
    with pytest.raises(ValueError):
        AdversaryScript(3, (1,), (AdversaryScript.query([0, 1], [1, 1]),), ())
    with pytest.raises(ValueError):
        AdversaryScript(3, (9,), (), ())
    big = AdversaryScript.uniform(12, [0], q1=2, q2=1)
    with pytest.raises(SupportExplosion):
        big.branches()


def test_single_query_uniform_distance():
    """One uniform query to each permutation: the H1/H2 adversary-view distance is tiny."""
    rng = np.random.default_rng(0)
    script = AdversaryScript.uniform(6, [5])
    for _ in range(20):
        s = sample_hybrid(6, rng)
        h1, h2 = (build_joint_state(w, script, s) for w in ("H1", "H2"))
        rec = compute_reprogram_targets(s.keys, s.P1, s.P2, s.R, [5])
        differs = rec.swaps[0][0] != rec.swaps[0][1]
        d = trace_distance(h1, h2, "adversary")
        p = (2 if differs else 0) / 64 * (1 / 64)
        # only the branch a = x ^ k0 (prob 1/64) changes P2, on 2 points of 64
        assert d == pytest.approx(pure_pair_distance(p), abs=1e-9)


def test_certificate_uses_probability_mass():
    script = AdversaryScript.uniform(4, [1], q1=1, q2=2)
    assert certificate(script, [0, 1]) == pytest.approx(math.sqrt(2) * 2 * math.sqrt(2 / 16))


def test_trial_report(rng):
    rep = run_hybrid_trials(AdversaryScript.uniform(5, [3]), 20, rng)
    assert rep["samples"] == 20
    assert rep["certificate_violations"] == 0
    assert rep["no_collision_consistency_failures"] == 0
    assert rep["bound_h1h2"] == h1h2_bound(5, 1, 1, 1) == 2 / 32
    with pytest.raises(ValueError):
        run_hybrid_trials(AdversaryScript.uniform(5, [3]), 0, rng)


def test_collision_rate_small():
    rep = collision_rate(6, 4, 3000, np.random.default_rng(1))
    assert rep["consistency_failures"] == 0
    assert rep["p_coll_empirical"] <= rep["p_coll_formula"] + 3 * rep["sigma"]
    assert collision_probability_bound(4, 8) == 1.0


@pytest.mark.parametrize("sizes,n", [([4, 4], 3), ([3, 5, 2], 4), ([16, 16], 6)])
def test_sum_capture_mean(sizes, n):
    rep = sum_capture_expectation(sizes, n, 1, 1500, np.random.default_rng(sum(sizes)))
    assert abs(rep["empirical_mean"] - rep["expected"]) < 4 * rep["stderr"] + 1e-12


def test_sum_capture_full_sets_are_exact():
    rep = sum_capture_expectation([8, 8], 3, 5, 5, np.random.default_rng(0))
    assert rep["empirical_mean"] == rep["expected"] == 8


# advantage bound calculators -------------------------------------------------

@pytest.mark.parametrize("n", [6, 9, 12, 24, 48])
def test_even_mansour_bound_constant(n):
    q = 2 ** (n / 3)
    assert advantage_bounds(1, n, q, [q]) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("n", [8, 16, 24, 40])
def test_q2_two_round_bound_constant(n):
    q = 2 ** (n / 4)
    assert advantage_bounds(2, n, q, [q, q], "Q2") == pytest.approx(4.0, rel=1e-12)


@given(t=st.integers(1, 4), n=st.integers(2, 16), data=st.data())
def test_lifted_cipher_equals_q2_term(t, n, data):
    q = data.draw(st.lists(st.integers(1, 64), min_size=t, max_size=t))
    q_E = data.draw(st.integers(1, 64))
    lifted = advantage_bound_squared(t, n, q_E, q, "lifted:E")
    assert lifted == advantage_bound_squared(t, n, 2 ** n, q, "Q1")
    assert lifted == q2_term_squared(t, n, [q_E] + q, 0)
    assert advantage_bounds(t, n, q_E, q, "lifted:E") == pytest.approx(float(lifted) ** 0.5)


@given(t=st.integers(1, 4), n=st.integers(2, 16), data=st.data())
def test_q2_is_minimum_of_terms(t, n, data):
    q = data.draw(st.lists(st.integers(1, 64), min_size=t + 1, max_size=t + 1))
    sq = advantage_bound_squared(t, n, q[0], q[1:], "Q2")
    assert sq == min(q2_term_squared(t, n, q, i) for i in range(t + 1))
    assert isinstance(sq, Fraction)


@pytest.mark.parametrize("model", ["Q3", "lifted:P9", "lifted:X"])
def test_bad_model(model):
    with pytest.raises(ValueError):
        advantage_bounds(2, 8, 1, [1, 1], model)


def test_zero_queries_give_zero():
    assert advantage_bounds(2, 8, 0, [4, 4]) == 0.0
    with pytest.raises(ValueError):
        advantage_bounds(2, 8, 1, [1])
