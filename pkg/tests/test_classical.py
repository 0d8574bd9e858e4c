import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _oracles import brute_candidates
from kacbench.classical import (
    InfeasibleSets, SampleSets, balanced_sizes, count_true_chains, generate_key_candidates,
    plant_true_chains, result_record, run_classical_attack, sample_input_sets, true_chain,
)
from kacbench.core import KeyDistribution, random_instance
from kacbench.oracles import AccessPolicy, OracleSession


@given(n=st.integers(3, 10), t=st.integers(1, 3), beta=st.floats(2, 8))
def test_balanced_sizes_cover_target(n, t, beta):
    beta = max(beta, t + 1)
    sizes = balanced_sizes(n, t, beta)
    target = beta * 2.0 ** (t * n)
    assert math.prod(sizes) >= target
    assert max(sizes) - min(sizes) <= 1
    # minimal: dropping any one element falls below the target
    i = sizes.index(max(sizes))
    smaller = sizes[:i] + [sizes[i] - 1] + sizes[i + 1:]
    assert math.prod(smaller) < target


def test_balanced_profile_at_desk_size():
    sizes = balanced_sizes(8, 2, 3)
    assert sizes == [58, 58, 59] or math.prod(sizes) >= 3 * 2**16
    assert abs(sizes[0] - (3 * 2**16) ** (1 / 3)) < 1.5


@pytest.mark.parametrize("beta,sizes", [(2, None), (3, [10, 10]), (3, [100, 100, 100]), (300, None)])
def test_infeasible_sets(beta, sizes, rng):
    with pytest.raises(InfeasibleSets):
        sample_input_sets(4, 2, beta, rng, sizes)


def test_sets_are_distinct_and_sorted(rng):
    s = sample_input_sets(6, 2, 3, rng)
    for a in s.sets:
        assert np.all(np.diff(a) > 0)
    assert s.tuple_count >= 3 * 2**12


def test_candidates_match_definition(rng):
    inst = random_instance(4, 2, rng)
    sets = SampleSets(4, 3.0, tuple(np.sort(rng.choice(16, size=7, replace=False))
                                    for _ in range(3)))
    session = OracleSession(inst, AccessPolicy.classical(2))
    cands = generate_key_candidates(sets, session)
    images = [inst.encrypt(sets[0])] + [inst.perms[i - 1].table[sets[i]] for i in (1, 2)]
    brute = brute_candidates(list(sets.sets), images, 4)
    assert cands.histogram() == {m: list(brute.values()).count(m) for m in set(brute.values())}
    assert cands.count_of(inst.keys) == brute[tuple(inst.keys)]
    assert cands.count_of(inst.keys) == count_true_chains(inst, sets)
    assert session.ledger.totals()["total"] == 21


def test_true_chain_generates_true_key(rng):
    inst = random_instance(5, 3, rng)
    xs = true_chain(inst, 11)
    assert xs[0] ^ xs[1] == inst.keys[0]
    for i in range(1, 3):
        assert int(inst.perms[i - 1].table[xs[i]]) ^ xs[i + 1] == inst.keys[i]
    assert int(inst.perms[2].table[xs[3]]) ^ inst.encrypt(xs[0]) == inst.keys[3]


def test_planted_chains_force_recovery():
    rng = np.random.default_rng(2)
    inst = random_instance(6, 2, rng)
    sets = plant_true_chains(inst, sample_input_sets(6, 2, 3, rng), 5, rng)
    assert count_true_chains(inst, sets) >= 5


def test_attack_record_shape(rng):
    inst = random_instance(6, 2, rng)
    r = run_classical_attack(inst, 3, rng)
    rec = result_record(r)
    assert {"success", "guessed_key", "true_key", "multiplicities_histogram",
            "ledger"} <= set(rec)
    led = rec["ledger"]["totals"]
    assert led["quantum"] == 0 and led["classical"] == sum(r["set_sizes"])
    assert all(isinstance(k, str) for k in rec["multiplicities_histogram"])


def test_attack_needs_independent_keys(rng):
    inst = random_instance(6, 2, rng, KeyDistribution.all_equal())
    with pytest.raises(ValueError):
        run_classical_attack(inst, 3, rng)


def test_selection_is_uniform_over_heavy_candidates():
    """With many heavy candidates the pick is close to uniform (chi-square)."""
    from scipy.stats import chisquare

    from kacbench.classical import select_candidate
    from kacbench.kernels import CandidateMultiset

    packed = np.arange(6, dtype=np.uint64)
    ms = CandidateMultiset(1, 4, packed, np.array([3, 2, 5, 2, 7, 4]))
    rng = np.random.default_rng(0)
    picks = [select_candidate(ms, rng) for _ in range(3000)]
    heavy = ms.at_least(2)
    freq = [picks.count(k) for k in heavy]
    assert sum(freq) == 3000
    assert chisquare(freq).pvalue > 1e-3


def test_selection_empty_pool():
    from kacbench.classical import select_candidate
    from kacbench.kernels import CandidateMultiset

    ms = CandidateMultiset(2, 4, np.arange(3, dtype=np.uint64), np.ones(3, dtype=np.int64))
    assert select_candidate(ms, np.random.default_rng(0)) is None


@pytest.mark.parametrize("backend", ["python", None])
def test_seeded_attack_is_deterministic(backend):
    inst = random_instance(6, 2, np.random.default_rng(1))
    a = run_classical_attack(inst, 3, np.random.default_rng(8), backend=backend)
    b = run_classical_attack(inst, 3, np.random.default_rng(8), backend=backend)
    assert a["guessed_key"] == b["guessed_key"]
    assert a["multiplicities_histogram"] == b["multiplicities_histogram"]


def test_expected_heavy_wrong_candidates_match_poisson():
    """Wrong candidates behave like Poisson(beta) counts over a 2^((t+1)n) key space.

    The mean number of wrong candidates reaching t+1 is then about
    2^((t+1)n) * P[Poisson(beta / 2^n) >= t+1]; at n=6, beta=3 that is ~4.5.
    """
    n, t, beta, trials = 6, 2, 3, 60
    rng = np.random.default_rng(11)
    heavy_wrong = []
    for _ in range(trials):
        inst = random_instance(n, t, rng)
        sets = sample_input_sets(n, t, beta, rng)
        cands = generate_key_candidates(sets, OracleSession(inst, AccessPolicy.classical(t)))
        heavy_wrong.append(sum(k != tuple(inst.keys) for k in cands.at_least(t + 1)))
    lam = sets.tuple_count / 2.0 ** ((t + 1) * n)
    tail = 1 - sum(math.exp(-lam) * lam**k / math.factorial(k) for k in range(t + 1))
    predicted = 2.0 ** ((t + 1) * n) * tail
    assert abs(np.mean(heavy_wrong) - predicted) < 4 * np.std(heavy_wrong) / math.sqrt(trials) + 0.3
