"""Grover key search for KAC variants with repeated round keys.

Grover dynamics are emulated exactly in the two-dimensional span of the
marked and unmarked uniform states: after m iterations the success
probability is sin^2((2m+1) theta) with sin^2 theta = |M|/N.  The marked
set comes from one exhaustive pass over the predicate that reads the
permutation tables directly and is never charged to the attack.  Every
iteration evaluates the predicate once through the metered oracles, so
each permutation call inside the predicate costs one quantum query.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import KacInstance, KeyDistKind
from .oracles import AccessPolicy, OracleSession


class TableView:
    """Direct permutation access for the unmetered marked-set pass."""

    def __init__(self, inst: KacInstance):
        self.inst = inst

    def P(self, i: int, direction: str, xs):
        p = self.inst.perms[i - 1]
        return p.table[xs] if direction == "fwd" else p.inverse_table[xs]


class MeteredView:
    """Permutation access through a session: one quantum query per call."""

    def __init__(self, session: OracleSession):
        self.session = session

    def P(self, i: int, direction: str, xs):
        return self.session.P[i].query_quantum(direction, xs)


@dataclass
class PredicateOracle:
    """Boolean function on n-bit candidates evaluated through a permutation view."""

    n: int
    fn: Callable
    name: str = "f"

    @property
    def N(self) -> int:
        return 1 << self.n

    def evaluate(self, view, candidates=None) -> np.ndarray:
        xs = np.arange(self.N, dtype=np.int64) if candidates is None else np.asarray(candidates)
        return np.asarray(self.fn(view, xs), dtype=bool)


@dataclass
class GroverReport:
    iterations: int
    marked_count: int
    N: int
    theta: float
    success_prob: float
    outcome: int | None
    outcome_marked: bool
    marked: np.ndarray
    verification_evaluations: int

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "marked_count": self.marked_count,
            "N": self.N,
            "theta": self.theta,
            "success_prob": self.success_prob,
            "outcome": self.outcome,
            "outcome_marked": self.outcome_marked,
            "verification_evaluations": self.verification_evaluations,
        }


def grover_iterations(N: int, M: int) -> int:
    """floor(pi/4 * sqrt(N/M)) for M >= 1, else 0."""
    if M <= 0:
        return 0
    theta = math.asin(math.sqrt(M / N))
    if theta >= math.pi / 2 - 1e-15:
        return 0
    return int(math.floor(math.pi / 4 * math.sqrt(N / M)))


def grover_success_probability(N: int, M: int, m: int) -> float:
    if M <= 0:
        return 0.0
    theta = math.asin(math.sqrt(M / N))
    return math.sin((2 * m + 1) * theta) ** 2


def grover_run(pred: PredicateOracle, rng: np.random.Generator, iterations="auto",
               session: OracleSession | None = None, table_view=None) -> GroverReport:
    """Run the emulated search.

    ``table_view`` answers the unmetered marked-set pass.  With a ``session``
    each iteration evaluates the predicate once through metered oracles.
    """
    N = pred.N
    if N & (N - 1):
        raise ValueError("domain size must be a power of two")
    view = table_view if table_view is not None else (
        TableView(session.inst) if session is not None else None)
    if view is None:
        raise ValueError("need a table view or a session for the marked-set pass")
    marked = np.flatnonzero(pred.evaluate(view))
    M = len(marked)
    if iterations == "auto":
        m = grover_iterations(N, M)
    else:
        m = int(iterations)
        if m < 0:
            raise ValueError("iteration count must be non-negative")
    if M == 0:
        m = 0 if iterations == "auto" else m
    if session is not None:
        metered = MeteredView(session)
        for _ in range(m):
            pred.evaluate(metered)
    theta = math.asin(math.sqrt(M / N)) if M else 0.0
    p = grover_success_probability(N, M, m)
    outcome, hit = None, False
    if M:
        hit = bool(rng.random() < p)
        if hit:
            outcome = int(marked[rng.integers(M)])
        else:
            unmarked = np.setdiff1d(np.arange(N), marked, assume_unique=True)
            outcome = int(unmarked[rng.integers(len(unmarked))]) if len(unmarked) else None
    return GroverReport(m, M, N, theta, p, outcome, hit, marked, N)


# predicates ------------------------------------------------------------------

def same_key_predicate(t: int, x: int, y: int) -> Callable:
    """f(i) = 1 iff i ^ P_t(i ^ .. P_1(i ^ x)) == y."""
    def fn(view, cand):
        v = np.bitwise_xor(x, cand)
        for j in range(1, t + 1):
            v = np.bitwise_xor(view.P(j, "fwd", v), cand)
        return v == y
    return fn


def first_last_f1(view, cand, x1: int, y1: int):
    """Candidate k_1 for candidate k_0: P_1(x1 ^ i) ^ P_2^-1(y1 ^ i)."""
    return np.bitwise_xor(view.P(1, "fwd", np.bitwise_xor(x1, cand)),
                          view.P(2, "inv", np.bitwise_xor(y1, cand)))


def first_last_predicate(x1: int, y1: int, x2: int, y2: int) -> Callable:
    """f2(i) = 1 iff P_2(P_1(x2 ^ i) ^ f1(i)) ^ i == y2."""
    def fn(view, cand):
        k1 = first_last_f1(view, cand, x1, y1)
        u = np.bitwise_xor(view.P(1, "fwd", np.bitwise_xor(x2, cand)), k1)
        return np.bitwise_xor(view.P(2, "fwd", u), cand) == y2
    return fn


def trace_distinct_key(view, cand, t: int, j: int, x: int, y: int):
    """Distinct key k_j implied by repeated-key candidate ``cand`` and the pair (x, y).

    Forward from x through P_1..P_j and backward from y through P_t^-1..P_(j+1)^-1
    give the states on either side of the k_j addition; their XOR is k_j.
    """
    v = np.broadcast_to(np.int64(x), np.shape(cand)).copy()
    for l in range(j):
        v = view.P(l + 1, "fwd", np.bitwise_xor(v, cand))
    w = np.broadcast_to(np.int64(y), np.shape(cand)).copy()
    for l in range(t, j, -1):
        w = view.P(l, "inv", np.bitwise_xor(w, cand))
    return np.bitwise_xor(v, w)


def encrypt_with(view, keys: list, t: int, x):
    """Encrypt through ``view`` with per-candidate key arrays ``keys[0..t]``."""
    v = np.bitwise_xor(x, keys[0])
    for l in range(1, t + 1):
        v = np.bitwise_xor(view.P(l, "fwd", v), keys[l])
    return v


def repeated_key_predicate(t: int, j: int, x1: int, y1: int, x2: int, y2: int) -> Callable:
    def fn(view, cand):
        kj = trace_distinct_key(view, cand, t, j, x1, y1)
        keys = [cand] * (t + 1)
        keys[j] = kj
        return encrypt_with(view, keys, t, x2) == y2
    return fn


# attacks ---------------------------------------------------------------------

DEFAULT_MAX_RUNS = 8


def _distinct_inputs(n: int, count: int, rng: np.random.Generator) -> list[int]:
    return [int(v) for v in rng.choice(1 << n, size=count, replace=False)]


def _search(session: OracleSession, pred: PredicateOracle, rng, iterations, recover,
            check: tuple[int, int], max_runs: int) -> dict:
    """Grover runs until a sampled key passes the held-out check or runs are exhausted.

    ``recover`` maps a sampled candidate to a full key schedule.  Each run is
    charged in full; the check re-encrypts from the tables, since the
    attacker already holds the permutation outputs it needs.
    """
    if max_runs < 1:
        raise ValueError("max_runs must be >= 1")
    table = TableView(session.inst)
    x_check, y_check = check
    keys, verified, total_iter, runs, rep = None, False, 0, 0, None
    while runs < max_runs and not verified:
        rep = grover_run(pred, rng, iterations, session)
        runs += 1
        total_iter += rep.iterations
        if rep.outcome is None:
            break
        keys = recover(table, rep.outcome)
        verified = int(encrypt_with(table, keys, session.inst.t, x_check)) == y_check
    session.assert_e_classical()
    inst = session.inst
    return {
        "n": inst.n,
        "t": inst.t,
        "success": verified and tuple(keys) == tuple(inst.keys),
        "verified": verified,
        "keys": list(keys) if keys is not None else None,
        "true_keys": list(inst.keys),
        "iterations": total_iter,
        "iterations_per_run": rep.iterations,
        "runs": runs,
        "marked_count": rep.marked_count,
        "success_prob_theoretical": rep.success_prob,
        "ledger": session.ledger,
    }


def attack_same_key(inst: KacInstance, rng: np.random.Generator, iterations="auto",
                    max_runs: int = DEFAULT_MAX_RUNS) -> dict:
    """One E pair sets up the search; a second E pair checks each sampled key."""
    if inst.dist.kind is not KeyDistKind.ALL_EQUAL:
        raise ValueError("same-key attack needs an all-equal key schedule")
    session = OracleSession(inst, AccessPolicy.q1(inst.t))
    x, x_check = _distinct_inputs(inst.n, 2, rng)
    y = session.E.query_classical("fwd", x)
    y_check = session.E.query_classical("fwd", x_check)
    pred = PredicateOracle(inst.n, same_key_predicate(inst.t, x, y), "same-key")
    out = _search(session, pred, rng, iterations, lambda _, k: [k] * (inst.t + 1),
                  (x_check, y_check), max_runs)
    return {"attack_name": "grover-samekey", **out}


def attack_first_last_equal(inst: KacInstance, rng: np.random.Generator,
                            iterations="auto", max_runs: int = DEFAULT_MAX_RUNS) -> dict:
    """Two E pairs drive the search over k_0 and f1 supplies k_1.

    The two pairs fix 2n bits for a 2n-bit key, so about one wrong k_0 is
    marked as well; a third pair tells them apart.
    """
    if inst.t != 2 or inst.dist.kind is not KeyDistKind.FIRST_LAST_EQUAL:
        raise ValueError("first/last attack needs a 2-round schedule (k0, k1, k0)")
    session = OracleSession(inst, AccessPolicy.q1(2))
    x1, x2, x3 = _distinct_inputs(inst.n, 3, rng)
    y1, y2, y3 = (session.E.query_classical("fwd", x) for x in (x1, x2, x3))
    pred = PredicateOracle(inst.n, first_last_predicate(x1, y1, x2, y2), "first-last")

    def recover(table, k0):
        k1 = int(first_last_f1(table, np.int64(k0), x1, y1))
        return [k0, k1, k0]

    out = _search(session, pred, rng, iterations, recover, (x3, y3), max_runs)
    return {"attack_name": "grover-firstlast", **out}


def attack_repeated_keys(inst: KacInstance, rng: np.random.Generator, iterations="auto",
                         max_runs: int = DEFAULT_MAX_RUNS) -> dict:
    """Search over the repeated key k*; tracing recovers the distinct key k_j."""
    if inst.dist.kind is not KeyDistKind.REPEATED_EXCEPT:
        raise ValueError("repeated-key attack needs a repeated-except schedule")
    t, j = inst.t, inst.dist.index
    session = OracleSession(inst, AccessPolicy.q1(t))
    x1, x2, x3 = _distinct_inputs(inst.n, 3, rng)
    y1, y2, y3 = (session.E.query_classical("fwd", x) for x in (x1, x2, x3))
    pred = PredicateOracle(inst.n, repeated_key_predicate(t, j, x1, y1, x2, y2), "repeated")

    def recover(table, k):
        keys = [k] * (t + 1)
        keys[j] = int(trace_distinct_key(table, np.int64(k), t, j, x1, y1))
        return keys

    out = _search(session, pred, rng, iterations, recover, (x3, y3), max_runs)
    return {"attack_name": "grover-repeated", "j": j, **out}


def predicate_for(inst: KacInstance, pairs) -> PredicateOracle:
    """The attack predicate for ``inst`` built from known (x, y) pairs."""
    kind = inst.dist.kind
    if kind is KeyDistKind.ALL_EQUAL:
        (x, y), = pairs[:1]
        return PredicateOracle(inst.n, same_key_predicate(inst.t, x, y), "same-key")
    (x1, y1), (x2, y2) = pairs[:2]
    if kind is KeyDistKind.FIRST_LAST_EQUAL:
        return PredicateOracle(inst.n, first_last_predicate(x1, y1, x2, y2), "first-last")
    if kind is KeyDistKind.REPEATED_EXCEPT:
        return PredicateOracle(
            inst.n, repeated_key_predicate(inst.t, inst.dist.index, x1, y1, x2, y2), "repeated")
    raise ValueError(f"no Grover predicate for {kind.value} keys")
