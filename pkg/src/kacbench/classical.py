"""Classical key recovery by candidate counting.

Sample sets S_0..S_t whose product covers about beta * 2^(tn) tuples,
query E on S_0 and P_i on S_i once each, and turn every tuple
(x_0, .., x_t) into the candidate

    k_0 = x_0 ^ x_1,  k_i = P_i(x_i) ^ x_{i+1},  k_t = P_t(x_t) ^ E(x_0).

The true key is produced by every consistent chain, about beta times in
expectation, while a wrong candidate rarely reaches t+1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import KacInstance, KeyDistKind, check_block_size
from .kernels import CandidateMultiset
from .oracles import AccessPolicy, OracleSession, QueryLedger


class InfeasibleSets(ValueError):
    pass


@dataclass(frozen=True)
class SampleSets:
    n: int
    beta: float
    sets: tuple[np.ndarray, ...]

    @property
    def t(self) -> int:
        return len(self.sets) - 1

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    @property
    def tuple_count(self) -> int:
        return math.prod(self.sizes)

    def __getitem__(self, i):
        return self.sets[i]


def balanced_sizes(n: int, t: int, beta: float) -> list[int]:
    """Near-equal sizes whose product is the smallest reachable value >= beta * 2^(tn)."""
    target = beta * 2.0 ** (t * n)
    base = max(1, int(math.floor(target ** (1.0 / (t + 1)) + 1e-9)))
    sizes = [base] * (t + 1)
    i = t
    while math.prod(sizes) < target:
        sizes[i] += 1
        i = (i - 1) % (t + 1)
    return sizes


def sample_input_sets(n: int, t: int, beta: float, rng: np.random.Generator,
                      sizes=None) -> SampleSets:
    """Draw S_0..S_t uniformly without replacement.

    ``sizes=None`` picks the balanced profile.  Explicit sizes must match
    beta * 2^(tn) up to rounding, i.e. within sum(1/|S_i|) relative error.
    """
    check_block_size(n)
    if t < 1:
        raise ValueError("t must be >= 1")
    if beta < t + 1:
        raise InfeasibleSets(f"beta={beta} is below t+1={t + 1}")
    if beta > 2 ** n:
        raise InfeasibleSets(
            f"beta*2^(tn) exceeds the {2 ** (n * (t + 1))} tuples available at n={n}")
    if sizes is None:
        sizes = balanced_sizes(n, t, beta)
    else:
        sizes = [int(s) for s in sizes]
        if len(sizes) != t + 1:
            raise InfeasibleSets(f"need {t + 1} set sizes, got {len(sizes)}")
        if min(sizes) < 1:
            raise InfeasibleSets("set sizes must be positive")
        target = beta * 2.0 ** (t * n)
        slack = sum(1.0 / s for s in sizes)
        if abs(math.prod(sizes) / target - 1.0) > slack:
            raise InfeasibleSets(
                f"product of sizes {sizes} is not beta*2^(tn) = {target:g} within rounding")
    if max(sizes) > 2 ** n:
        raise InfeasibleSets(f"set size {max(sizes)} exceeds 2^n = {2 ** n}")
    sets = tuple(np.sort(rng.choice(1 << n, size=s, replace=False)).astype(np.int64)
                 for s in sizes)
    return SampleSets(n, float(beta), sets)


def true_chain(inst: KacInstance, x0: int) -> list[int]:
    """Inputs (x_0, .., x_t) that generate the true key from ``x0``."""
    k = inst.keys
    xs = [int(x0), int(x0) ^ k[0]]
    for i in range(1, inst.t):
        xs.append(int(inst.perms[i - 1].table[xs[-1]]) ^ k[i])
    return xs


def count_true_chains(inst: KacInstance, sets: SampleSets) -> int:
    """Number of tuples in S_0 x .. x S_t that generate the true key."""
    members = [set(s.tolist()) for s in sets.sets[1:]]
    hits = 0
    for x0 in sets.sets[0].tolist():
        chain = true_chain(inst, x0)
        if all(c in m for c, m in zip(chain[1:], members)):
            hits += 1
    return hits


def plant_true_chains(inst: KacInstance, sets: SampleSets, count: int,
                      rng: np.random.Generator) -> SampleSets:
    """Overwrite set elements so that at least ``count`` true-key chains are present."""
    if count > min(sets.sizes):
        raise InfeasibleSets("cannot plant more chains than the smallest set holds")
    new = [s.copy() for s in sets.sets]
    starts = rng.choice(1 << inst.n, size=count, replace=False)
    chains = [true_chain(inst, int(x0)) for x0 in starts]
    for i in range(inst.t + 1):
        want = [c[i] for c in chains]
        have = set(new[i].tolist())
        missing = [w for w in dict.fromkeys(want) if w not in have]
        # replace elements that no planted chain needs
        free = [j for j, v in enumerate(new[i].tolist()) if v not in set(want)]
        for w, j in zip(missing, rng.permutation(free)):
            new[i][j] = w
    return SampleSets(sets.n, sets.beta, tuple(np.sort(s) for s in new))


def query_sets(sets: SampleSets, session: OracleSession) -> list[np.ndarray]:
    """Classical images: E on S_0 and P_i on S_i, one query per element."""
    images = [np.atleast_1d(session.E.query_classical("fwd", sets[0]))]
    for i in range(1, sets.t + 1):
        images.append(np.atleast_1d(session.P[i].query_classical("fwd", sets[i])))
    return images


def generate_key_candidates(sets: SampleSets, session: OracleSession,
                            backend: str | None = None) -> CandidateMultiset:
    images = query_sets(sets, session)
    return CandidateMultiset.build(list(sets.sets), images, sets.n, backend)


def select_candidate(cands: CandidateMultiset, rng: np.random.Generator):
    """A uniformly random candidate of multiplicity >= t+1, or None."""
    pool = cands.at_least(cands.t + 1)
    if not pool:
        return None
    return pool[int(rng.integers(len(pool)))]


def run_classical_attack(inst: KacInstance, beta: float, rng: np.random.Generator,
                         sizes=None, backend: str | None = None) -> dict:
    if inst.dist.kind is not KeyDistKind.INDEPENDENT:
        raise ValueError("the classical attack assumes independent round keys")
    sets = sample_input_sets(inst.n, inst.t, beta, rng, sizes)
    session = OracleSession(inst, AccessPolicy.classical(inst.t))
    cands = generate_key_candidates(sets, session, backend)
    guess = select_candidate(cands, rng)
    return {
        "success": guess is not None and tuple(guess) == tuple(inst.keys),
        "guessed_key": list(guess) if guess is not None else None,
        "true_key": list(inst.keys),
        "set_sizes": list(sets.sizes),
        "true_key_multiplicity": cands.count_of(inst.keys),
        "multiplicities_histogram": cands.histogram(),
        "ledger": session.ledger,
    }


def result_record(result: dict) -> dict:
    """JSON-ready copy of an attack result."""
    out = dict(result)
    out["multiplicities_histogram"] = {str(k): v for k, v in result["multiplicities_histogram"].items()}
    led = result["ledger"]
    out["ledger"] = led.to_dict() if isinstance(led, QueryLedger) else led
    return out
