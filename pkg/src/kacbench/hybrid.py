"""Numerical checks of the controlled-reprogramming hybrid argument for 2-KAC.

A non-adaptive adversary is a product-form script: distinct classical
cipher queries plus one amplitude vector per quantum query to P1 and P2.
For a sample (k, P1, P2, R) the post-interaction joint state of each
hybrid is enumerated branch by branch over the script's support:

    H0  real cipher (coupled, see ``build_joint_state``)
    H1  R answers the cipher queries; P2 is reprogrammed per branch
    H2  R answers the cipher queries; P2 is untouched

Branches carry their output words and a tag for the content of the
simulator's P2 register, which is all an overlap ever needs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Permutation, check_block_size

MAX_BRANCHES = 1 << 22
WORLDS = ("H0", "H1", "H2")
TD_MODES = ("full", "adversary", "reduced")


class SupportExplosion(MemoryError):
    pass


def _table(p) -> np.ndarray:
    return p.table if isinstance(p, Permutation) else np.asarray(p, dtype=np.int64)


def _inverse(table: np.ndarray) -> np.ndarray:
    inv = np.empty_like(table)
    inv[table] = np.arange(len(table), dtype=table.dtype)
    return inv


# adversary scripts -----------------------------------------------------------

@dataclass(frozen=True)
class QueryAmplitudes:
    """Sparse amplitude vector of one quantum query."""

    support: np.ndarray
    amps: np.ndarray

    def probability(self, points) -> float:
        """Probability mass this query places on ``points``."""
        hit = np.isin(self.support, np.asarray(list(points), dtype=np.int64))
        return float(np.sum(np.abs(self.amps[hit]) ** 2))


@dataclass(frozen=True)
class AdversaryScript:
    n: int
    x_list: tuple[int, ...]
    p1: tuple[QueryAmplitudes, ...]
    p2: tuple[QueryAmplitudes, ...]
    _grid: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        check_block_size(self.n)
        N = 1 << self.n
        if len(set(self.x_list)) != len(self.x_list):
            raise ValueError("classical queries must be distinct")
        if any(not 0 <= x < N for x in self.x_list):
            raise ValueError("classical query out of range")
        for q in self.p1 + self.p2:
            if len(q.support) != len(q.amps) or len(q.support) == 0:
                raise ValueError("support and amplitudes must be non-empty and aligned")
            if len(np.unique(q.support)) != len(q.support):
                raise ValueError("support points must be distinct")
            if q.support.min() < 0 or q.support.max() >= N:
                raise ValueError("support point out of range")
            if abs(np.sum(np.abs(q.amps) ** 2) - 1.0) > 1e-12:
                raise ValueError("amplitude vector is not normalized")

    @staticmethod
    def query(support, amps=None) -> QueryAmplitudes:
        support = np.asarray(support, dtype=np.int64)
        if amps is None:
            amps = np.full(len(support), 1 / math.sqrt(len(support)), dtype=complex)
        return QueryAmplitudes(support, np.asarray(amps, dtype=complex))

    @classmethod
    def uniform(cls, n: int, x_list: Sequence[int], q1: int = 1, q2: int = 1):
        """Every quantum query spread uniformly over the whole domain."""
        full = np.arange(1 << n)
        return cls(n, tuple(int(x) for x in x_list),
                   tuple(cls.query(full) for _ in range(q1)),
                   tuple(cls.query(full) for _ in range(q2)))

    @classmethod
    def random(cls, n: int, q_E: int, q1: int, q2: int, support_size: int,
               rng: np.random.Generator):
        """Random distinct classical queries and random complex amplitudes."""
        def one():
            sup = rng.choice(1 << n, size=support_size, replace=False)
            a = rng.normal(size=support_size) + 1j * rng.normal(size=support_size)
            return cls.query(sup, a / np.linalg.norm(a))
        xs = rng.choice(1 << n, size=q_E, replace=False)
        return cls(n, tuple(int(x) for x in xs),
                   tuple(one() for _ in range(q1)), tuple(one() for _ in range(q2)))

    @property
    def q_E(self) -> int:
        return len(self.x_list)

    @property
    def branch_count(self) -> int:
        return math.prod(len(q.support) for q in self.p1 + self.p2)

    def branches(self):
        """(A, C, amplitudes): query inputs per branch and branch amplitudes."""
        if "grid" not in self._grid:
            count = self.branch_count
            if count > MAX_BRANCHES:
                raise SupportExplosion(f"script has {count} branches (limit {MAX_BRANCHES})")
            queries = self.p1 + self.p2
            idx = np.indices([len(q.support) for q in queries]).reshape(len(queries), -1)
            cols = [q.support[i] for q, i in zip(queries, idx)]
            amps = np.ones(count, dtype=complex)
            for q, i in zip(queries, idx):
                amps = amps * q.amps[i]
            q1 = len(self.p1)
            A = np.stack(cols[:q1], axis=1) if q1 else np.zeros((count, 0), np.int64)
            C = np.stack(cols[q1:], axis=1) if self.p2 else np.zeros((count, 0), np.int64)
            self._grid["grid"] = (A, C, amps)
        return self._grid["grid"]


# samples and reprogramming ---------------------------------------------------

@dataclass(frozen=True)
class HybridSample:
    keys: tuple[int, int, int]
    P1: np.ndarray
    P2: np.ndarray
    R: np.ndarray

    @property
    def n(self) -> int:
        return int(len(self.P1)).bit_length() - 1


def sample_hybrid(n: int, rng: np.random.Generator) -> HybridSample:
    N = 1 << n
    keys = tuple(int(k) for k in rng.integers(0, N, size=3))
    return HybridSample(keys, rng.permutation(N), rng.permutation(N), rng.permutation(N))


@dataclass(frozen=True)
class ReprogramRecord:
    X: np.ndarray
    Y: np.ndarray

    @property
    def collision(self) -> bool:
        """Whether some X_r equals some Y_s."""
        return bool(np.intersect1d(self.X, self.Y).size)

    @property
    def swaps(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(self.X, self.Y)]


def compute_reprogram_targets(k, P1, P2, R, x_list) -> ReprogramRecord:
    """X_r = P1(x_r ^ k0) ^ k1 and Y_r = P2^-1(R(x_r) ^ k2)."""
    k0, k1, k2 = (int(v) for v in k[:3])
    xs = np.asarray(x_list, dtype=np.int64)
    p1, p2, r = _table(P1), _table(P2), _table(R)
    X = p1[xs ^ k0] ^ k1
    Y = _inverse(p2)[r[xs] ^ k2]
    return ReprogramRecord(X, Y)


def _swap_table(p2: np.ndarray, swaps, active) -> np.ndarray:
    out = p2.copy()
    for (a, b), on in zip(swaps, active):
        if on:
            out[a], out[b] = out[b], out[a]
    return out


def reprogram_permutation(P2, swaps, active_flags) -> Permutation:
    """P2 composed with the active transpositions, applied in ascending r."""
    table = _table(P2)
    out = _swap_table(table, swaps, active_flags)
    n = int(len(table)).bit_length() - 1
    if n <= 10 and not np.array_equal(np.sort(out), np.arange(len(out))):
        raise AssertionError("reprogrammed table is not a bijection")
    return Permutation.from_table(out, n)


def flag_function(a, x_list, k0: int) -> np.ndarray:
    """Per-r flags g_r: some P1 query input in ``a`` equals x_r ^ k0."""
    a = np.atleast_1d(np.asarray(a, dtype=np.int64))
    targets = np.asarray(x_list, dtype=np.int64) ^ int(k0)
    return (a[:, None] == targets[None, :]).any(axis=0)


def _branch_masks(A: np.ndarray, x_list, k0: int) -> np.ndarray:
    """Active set S(a) of every branch as a bit mask over r."""
    targets = np.asarray(x_list, dtype=np.int64) ^ int(k0)
    hits = (A[:, :, None] == targets[None, None, :]).any(axis=1)
    weights = np.left_shift(np.int64(1), np.arange(len(targets), dtype=np.int64))
    return (hits * weights).sum(axis=1) if len(targets) else np.zeros(len(A), np.int64)


def _small_unique(masks: np.ndarray):
    """np.unique(return_inverse=True) for small non-negative ints, in linear time."""
    if masks.size == 0 or masks.max() > 1 << 20:
        return np.unique(masks, return_inverse=True)
    present = np.flatnonzero(np.bincount(masks))
    lut = np.zeros(int(present[-1]) + 1, dtype=np.int64)
    lut[present] = np.arange(len(present))
    return present, lut[masks]


def _mask_flags(mask: int, q_E: int) -> list[bool]:
    return [bool(mask >> r & 1) for r in range(q_E)]


def coupled_real_p2(sample: HybridSample, rec: ReprogramRecord) -> np.ndarray:
    """P2 with every swap applied: the real-world P2 paired with H1 in H0."""
    return _swap_table(sample.P2, rec.swaps, [True] * len(rec.swaps))


def encrypt2(k, P1: np.ndarray, P2: np.ndarray, x) -> np.ndarray:
    k0, k1, k2 = k
    return P2[P1[np.asarray(x) ^ k0] ^ k1] ^ k2


# joint states ----------------------------------------------------------------

@dataclass
class JointState:
    """Branch amplitudes, output words and P2-register tags of one hybrid."""

    world: str
    amps: np.ndarray
    outputs: np.ndarray
    tags: np.ndarray
    tag_tables: list

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


def build_joint_state(world: str, script: AdversaryScript, sample: HybridSample) -> JointState:
    """Post-interaction state of ``world`` for ``script`` on ``sample``.

    H0 is coupled to H1 through P2* = P2 with every swap applied, so the real
    cipher agrees with R on all classical queries unless a swap collision
    occurs.  Uncomputed ancillas leave no trace; the P2 register keeps the
    branch-dependent content, recorded as a tag.
    """
    if world not in WORLDS:
        raise ValueError(f"unknown hybrid {world!r}")
    A, C, amps = script.branches()
    k = sample.keys
    rec = compute_reprogram_targets(k, sample.P1, sample.P2, sample.R, script.x_list)
    xs = np.asarray(script.x_list, dtype=np.int64)
    count = len(amps)
    if world == "H0":
        p2 = coupled_real_p2(sample, rec)
        y = encrypt2(k, sample.P1, p2, xs)
        tables, tags = [p2], np.zeros(count, dtype=np.int64)
        D = p2[C]
    else:
        y = sample.R[xs]
        if world == "H2":
            tables, tags = [sample.P2], np.zeros(count, dtype=np.int64)
            D = sample.P2[C]
        else:
            masks = _branch_masks(A, script.x_list, k[0])
            uniq, inv = _small_unique(masks)
            tables, tag_of_mask = [], []
            for m in uniq.tolist():
                tbl = _swap_table(sample.P2, rec.swaps, _mask_flags(m, script.q_E))
                # identical register content shares one tag
                for j, seen in enumerate(tables):
                    if np.array_equal(seen, tbl):
                        tag_of_mask.append(j)
                        break
                else:
                    tag_of_mask.append(len(tables))
                    tables.append(tbl)
            tags = np.asarray(tag_of_mask, dtype=np.int64)[inv]
            D = np.empty_like(C)
            for j, tbl in enumerate(tables):
                sel = tags == j
                D[sel] = tbl[C[sel]]
    B = sample.P1[A]
    Y = np.broadcast_to(y, (count, len(xs)))
    outputs = np.concatenate([Y, B, D], axis=1)
    return JointState(world, amps, outputs, tags, tables)


def _tag_match(a: JointState, b: JointState) -> np.ndarray:
    m = np.zeros((len(a.tag_tables), len(b.tag_tables)), dtype=bool)
    for i, ta in enumerate(a.tag_tables):
        for j, tb in enumerate(b.tag_tables):
            m[i, j] = np.array_equal(ta, tb)
    return m


def overlap(a: JointState, b: JointState, registers: str = "full") -> complex:
    """Branch-wise <a|b>; ``adversary`` ignores the P2-register tags."""
    if a.outputs.shape != b.outputs.shape:
        raise ValueError("states come from different scripts")
    same = np.all(a.outputs == b.outputs, axis=1)
    if registers == "full":
        same &= _tag_match(a, b)[a.tags, b.tags]
    elif registers != "adversary":
        raise ValueError(f"overlap is defined for full or adversary registers, not {registers!r}")
    return complex(np.sum(np.conj(a.amps[same]) * b.amps[same]))


def _reduced_trace_distance(a: JointState, b: JointState) -> float:
    """Exact trace distance of the adversary's reduced states.

    Each state reduces to a sum of rank-one terms, one per register tag.
    The nonzero spectrum of rho_a - rho_b equals that of G^1/2 D G^1/2,
    with G the Gram matrix of those vectors and D = diag(+1.., -1..).
    """
    same = np.all(a.outputs == b.outputs, axis=1)
    ta, tb = len(a.tag_tables), len(b.tag_tables)
    w_a = np.abs(a.amps) ** 2
    w_b = np.abs(b.amps) ** 2
    G = np.zeros((ta + tb, ta + tb), dtype=complex)
    G[:ta, :ta] = np.diag(np.bincount(a.tags, weights=w_a, minlength=ta))
    G[ta:, ta:] = np.diag(np.bincount(b.tags, weights=w_b, minlength=tb))
    cross = np.conj(a.amps) * b.amps * same
    flat = a.tags * tb + b.tags
    ab = (np.bincount(flat, weights=cross.real, minlength=ta * tb)
          + 1j * np.bincount(flat, weights=cross.imag, minlength=ta * tb)).reshape(ta, tb)
    G[:ta, ta:] = ab
    G[ta:, :ta] = ab.conj().T
    lam, U = np.linalg.eigh(G)
    # drop numerically null directions; their square roots would only add noise
    keep = lam > 1e-13 * max(lam.max(), 1.0)
    W = U[:, keep] * np.sqrt(lam[keep])
    d = np.r_[np.ones(ta), -np.ones(tb)]
    ev = np.linalg.eigvalsh((W.conj().T * d) @ W)
    return float(min(1.0, 0.5 * np.sum(np.abs(ev))))


def trace_distance(a: JointState, b: JointState, registers: str = "full") -> float:
    """Trace distance between two hybrid states.

    ``full`` and ``adversary`` treat the states as pure and return
    sqrt(1 - |overlap|^2), with and without the P2-register tags.
    ``reduced`` traces the simulator's register out first.
    """
    if registers == "reduced":
        if a.outputs.shape != b.outputs.shape:
            raise ValueError("states come from different scripts")
        return _reduced_trace_distance(a, b)
    ov = abs(overlap(a, b, registers))
    return math.sqrt(max(0.0, 1.0 - min(1.0, ov) ** 2))


def pure_pair_distance(p: float) -> float:
    """Distance of two single-query states that differ on probability mass p."""
    return math.sqrt(p * (2 - p))


# bounds ----------------------------------------------------------------------

def collision_probability_bound(n: int, q_E: int) -> float:
    return min(1.0, q_E ** 2 / 2 ** n)


def h1h2_bound(n: int, q_E: int, q_P1: int, q_P2: int) -> float:
    """2 q_P2 q_P1 sqrt(q_E) / 2^n."""
    return 2 * q_P2 * q_P1 * math.sqrt(q_E) / 2 ** n


def h0h1_bound(n: int, q_E: int, q_P1: int, q_P2: int) -> float:
    return collision_probability_bound(n, q_E) * h1h2_bound(n, q_E, q_P1, q_P2)


def reprogram_set(sample: HybridSample, rec: ReprogramRecord, masks) -> np.ndarray:
    """Points where some realized branch's reprogrammed P2 differs from P2."""
    changed = set()
    for m in masks:
        tbl = _swap_table(sample.P2, rec.swaps, _mask_flags(int(m), len(rec.swaps)))
        changed.update(np.flatnonzero(tbl != sample.P2).tolist())
    return np.array(sorted(changed), dtype=np.int64)


def certificate(script: AdversaryScript, S) -> float:
    """sqrt(2) * sum_j sqrt(p_j(S)) over the P2 queries."""
    return math.sqrt(2) * sum(math.sqrt(q.probability(S)) for q in script.p2)


def run_hybrid_trials(script: AdversaryScript, trials: int, rng: np.random.Generator,
                      tolerance: float = 1e-9) -> dict:
    """Sample (k, P1, P2, R), build H0/H1/H2 and compare them.

    ``mean_td_h1h2`` uses the adversary view: output registers only, which
    is the accounting behind the H1/H2 bound.  Keeping the simulator's P2
    register (``full``) or tracing it out exactly (``reduced``) also
    exposes the entanglement between that register and the P1 branch;
    both are reported.  Certificate violations are counted per view.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    n, q_E = script.n, script.q_E
    q1, q2 = len(script.p1), len(script.p2)
    A, _, amps = script.branches()
    td = {m: [] for m in TD_MODES}
    td01 = {m: [] for m in ("adversary", "reduced")}
    viol = {m: 0 for m in TD_MODES}
    coll, consist_fail = 0, 0
    p_S, size_S = [], []
    live = np.abs(amps) > 0
    for _ in range(trials):
        s = sample_hybrid(n, rng)
        rec = compute_reprogram_targets(s.keys, s.P1, s.P2, s.R, script.x_list)
        h0, h1, h2 = (build_joint_state(w, script, s) for w in WORLDS)
        masks = _small_unique(_branch_masks(A[live], script.x_list, s.keys[0]))[0]
        S = reprogram_set(s, rec, masks)
        c = certificate(script, S)
        for m in TD_MODES:
            d = trace_distance(h1, h2, m)
            td[m].append(d)
            viol[m] += d > c + tolerance
        for m in td01:
            td01[m].append(trace_distance(h0, h1, m))
        p_S.extend(q.probability(S) for q in script.p2)
        size_S.append(len(S) / 2 ** n)
        if rec.collision:
            coll += 1
        else:
            p2s = coupled_real_p2(s, rec)
            xs = np.asarray(script.x_list)
            consist_fail += not (np.array_equal(p2s[rec.X], s.R[xs] ^ s.keys[2])
                                 and np.array_equal(encrypt2(s.keys, s.P1, p2s, xs), s.R[xs]))
    return {
        "params": {"n": n, "q_E": q_E, "q_P1": q1, "q_P2": q2, "trials": trials,
                   "branches": script.branch_count},
        "mean_td_h1h2": float(np.mean(td["adversary"])),
        "mean_td_h1h2_full": float(np.mean(td["full"])),
        "mean_td_h1h2_reduced": float(np.mean(td["reduced"])),
        "max_td_h1h2": float(np.max(td["adversary"])),
        "bound_h1h2": h1h2_bound(n, q_E, q1, q2),
        "mean_td_h0h1": float(np.mean(td01["adversary"])),
        "mean_td_h0h1_reduced": float(np.mean(td01["reduced"])),
        "bound_h0h1": h0h1_bound(n, q_E, q1, q2),
        "p_coll_formula": collision_probability_bound(n, q_E),
        "p_coll_empirical": coll / trials,
        "certificate_violations": int(viol["adversary"]),
        "certificate_violations_reduced": int(viol["reduced"]),
        "certificate_violations_full": int(viol["full"]),
        "no_collision_consistency_failures": int(consist_fail),
        "mean_p_S": float(np.mean(p_S)) if p_S else 0.0,
        "mean_size_S_over_N": float(np.mean(size_S)),
        "samples": trials,
    }


def collision_rate(n: int, q_E: int, samples: int, rng: np.random.Generator) -> dict:
    """Monte Carlo swap-collision rate and the collision-free consistency check."""
    N = 1 << n
    hits, fails = 0, 0
    for _ in range(samples):
        s = sample_hybrid(n, rng)
        xs = rng.choice(N, size=q_E, replace=False)
        rec = compute_reprogram_targets(s.keys, s.P1, s.P2, s.R, xs)
        if rec.collision:
            hits += 1
            continue
        p2s = _swap_table(s.P2, rec.swaps, [True] * q_E)
        fails += not np.array_equal(p2s[rec.X], s.R[xs] ^ s.keys[2])
    p = hits / samples
    formula = collision_probability_bound(n, q_E)
    return {
        "n": n, "q_E": q_E, "samples": samples,
        "p_coll_formula": formula,
        "p_coll_empirical": p,
        "sigma": math.sqrt(max(formula * (1 - formula), 1e-300) / samples),
        "consistency_failures": fails,
    }


def sum_capture_expectation(set_sizes: Sequence[int], n: int, target: int, trials: int,
                            rng: np.random.Generator) -> dict:
    """Solutions of x_1 ^ .. ^ x_t = target over random sets, against prod(m_i)/2^n."""
    N = 1 << n
    if any(not 0 <= m <= N for m in set_sizes):
        raise ValueError("set sizes must lie in [0, 2^n]")
    expected = math.prod(set_sizes) / N
    counts = np.empty(trials)
    for i in range(trials):
        # hist[z]: number of tuples so far whose XOR is z
        hist = np.zeros(N)
        hist[0] = 1.0
        for m in set_sizes:
            members = rng.choice(N, size=m, replace=False)
            src = np.flatnonzero(hist)
            nxt = np.zeros(N)
            if len(src) and m:
                z = (src[:, None] ^ members[None, :]).ravel()
                np.add.at(nxt, z, np.repeat(hist[src], m))
            hist = nxt
        counts[i] = hist[target]
    std = float(counts.std(ddof=1)) if trials > 1 else 0.0
    return {
        "expected": expected,
        "empirical_mean": float(counts.mean()),
        "empirical_std": std,
        "stderr": std / math.sqrt(trials),
        "trials": trials,
    }


# advantage bound calculators ---------------------------------------------------

def _model_counts(t: int, q_E, q_vector, model: str):
    q = [q_E] + list(q_vector)
    if len(q) != t + 1:
        raise ValueError(f"need {t} permutation query counts, got {len(q_vector)}")
    if any(v < 0 for v in q):
        raise ValueError("query counts must be non-negative")
    return q


def advantage_bounds(t: int, n: int, q_E, q_vector, model: str = "Q1") -> float:
    """Closed-form advantage bounds.

    Q1: 4 q_P1..q_Pt sqrt(q_E) / 2^(tn/2), with q_E classical.
    Q2: 4 / 2^((t-1)n/2) * min_i prod_{l != i} q_Pl, with q_P0 = q_E quantum.
    lifted:O: the Q1 formula with oracle O as the classical one and 2^n
    in place of its count (O is E or P1..Pt).
    """
    q = _model_counts(t, q_E, q_vector, model)
    value = 2.0 ** _log2_bound(t, n, q, model) if _nonzero(t, q, model) else 0.0
    return value


def _nonzero(t: int, q, model: str) -> bool:
    if model == "Q1":
        return all(v > 0 for v in q)
    if model == "Q2":
        return any(all(v > 0 for l, v in enumerate(q) if l != i) for i in range(t + 1))
    i = _lifted_index(t, model)
    return all(v > 0 for l, v in enumerate(q) if l != i)


def _lifted_index(t: int, model: str) -> int:
    if not model.startswith("lifted:"):
        raise ValueError(f"unknown bound model {model!r}")
    name = model.split(":", 1)[1]
    if name == "E":
        return 0
    if name.startswith("P") and name[1:].isdigit() and 1 <= int(name[1:]) <= t:
        return int(name[1:])
    raise ValueError(f"cannot lift oracle {name!r} for t={t}")


def _q1_log2(t: int, n: int, classical: float, quantum) -> float:
    return 2 + sum(math.log2(v) for v in quantum) + 0.5 * math.log2(classical) - t * n / 2


def _log2_bound(t: int, n: int, q, model: str) -> float:
    if model == "Q1":
        return _q1_log2(t, n, q[0], q[1:])
    if model == "Q2":
        terms = [2 + sum(math.log2(v) for l, v in enumerate(q) if l != i) - (t - 1) * n / 2
                 for i in range(t + 1) if all(v > 0 for l, v in enumerate(q) if l != i)]
        return min(terms)
    i = _lifted_index(t, model)
    return _q1_log2(t, n, 2 ** n, [v for l, v in enumerate(q) if l != i])


def advantage_bound_squared(t: int, n: int, q_E: int, q_vector, model: str = "Q1") -> Fraction:
    """Exact square of ``advantage_bounds`` for integer query counts."""
    q = [Fraction(v) for v in _model_counts(t, q_E, q_vector, model)]
    if any(v.denominator != 1 for v in q):
        raise ValueError("exact evaluation needs integer query counts")

    def q1(classical, quantum):
        return 16 * math.prod(quantum, start=Fraction(1)) ** 2 * classical / Fraction(2) ** (t * n)

    if model == "Q1":
        return q1(q[0], q[1:])
    if model == "Q2":
        return min(16 * math.prod([v for l, v in enumerate(q) if l != i], start=Fraction(1)) ** 2
                   / Fraction(2) ** ((t - 1) * n) for i in range(t + 1))
    i = _lifted_index(t, model)
    return q1(Fraction(2) ** n, [v for l, v in enumerate(q) if l != i])


def q2_term_squared(t: int, n: int, q_vector_with_e, i: int) -> Fraction:
    """Exact square of the i-th term inside the Q2 minimum."""
    q = [Fraction(v) for v in q_vector_with_e]
    return (16 * math.prod([v for l, v in enumerate(q) if l != i], start=Fraction(1)) ** 2
            / Fraction(2) ** ((t - 1) * n))
