"""Walk-based key recovery with quantum access to the permutations.

The search space is the product of Johnson graphs J(S_i, r), i = 1..t.  A
vertex (V_1, .., V_t) is marked when S_0 x V_1 x .. x V_t generates some
candidate at least t+1 times.  The coherent walk is not simulated: a
classical random walk with the same adjacency (every component swaps one
element per step) finds marked vertices, while the quantum query cost is
reported from the walk cost formula S + (U / sqrt(delta) + C) / sqrt(eps).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .classical import SampleSets
from .core import MIN_EXPERIMENT_BITS, KacInstance, check_block_size
from .kernels import heavy_candidates, make_counter, packed_candidates, unpack_keys
from .oracles import AccessPolicy, OracleSession


def walk_exponent(t: int) -> float:
    """Exponent gamma of the balanced attack: q_E = q_P = 2^(gamma n)."""
    return t * (t + 1) / ((t + 1) ** 2 + 1)


def subset_exponent(t: int) -> float:
    return t * (t + 1) / (t * (t + 1) + 1)


def predicted_r(T: float, t: int) -> float:
    """Leading-order optimum r ~ T^(t(t+1)/(t(t+1)+1))."""
    return T ** subset_exponent(t)


@dataclass(frozen=True)
class WalkCostModel:
    t: int
    T: float
    r: int
    S: float
    U: float
    C: float
    delta: float
    epsilon: float
    total: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("t", "T", "r", "S", "U", "C", "delta", "epsilon", "total")}


def johnson_gap(N: float, r: int) -> float:
    """Spectral gap of J(N, r)."""
    return (N - r) / (r * (N - r + 1))


def walk_cost(t: int, T: float, r: int) -> WalkCostModel:
    """Setup t*r, update t, check 0; eps = (r/T)^(t(t+1)) is the marked-fraction bound."""
    if r < 1:
        raise ValueError("subset size r must be positive")
    if r > T:
        raise ValueError(f"subset size r={r} exceeds set size T={T}")
    S, U, C = float(t * r), float(t), 0.0
    delta = johnson_gap(T, r)
    eps = min(1.0, (r / T) ** (t * (t + 1)))
    if eps >= 1.0:
        # the start vertex is the whole set: no walk needed
        total = S
    else:
        total = S + (U / math.sqrt(delta) + C) / math.sqrt(eps)
    return WalkCostModel(t, float(T), int(r), S, U, C, delta, eps, total)


def optimal_r(t: int, T: float) -> int:
    """Integer r in [1, T) minimizing the walk cost (ties go to the smaller r).

    r = T is left out: the whole-set vertex is marked outright and no walk runs.
    """
    top = int(math.ceil(T)) - 1
    rs = range(1, max(top, 1) + 1)
    return min(rs, key=lambda r: (walk_cost(t, T, r).total, r))


@dataclass(frozen=True)
class WalkPlan:
    n: int
    t: int
    N_c: float
    N_q: float
    alpha: float
    s0_size: int
    T: int
    r: int
    mixed_access_index: int | None = None

    @property
    def gamma(self) -> float:
        return walk_exponent(self.t)

    @property
    def epsilon_formula(self) -> float:
        return min(1.0, (self.r / self.T) ** (self.t * (self.t + 1)))

    def default_budget(self) -> int:
        return int(math.ceil(50 / math.sqrt(self.epsilon_formula)))

    def policy(self) -> AccessPolicy:
        if self.mixed_access_index is None:
            return AccessPolicy.q1(self.t)
        return AccessPolicy.mixed(self.t, [f"P{self.mixed_access_index}"])

    def to_dict(self) -> dict:
        return {
            "n": self.n, "t": self.t, "N_c": self.N_c, "N_q": self.N_q,
            "alpha": self.alpha, "s0_size": self.s0_size, "T": self.T, "r": self.r,
            "gamma": self.gamma, "epsilon_formula": self.epsilon_formula,
            "mixed_access_index": self.mixed_access_index,
        }


def balanced_sizes(n: int, t: int) -> tuple[float, float, float]:
    """(N_c, N_q, alpha) with N_c = N_q^a and N_c * N_q^t = 2^(nt)."""
    a = subset_exponent(t)
    N_q = 2.0 ** (n * t / (a + t))
    return N_q ** a, N_q, (t + 1) ** (1.0 / (t + 1))


def plan_parameters(n: int, t: int, mixed_access_index: int | None = None,
                    r: int | None = None) -> WalkPlan:
    check_block_size(n, MIN_EXPERIMENT_BITS)
    if t < 1:
        raise ValueError("t must be >= 1")
    if (t + 1) * n > 64:
        raise ValueError(f"(t+1)*n = {(t + 1) * n} exceeds the 64-bit candidate width")
    if mixed_access_index is not None and not 1 <= mixed_access_index <= t:
        raise ValueError(f"mixed access index must lie in [1, {t}]")
    N_c, N_q, alpha = balanced_sizes(n, t)
    s0, T = int(round(alpha * N_c)), int(round(alpha * N_q))
    if max(s0, T) > 2 ** n:
        raise ValueError(f"planned set sizes ({s0}, {T}) exceed 2^n at n={n}")
    if r is None:
        r = optimal_r(t, T)
    elif not 1 <= r <= T:
        raise ValueError(f"subset size r={r} outside [1, {T}]")
    return WalkPlan(n, t, N_c, N_q, alpha, s0, T, int(r), mixed_access_index)


def walk_cost_model(plan: WalkPlan) -> WalkCostModel:
    return walk_cost(plan.t, plan.T, plan.r)


def total_query_cost(n: int, t: int) -> float:
    """Classical E queries plus modelled walk queries for the balanced real-valued plan."""
    N_c, N_q, alpha = balanced_sizes(n, t)
    T = alpha * N_q
    return alpha * N_c + walk_cost(t, T, optimal_r(t, T)).total


def cost_slope(t: int, ns=(12, 16, 20)) -> float:
    """Least-squares slope of log2(total_query_cost) against n."""
    ys = [math.log2(total_query_cost(n, t)) for n in ns]
    return float(np.polyfit(ns, ys, 1)[0])


def sample_walk_sets(plan: WalkPlan, rng: np.random.Generator) -> SampleSets:
    n = plan.n
    sizes = [plan.s0_size] + [plan.T] * plan.t
    sets = tuple(np.sort(rng.choice(1 << n, size=s, replace=False)).astype(np.int64)
                 for s in sizes)
    beta = math.prod(sizes) / 2.0 ** (plan.t * n)
    return SampleSets(n, beta, sets)


@dataclass
class WalkVertex:
    """Positions of V_i inside S_i plus the cached images P_i(V_i)."""

    positions: list[np.ndarray]
    data: list[np.ndarray]

    @property
    def t(self) -> int:
        return len(self.positions)

    def elements(self, sets: SampleSets) -> list[np.ndarray]:
        return [sets[i + 1][p] for i, p in enumerate(self.positions)]

    def copy(self) -> "WalkVertex":
        return WalkVertex([p.copy() for p in self.positions], [d.copy() for d in self.data])


def is_marked_vertex(vertex: WalkVertex, sets: SampleSets, s0_images: np.ndarray,
                     backend: str | None = None) -> tuple[bool, list[tuple[int, ...]]]:
    """Marked iff some candidate from S_0 x V_1 x .. x V_t occurs >= t+1 times.

    Uses only the E transcript and the cached vertex data; no oracle is queried.
    """
    t = vertex.t
    if len(s0_images) != len(sets[0]):
        raise ValueError("E transcript does not cover S_0")
    for p, d in zip(vertex.positions, vertex.data):
        if len(p) != len(d):
            raise ValueError("vertex data does not cover its subset")
    xs = [sets[0]] + vertex.elements(sets)
    images = [s0_images] + list(vertex.data)
    keys, _ = heavy_candidates(xs, images, sets.n, t + 1, backend)
    witnesses = [tuple(int(w) for w in row) for row in unpack_keys(keys, t, sets.n)]
    return bool(witnesses), witnesses


class _WalkState:
    """Vertex plus an incremental candidate multiset kept in sync with it."""

    def __init__(self, vertex: WalkVertex, sets: SampleSets, s0_images, backend=None):
        self.v = vertex
        self.sets = sets
        self.s0_images = s0_images
        self.t = vertex.t
        self.counter = make_counter(self.t + 1, backend)
        self.counter.add(self._keys(None, None, None))

    def _keys(self, comp, element, image):
        xs = [self.sets[0]] + self.v.elements(self.sets)
        images = [self.s0_images] + list(self.v.data)
        if comp is not None:
            xs[comp + 1] = np.array([element], dtype=np.int64)
            images[comp + 1] = np.array([image], dtype=np.int64)
        return packed_candidates(xs, images, self.sets.n)

    @property
    def marked(self) -> bool:
        return self.counter.heavy > 0

    def replace(self, comp: int, slot: int, new_pos: int, new_image: int) -> None:
        old_pos = int(self.v.positions[comp][slot])
        old_image = int(self.v.data[comp][slot])
        self.counter.remove(self._keys(comp, int(self.sets[comp + 1][old_pos]), old_image))
        self.v.positions[comp][slot] = new_pos
        self.v.data[comp][slot] = new_image
        self.counter.add(self._keys(comp, int(self.sets[comp + 1][new_pos]), new_image))

    def witnesses(self) -> list[tuple[int, ...]]:
        keys, _ = self.counter.heavy_items()
        return [tuple(int(w) for w in row) for row in unpack_keys(keys, self.t, self.sets.n)]


def _query_one(session: OracleSession, i: int, x: int) -> int:
    # one quantum query under the policy, else one classical query
    return int(session.query_perm(i, "fwd", np.array([x], dtype=np.int64))[0])


def random_start_positions(plan: WalkPlan, rng: np.random.Generator) -> list[np.ndarray]:
    return [np.sort(rng.choice(plan.T, size=plan.r, replace=False)) for _ in range(plan.t)]


def positions_containing(sets: SampleSets, required: list[list[int]], r: int,
                         rng: np.random.Generator) -> list[np.ndarray]:
    """Random r-subset positions per component that include the ``required`` elements."""
    out = []
    for i, req in enumerate(required, start=1):
        where = {int(x): j for j, x in enumerate(sets[i].tolist())}
        must = sorted({where[int(x)] for x in req})
        if len(must) > r:
            raise ValueError("more required elements than the subset size")
        rest = np.setdiff1d(np.arange(len(sets[i])), must)
        extra = rng.choice(rest, size=r - len(must), replace=False)
        out.append(np.sort(np.concatenate([np.array(must, dtype=np.int64), extra])))
    return out


@dataclass
class WalkResult:
    plan: WalkPlan
    steps_taken: int
    success: bool
    marked_found: bool
    key: tuple[int, ...] | None
    true_key: tuple[int, ...]
    witnesses: list
    cost_model: WalkCostModel
    ledger: object
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "steps_taken": self.steps_taken,
            "success": self.success,
            "marked_found": self.marked_found,
            "key": list(self.key) if self.key is not None else None,
            "true_key": list(self.true_key),
            "witness_count": len(self.witnesses),
            "epsilon_formula": self.plan.epsilon_formula,
            "cost_model": self.cost_model.to_dict(),
            "ledger": self.ledger.to_dict(),
            **self.extra,
        }


def emulate_walk_search(inst: KacInstance, plan: WalkPlan, rng: np.random.Generator,
                        step_budget: int | None = None, sets: SampleSets | None = None,
                        start: list[np.ndarray] | None = None,
                        backend: str | None = None,
                        policy: AccessPolicy | None = None) -> WalkResult:
    """Random walk on the Johnson product until a marked vertex or the budget runs out.

    Setup queries each of the t*r start elements once; each step replaces one
    element per component and queries its image once.  The marked check is
    query-free.  ``policy`` overrides the plan's access policy (e.g. Q2).
    """
    if (inst.n, inst.t) != (plan.n, plan.t):
        raise ValueError("plan does not match instance")
    budget = plan.default_budget() if step_budget is None else int(step_budget)
    sets = sets if sets is not None else sample_walk_sets(plan, rng)
    session = OracleSession(inst, policy or plan.policy())

    s0_images = np.atleast_1d(session.E.query_classical("fwd", sets[0]))
    positions = start if start is not None else random_start_positions(plan, rng)
    positions = [np.asarray(p, dtype=np.int64).copy() for p in positions]
    data = []
    for i, pos in enumerate(positions, start=1):
        data.append(np.array([_query_one(session, i, int(x)) for x in sets[i][pos]],
                             dtype=np.int64))
    state = _WalkState(WalkVertex(positions, data), sets, s0_images, backend)

    steps = 0
    while not state.marked and steps < budget:
        for comp in range(plan.t):
            inside = np.zeros(len(sets[comp + 1]), dtype=bool)
            inside[state.v.positions[comp]] = True
            slot = int(rng.integers(plan.r))
            outside = np.flatnonzero(~inside)
            if len(outside) == 0:
                continue
            new_pos = int(outside[rng.integers(len(outside))])
            image = _query_one(session, comp + 1, int(sets[comp + 1][new_pos]))
            state.replace(comp, slot, new_pos, image)
        steps += 1

    session.assert_e_classical()
    witnesses = state.witnesses() if state.marked else []
    key = witnesses[int(rng.integers(len(witnesses)))] if witnesses else None
    return WalkResult(
        plan=plan,
        steps_taken=steps,
        success=key is not None and tuple(key) == tuple(inst.keys),
        marked_found=state.marked,
        key=key,
        true_key=tuple(inst.keys),
        witnesses=witnesses,
        cost_model=walk_cost_model(plan),
        ledger=session.ledger,
    )


def measure_marked_fraction(inst: KacInstance, plan: WalkPlan, samples: int,
                            rng: np.random.Generator, sets: SampleSets | None = None,
                            confidence: float = 0.95, backend: str | None = None) -> dict:
    """Fraction of uniformly random vertices that are marked, with a Wilson interval.

    This is a diagnostic: images are read from the tables directly and are
    not charged to any ledger.
    """
    sets = sets if sets is not None else sample_walk_sets(plan, rng)
    s0_images = inst.encrypt(sets[0])
    full = [inst.perms[i - 1].table[sets[i]] for i in range(1, plan.t + 1)]
    marked = 0
    for _ in range(samples):
        pos = random_start_positions(plan, rng)
        v = WalkVertex(pos, [full[i][p] for i, p in enumerate(pos)])
        marked += is_marked_vertex(v, sets, s0_images, backend)[0]
    ci = binomtest(marked, samples).proportion_ci(confidence, method="wilson") if samples else None
    return {
        "epsilon": marked / samples if samples else float("nan"),
        "marked": marked,
        "samples": samples,
        "ci_low": ci.low if ci else float("nan"),
        "ci_high": ci.high if ci else float("nan"),
        "epsilon_formula": plan.epsilon_formula,
    }


SWEEP_COLUMNS = ("n", "t", "T", "r", "S", "U", "C", "delta", "epsilon", "total")


def cost_sweep_csv(n: int, t: int, r_values=None) -> str:
    """CSV rows of the cost model for one (n, t) plan across subset sizes."""
    plan = plan_parameters(n, t)
    rs = range(1, plan.T + 1) if r_values is None else r_values
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rs:
        c = walk_cost(t, plan.T, int(r))
        w.writerow([n, t, plan.T, c.r, c.S, c.U, c.C, repr(c.delta), repr(c.epsilon),
                    repr(c.total)])
    return buf.getvalue()
