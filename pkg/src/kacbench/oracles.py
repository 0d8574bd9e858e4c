"""Query-counted access to the cipher and its public permutations.

Oracles are named ``"E"`` (the keyed cipher) and ``"P1"`` .. ``"Pt"``.
A classical query evaluates one point.  A quantum query is emulated as a
single evaluation over the whole amplitude support of the query register:
it costs one query no matter how large the support is.  This is the unit
every bound and attack in the package is stated in.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Direction, KacInstance, _direction, check_word

DIRECTIONS = (Direction.FWD.value, Direction.INV.value)


class PolicyViolation(RuntimeError):
    """An attack issued a superposition query the access model forbids."""


def oracle_names(t: int) -> tuple[str, ...]:
    return ("E",) + tuple(f"P{i}" for i in range(1, t + 1))


@dataclass(frozen=True)
class AccessPolicy:
    t: int
    quantum_set: frozenset
    name: str = "custom"

    @classmethod
    def classical(cls, t: int):
        return cls(t, frozenset(), "classical")

    @classmethod
    def q1(cls, t: int):
        return cls(t, frozenset(oracle_names(t)[1:]), "q1")

    @classmethod
    def q2(cls, t: int):
        return cls(t, frozenset(oracle_names(t)), "q2")

    @classmethod
    def mixed(cls, t: int, oracles: Iterable[str]):
        chosen = frozenset(oracles)
        unknown = chosen - set(oracle_names(t))
        if unknown:
            raise ValueError(f"unknown oracles in mixed policy: {sorted(unknown)}")
        return cls(t, chosen, "mixed:" + ",".join(sorted(chosen)))

    @classmethod
    def parse(cls, spec: str, t: int) -> "AccessPolicy":
        spec = spec.strip().lower()
        if spec == "q1":
            return cls.q1(t)
        if spec == "q2":
            return cls.q2(t)
        if spec == "classical":
            return cls.classical(t)
        if spec.startswith("mixed:"):
            names = [s.strip().upper() for s in spec[len("mixed:"):].split(",") if s.strip()]
            return cls.mixed(t, names)
        raise ValueError(f"unknown access policy {spec!r}")

    def allows_quantum(self, oracle: str) -> bool:
        return oracle in self.quantum_set


@dataclass
class QueryLedger:
    """Per-oracle, per-direction query counts split classical/quantum."""

    oracles: tuple[str, ...]
    policy: AccessPolicy | None = None
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        for o in self.oracles:
            for d in DIRECTIONS:
                self.counts.setdefault((o, d), [0, 0])

    @classmethod
    def for_rounds(cls, t: int, policy: AccessPolicy | None = None):
        return cls(oracle_names(t), policy)

    def record(self, oracle: str, direction, kind: str, amount: int = 1) -> None:
        if amount < 0:
            raise ValueError("query counts only grow")
        d = _direction(direction).value
        slot = self.counts[(oracle, d)]
        if kind == "classical":
            slot[0] += amount
        elif kind == "quantum":
            if self.policy is not None and not self.policy.allows_quantum(oracle):
                raise PolicyViolation(
                    f"quantum query to {oracle} not allowed under policy {self.policy.name}")
            slot[1] += amount
        else:
            raise ValueError(f"unknown query kind {kind!r}")

    def classical(self, oracle: str, direction=None) -> int:
        dirs = DIRECTIONS if direction is None else (_direction(direction).value,)
        return sum(self.counts[(oracle, d)][0] for d in dirs)

    def quantum(self, oracle: str, direction=None) -> int:
        dirs = DIRECTIONS if direction is None else (_direction(direction).value,)
        return sum(self.counts[(oracle, d)][1] for d in dirs)

    def total(self, oracle: str) -> int:
        return self.classical(oracle) + self.quantum(oracle)

    def totals(self) -> dict:
        c = sum(v[0] for v in self.counts.values())
        q = sum(v[1] for v in self.counts.values())
        return {
            "classical": c,
            "quantum": q,
            "total": c + q,
            "per_oracle": {
                o: {"classical": self.classical(o), "quantum": self.quantum(o)}
                for o in self.oracles
            },
        }

    def snapshot(self) -> dict:
        return {k: tuple(v) for k, v in self.counts.items()}

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.name if self.policy else None,
            "counts": {
                o: {d: {"classical": self.counts[(o, d)][0],
                        "quantum": self.counts[(o, d)][1]} for d in DIRECTIONS}
                for o in self.oracles
            },
            "totals": self.totals(),
        }

    def copy(self) -> "QueryLedger":
        return QueryLedger(self.oracles, self.policy,
                           {k: list(v) for k, v in self.counts.items()})


def ledger_report(ledgers: Sequence[QueryLedger]) -> tuple[QueryLedger, dict]:
    """Sum ledgers componentwise.  An empty list gives an empty ledger."""
    if not ledgers:
        empty = QueryLedger(())
        return empty, empty.totals()
    oracles = ledgers[0].oracles
    for led in ledgers[1:]:
        if set(led.oracles) != set(oracles):
            raise ValueError(f"mismatched oracle sets: {led.oracles} vs {oracles}")
    policies = {led.policy for led in ledgers}
    merged = QueryLedger(oracles, policies.pop() if len(policies) == 1 else None)
    for led in ledgers:
        for key, (c, q) in led.counts.items():
            merged.counts[key][0] += c
            merged.counts[key][1] += q
    return merged, merged.totals()


class OracleHandle:
    """Counted access to one oracle.  All handles of a session share a ledger."""

    def __init__(self, target: str, fwd, inv, n: int, ledger: QueryLedger):
        self.target = target
        self.n = n
        self._fwd = fwd
        self._inv = inv
        self.ledger = ledger

    def _eval(self, direction, x):
        return self._fwd(x) if _direction(direction) is Direction.FWD else self._inv(x)

    def query_classical(self, direction, x):
        """One classical query.  Batches are counted one query per element."""
        check_word(x, self.n)
        arr = np.asarray(x)
        self.ledger.record(self.target, direction, "classical", int(arr.size))
        out = self._eval(direction, x)
        return int(out) if arr.ndim == 0 else np.asarray(out)

    def query_quantum(self, direction, support) -> np.ndarray:
        """One superposition query evaluated on every point of ``support``."""
        pts = np.atleast_1d(np.asarray(support, dtype=np.int64))
        check_word(pts, self.n)
        self.ledger.record(self.target, direction, "quantum", 1)
        return np.asarray(self._eval(direction, pts))


class OracleSession:
    """Handles for E and P1..Pt over one instance, sharing a single ledger."""

    def __init__(self, inst: KacInstance, policy: AccessPolicy):
        if policy.t != inst.t:
            raise ValueError("policy round count does not match instance")
        self.inst = inst
        self.policy = policy
        self.ledger = QueryLedger.for_rounds(inst.t, policy)
        self.E = OracleHandle("E", inst.encrypt, inst.decrypt, inst.n, self.ledger)
        self.P = {
            i: OracleHandle(f"P{i}", p.forward, p.inverse, inst.n, self.ledger)
            for i, p in enumerate(inst.perms, start=1)
        }

    def perm(self, i: int) -> OracleHandle:
        return self.P[i]

    def query_perm(self, i: int, direction, xs) -> np.ndarray:
        """Query P_i over ``xs`` quantumly if the policy allows, else point by point."""
        h = self.P[i]
        if self.policy.allows_quantum(h.target):
            return h.query_quantum(direction, xs)
        return np.atleast_1d(h.query_classical(direction, np.asarray(xs)))

    def assert_e_classical(self) -> None:
        if self.ledger.quantum("E") and not self.policy.allows_quantum("E"):
            raise PolicyViolation("cipher received quantum queries")
