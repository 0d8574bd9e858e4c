"""Key-alternating ciphers over small block sizes.

A t-round KAC maps ``x`` to ``k_t ^ P_t(k_{t-1} ^ P_{t-1}(... P_1(k_0 ^ x)))``.
Permutations are dense lookup tables with precomputed inverses, so every
forward or inverse evaluation is a single array index.  All evaluation
helpers accept either Python ints or NumPy integer arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

MIN_BITS = 2
MAX_BITS = 24
# experiments below this size give vacuous statistics
MIN_EXPERIMENT_BITS = 3

WORD_DTYPE = np.int64


class UnsupportedBlockSize(ValueError):
    pass


def check_block_size(n: int, minimum: int = MIN_BITS) -> None:
    if not isinstance(n, (int, np.integer)) or not minimum <= n <= MAX_BITS:
        raise UnsupportedBlockSize(
            f"unsupported block size n={n!r} (supported: {minimum} <= n <= {MAX_BITS})"
        )


def check_word(x, n: int) -> None:
    arr = np.asarray(x)
    if arr.size and (arr.min() < 0 or arr.max() >= (1 << n)):
        raise ValueError(f"word out of range for n={n}")


class Direction(str, Enum):
    FWD = "fwd"
    INV = "inv"


def _direction(d) -> Direction:
    if isinstance(d, Direction):
        return d
    aliases = {"fwd": Direction.FWD, "forward": Direction.FWD, "encrypt": Direction.FWD,
               "inv": Direction.INV, "inverse": Direction.INV, "decrypt": Direction.INV}
    try:
        return aliases[str(d).lower()]
    except KeyError:
        raise ValueError(f"unknown direction {d!r}") from None


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection on n-bit words stored as forward and inverse tables."""

    n: int
    table: np.ndarray
    inverse_table: np.ndarray

    @classmethod
    def from_table(cls, table: Sequence[int], n: int | None = None) -> "Permutation":
        tbl = np.array(table, dtype=WORD_DTYPE)
        if n is None:
            n = int(len(tbl)).bit_length() - 1
        check_block_size(n)
        if tbl.shape != (1 << n,):
            raise ValueError(f"table length {tbl.shape} does not match n={n}")
        inv = np.full(1 << n, -1, dtype=WORD_DTYPE)
        check_word(tbl, n)
        inv[tbl] = np.arange(1 << n, dtype=WORD_DTYPE)
        if (inv < 0).any():
            raise ValueError("table is not a bijection")
        return cls(n, _readonly(tbl), _readonly(inv))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls.from_table(np.arange(1 << n), n)

    def forward(self, x):
        return self.table[x]

    def inverse(self, y):
        return self.inverse_table[y]

    def apply(self, direction, x):
        if _direction(direction) is Direction.FWD:
            return self.table[x]
        return self.inverse_table[x]

    def to_json(self) -> str:
        return json.dumps(self.table.tolist(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Permutation":
        return cls.from_table(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def __repr__(self):
        return f"Permutation(n={self.n})"


def make_random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    check_block_size(n)
    tbl = rng.permutation(1 << n).astype(WORD_DTYPE)
    inv = np.empty_like(tbl)
    inv[tbl] = np.arange(1 << n, dtype=WORD_DTYPE)
    return Permutation(n, _readonly(tbl), _readonly(inv))


def apply_permutation(p: Permutation, direction, x):
    check_word(x, p.n)
    return p.apply(direction, x)


class KeyDistKind(str, Enum):
    INDEPENDENT = "independent"
    ALL_EQUAL = "all-equal"
    FIRST_LAST_EQUAL = "first-last-equal"
    REPEATED_EXCEPT = "repeated-except"


@dataclass(frozen=True)
class KeyDistribution:
    kind: KeyDistKind = KeyDistKind.INDEPENDENT
    index: int | None = None

    @classmethod
    def independent(cls):
        return cls(KeyDistKind.INDEPENDENT)

    @classmethod
    def all_equal(cls):
        return cls(KeyDistKind.ALL_EQUAL)

    @classmethod
    def first_last_equal(cls):
        return cls(KeyDistKind.FIRST_LAST_EQUAL)

    @classmethod
    def repeated_except(cls, j: int):
        return cls(KeyDistKind.REPEATED_EXCEPT, int(j))

    def validate(self, t: int) -> None:
        if t < 1:
            raise ValueError("round count t must be >= 1")
        if self.kind is KeyDistKind.FIRST_LAST_EQUAL and t != 2:
            raise ValueError("first-last-equal keys are only defined for t = 2")
        if self.kind is KeyDistKind.REPEATED_EXCEPT:
            if self.index is None or not 0 <= self.index <= t:
                raise ValueError(f"repeated-except index must lie in [0, {t}]")

    @property
    def tag(self) -> str:
        if self.kind is KeyDistKind.REPEATED_EXCEPT:
            return f"{self.kind.value}:{self.index}"
        return self.kind.value

    @classmethod
    def parse(cls, tag: str) -> "KeyDistribution":
        kind, _, idx = tag.partition(":")
        kind = KeyDistKind(kind)
        if kind is KeyDistKind.REPEATED_EXCEPT:
            return cls(kind, int(idx))
        return cls(kind)

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class KeySchedule:
    keys: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.keys) - 1

    def __getitem__(self, i):
        return self.keys[i]

    def __iter__(self):
        return iter(self.keys)

    def __len__(self):
        return len(self.keys)


def sample_key_schedule(dist: KeyDistribution, t: int, n: int,
                        rng: np.random.Generator) -> KeySchedule:
    dist.validate(t)
    check_block_size(n)

    def word():
        return int(rng.integers(1 << n))

    if dist.kind is KeyDistKind.INDEPENDENT:
        keys = [word() for _ in range(t + 1)]
    elif dist.kind is KeyDistKind.ALL_EQUAL:
        keys = [word()] * (t + 1)
    elif dist.kind is KeyDistKind.FIRST_LAST_EQUAL:
        k0, k1 = word(), word()
        keys = [k0, k1, k0]
    else:
        shared, distinct = word(), word()
        keys = [shared] * (t + 1)
        keys[dist.index] = distinct
    return KeySchedule(tuple(keys))


@dataclass(frozen=True)
class KacInstance:
    n: int
    t: int
    perms: tuple[Permutation, ...]
    schedule: KeySchedule
    dist: KeyDistribution = KeyDistribution()

    def __post_init__(self):
        check_block_size(self.n)
        if len(self.perms) != self.t:
            raise ValueError(f"expected {self.t} permutations, got {len(self.perms)}")
        if len(self.schedule) != self.t + 1:
            raise ValueError(f"expected {self.t + 1} round keys, got {len(self.schedule)}")
        if any(p.n != self.n for p in self.perms):
            raise ValueError("permutation block size mismatch")
        check_word(np.array(self.schedule.keys), self.n)
        self.dist.validate(self.t)

    @property
    def keys(self) -> tuple[int, ...]:
        return self.schedule.keys

    def encrypt(self, x):
        k = self.schedule.keys
        v = np.bitwise_xor(x, k[0])
        for i, p in enumerate(self.perms, start=1):
            v = np.bitwise_xor(p.table[v], k[i])
        return v if isinstance(v, np.ndarray) else int(v)

    def decrypt(self, y):
        k = self.schedule.keys
        v = y
        for i in range(self.t, 0, -1):
            v = self.perms[i - 1].inverse_table[np.bitwise_xor(v, k[i])]
        v = np.bitwise_xor(v, k[0])
        return v if isinstance(v, np.ndarray) else int(v)

    def codebook(self) -> np.ndarray:
        return self.encrypt(np.arange(1 << self.n, dtype=WORD_DTYPE))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "perm_tables": [p.table.tolist() for p in self.perms],
            "keys": list(self.schedule.keys),
            "dist": self.dist.tag,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KacInstance":
        perms = tuple(Permutation.from_table(tbl, d["n"]) for tbl in d["perm_tables"])
        return cls(d["n"], d["t"], perms, KeySchedule(tuple(d["keys"])),
                   KeyDistribution.parse(d["dist"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "KacInstance":
        return cls.from_dict(json.loads(text))


def kac_apply(inst: KacInstance, direction, x):
    check_word(x, inst.n)
    if _direction(direction) is Direction.FWD:
        return inst.encrypt(x)
    return inst.decrypt(x)


def random_instance(n: int, t: int, rng: np.random.Generator,
                    dist: KeyDistribution | None = None) -> KacInstance:
    dist = dist or KeyDistribution.independent()
    perms = tuple(make_random_permutation(n, rng) for _ in range(t))
    return KacInstance(n, t, perms, sample_key_schedule(dist, t, n, rng), dist)
