"""Candidate generation and multiplicity counting.

Backend is chosen at import: the compiled ``_ckernels`` module when it is
built, else the NumPy implementation.  Set ``KACBENCH_PURE_PYTHON=1`` to
force the fallback.  Both return identical, key-sorted results.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels_py

_BACKENDS = {"python": _kernels_py}
if not os.environ.get("KACBENCH_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        _BACKENDS["cython"] = _ckernels

BACKEND = "cython" if "cython" in _BACKENDS else "python"


def available_backends() -> tuple[str, ...]:
    return tuple(_BACKENDS)


def key_word_matrices(xs: Sequence[np.ndarray], images: Sequence[np.ndarray]) -> list:
    """Pairwise key words for every tuple in ``xs[0] x ... x xs[t]``.

    ``images[0]`` holds E on ``xs[0]`` and ``images[i]`` holds P_i on ``xs[i]``.
    """
    t = len(xs) - 1
    xs = [np.asarray(x, dtype=np.int64) for x in xs]
    ys = [np.asarray(y, dtype=np.int64) for y in images]
    mats = [np.bitwise_xor.outer(xs[0], xs[1])]
    for i in range(1, t):
        mats.append(np.bitwise_xor.outer(ys[i], xs[i + 1]))
    mats.append(np.bitwise_xor.outer(ys[t], ys[0]))
    return mats


def _check_width(t: int, n: int) -> None:
    if t < 1:
        raise ValueError("need at least one round")
    if (t + 1) * n > 64:
        raise ValueError(f"candidates of {(t + 1) * n} bits do not fit a 64-bit word")


def backend_module(backend: str | None = None):
    return _BACKENDS[backend or BACKEND]


def candidate_counts(xs, images, n: int, backend: str | None = None):
    """Distinct packed candidates and how many input tuples generate each."""
    _check_width(len(xs) - 1, n)
    return backend_module(backend).candidate_counts(key_word_matrices(xs, images), n)


def heavy_candidates(xs, images, n: int, threshold: int, backend: str | None = None):
    """Packed candidates generated by at least ``threshold`` tuples."""
    _check_width(len(xs) - 1, n)
    return backend_module(backend).heavy_candidates(key_word_matrices(xs, images), n,
                                                    int(threshold))


def packed_candidates(xs, images, n: int) -> np.ndarray:
    """Every tuple's packed candidate, one entry per tuple (with repeats)."""
    _check_width(len(xs) - 1, n)
    return _kernels_py.pack_candidates(key_word_matrices(xs, images), n)


def make_counter(threshold: int, backend: str | None = None):
    """Incremental candidate multiset from the selected backend."""
    return backend_module(backend).CandidateCounter(int(threshold))


def pack_key(words: Sequence[int], n: int) -> int:
    out = 0
    for w in words:
        out = (out << n) | int(w)
    return out


def unpack_keys(packed: np.ndarray, t: int, n: int) -> np.ndarray:
    packed = np.asarray(packed, dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    cols = [(packed >> np.uint64(n * (t - i))) & mask for i in range(t + 1)]
    return np.stack(cols, axis=-1).astype(np.int64)


@dataclass(frozen=True)
class CandidateMultiset:
    """Key candidates with their generation counts, sorted by packed key."""

    t: int
    n: int
    packed: np.ndarray
    counts: np.ndarray

    @classmethod
    def build(cls, xs, images, n: int, backend: str | None = None):
        keys, counts = candidate_counts(xs, images, n, backend)
        return cls(len(xs) - 1, n, keys, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __len__(self):
        return len(self.packed)

    def count_of(self, key: Sequence[int]) -> int:
        p = np.uint64(pack_key(key, self.n))
        i = np.searchsorted(self.packed, p)
        if i < len(self.packed) and self.packed[i] == p:
            return int(self.counts[i])
        return 0

    def at_least(self, threshold: int) -> list[tuple[int, ...]]:
        sel = self.packed[self.counts >= threshold]
        return [tuple(int(w) for w in row) for row in unpack_keys(sel, self.t, self.n)]

    def histogram(self) -> dict[int, int]:
        mult, freq = np.unique(self.counts, return_counts=True)
        return {int(m): int(f) for m, f in zip(mult, freq)}
