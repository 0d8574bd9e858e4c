"""NumPy reference for the candidate-counting kernel.

``mats[i]`` holds key word i for every pair of set indices:
``mats[i][a, b]`` combines element a of set i with element b of set i+1,
and the last matrix wraps around to set 0.  A candidate is the
concatenation of its t+1 words, most significant word first.
"""
import numpy as np


def pack_candidates(mats, n):
    t = len(mats) - 1
    dims = [m.shape[0] for m in mats]
    acc = None
    for i in range(t):
        shape = [1] * (t + 1)
        shape[i], shape[i + 1] = dims[i], dims[i + 1]
        word = np.asarray(mats[i], dtype=np.uint64).reshape(shape)
        acc = word if acc is None else (acc << np.uint64(n)) | word
    shape = [1] * (t + 1)
    shape[0], shape[t] = dims[0], dims[t]
    last = np.asarray(mats[t], dtype=np.uint64).T.reshape(shape)
    acc = (acc << np.uint64(n)) | last
    return np.broadcast_to(acc, dims).ravel()


def candidate_counts(mats, n):
    mats = [np.asarray(m, dtype=np.int64) for m in mats]
    t = len(mats) - 1
    if t < 1:
        raise ValueError("need at least two key-word matrices")
    for i in range(t + 1):
        if mats[i].shape[1] != mats[(i + 1) % (t + 1)].shape[0]:
            raise ValueError("key-word matrix shapes do not chain")
    if any(m.size == 0 for m in mats):
        return np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64)
    keys, counts = np.unique(pack_candidates(mats, n), return_counts=True)
    return keys, counts.astype(np.int64)


def heavy_candidates(mats, n, threshold):
    keys, counts = candidate_counts(mats, n)
    sel = counts >= threshold
    return keys[sel], counts[sel]


class CandidateCounter:
    """Multiset of packed candidates that tracks how many reach ``threshold``."""

    def __init__(self, threshold):
        if threshold < 1:
            raise ValueError("threshold must be positive")
        self.threshold = threshold
        self.heavy = 0
        self.total = 0
        self._map = {}

    def add(self, keys):
        uniq, mult = np.unique(np.asarray(keys, dtype=np.uint64), return_counts=True)
        m = self._map
        for key, c in zip(uniq.tolist(), mult.tolist()):
            old = m.get(key, 0)
            m[key] = old + c
            if old < self.threshold <= old + c:
                self.heavy += 1
        self.total += int(mult.sum())

    def remove(self, keys):
        uniq, mult = np.unique(np.asarray(keys, dtype=np.uint64), return_counts=True)
        m = self._map
        for key, c in zip(uniq.tolist(), mult.tolist()):
            old = m.get(key, 0)
            if old < c:
                raise KeyError(f"candidate {key} not present")
            if old >= self.threshold > old - c:
                self.heavy -= 1
            if old == c:
                del m[key]
            else:
                m[key] = old - c
        self.total -= int(mult.sum())

    def count(self, key):
        return self._map.get(int(key), 0)

    def heavy_items(self):
        items = sorted((k, c) for k, c in self._map.items() if c >= self.threshold)
        return (np.array([k for k, _ in items], dtype=np.uint64),
                np.array([c for _, c in items], dtype=np.int64))

    def __len__(self):
        return len(self._map)
