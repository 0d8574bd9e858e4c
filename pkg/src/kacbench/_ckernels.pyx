# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled candidate counting.

Same contract as ``kacbench._kernels_py``: given the t+1 pairwise key-word
matrices, count how many index tuples produce each packed candidate.

The leading key word depends only on the first index pair, so pairs are
ordered by that word once (a small NumPy argsort).  Each run of pairs
sharing a leading word then yields one chunk of low-order bits, which is
radix-sorted while it sits in cache and run-length counted straight into
the output.  No pass ever touches the full tuple array.

``CandidateCounter`` keeps counts under tuple insertions and removals,
which is what a walk step needs.  It uses an open-addressing table with
linear probing and backward-shift deletion.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.string cimport memset
from libcpp.vector cimport vector

cnp.import_array()

cdef enum:
    DIGIT = 8
    RADIX = 256
    SMALL = 48

ctypedef int64_t *row_ptr


cdef void _insertion_sort(uint64_t *a, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef uint64_t v
    for i in range(1, m):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


cdef uint64_t *_radix_sort(uint64_t *a, uint64_t *b, Py_ssize_t m, int bits,
                           Py_ssize_t *h) noexcept nogil:
    """Sort ``a[:m]`` with scratch ``b``; ``h`` holds passes*RADIX counters.

    Returns whichever buffer ends up holding the result.
    """
    cdef int passes = (bits + DIGIT - 1) // DIGIT
    cdef int p
    cdef Py_ssize_t k, s, c
    cdef Py_ssize_t *hp
    cdef uint64_t v
    cdef uint64_t *tmp
    if m <= SMALL:
        _insertion_sort(a, m)
        return a
    memset(h, 0, passes * RADIX * sizeof(Py_ssize_t))
    for k in range(m):
        v = a[k]
        for p in range(passes):
            h[p * RADIX + ((v >> (p * DIGIT)) & (RADIX - 1))] += 1
    for p in range(passes):
        hp = h + p * RADIX
        if hp[(a[0] >> (p * DIGIT)) & (RADIX - 1)] == m:
            continue  # all keys share this digit
        s = 0
        for k in range(RADIX):
            c = hp[k]
            hp[k] = s
            s += c
        for k in range(m):
            c = (a[k] >> (p * DIGIT)) & (RADIX - 1)
            b[hp[c]] = a[k]
            hp[c] += 1
        tmp = a
        a = b
        b = tmp
    return a


cdef Py_ssize_t _count_sorted(int n, uint64_t *keys_out, int64_t *counts_out,
                              const int64_t *order, Py_ssize_t npairs, Py_ssize_t inner,
                              row_ptr *rows, Py_ssize_t *strides, Py_ssize_t *dims,
                              Py_ssize_t t) except -1:
    """Group pairs by leading word, sort each chunk, run-length count into the output."""
    cdef int low_bits = <int> (t * n)
    cdef Py_ssize_t g0 = 0, g1, q, k, m, used = 0, i
    cdef uint64_t w0, rest, prev
    cdef int64_t run
    cdef vector[Py_ssize_t] hist = vector[Py_ssize_t](((low_bits + DIGIT - 1) // DIGIT + 1) * RADIX)
    cdef vector[Py_ssize_t] idx = vector[Py_ssize_t](t + 1, 0)
    cdef vector[uint64_t] chunk
    cdef vector[uint64_t] scratch
    cdef uint64_t *s
    with nogil:
        while g0 < npairs:
            w0 = <uint64_t> rows[0][order[g0]]
            g1 = g0 + 1
            while g1 < npairs and <uint64_t> rows[0][order[g1]] == w0:
                g1 += 1
            m = (g1 - g0) * inner
            if <Py_ssize_t> chunk.size() < m:
                chunk.resize(m)
                scratch.resize(m)
            k = 0
            for q in range(g0, g1):
                idx[0] = order[q] // strides[0]
                idx[1] = order[q] % strides[0]
                for i in range(2, t + 1):
                    idx[i] = 0
                while True:
                    rest = 0
                    for i in range(1, t):
                        rest = (rest << n) | <uint64_t> rows[i][idx[i] * strides[i] + idx[i + 1]]
                    rest = (rest << n) | <uint64_t> rows[t][idx[t] * strides[t] + idx[0]]
                    chunk[k] = rest
                    k += 1
                    # odometer over indices 2..t, last fastest
                    i = t
                    while i >= 2:
                        idx[i] += 1
                        if idx[i] < dims[i]:
                            break
                        idx[i] = 0
                        i -= 1
                    if i < 2:
                        break
            s = _radix_sort(chunk.data(), scratch.data(), m, low_bits, hist.data())
            prev = s[0]
            run = 1
            for k in range(1, m):
                if s[k] == prev:
                    run += 1
                else:
                    keys_out[used] = (w0 << low_bits) | prev
                    counts_out[used] = run
                    used += 1
                    prev = s[k]
                    run = 1
            keys_out[used] = (w0 << low_bits) | prev
            counts_out[used] = run
            used += 1
            g0 = g1
    return used


def candidate_counts(list mats, int n):
    cdef Py_ssize_t t = len(mats) - 1
    cdef Py_ssize_t i, total = 1, inner = 1
    if t < 1:
        raise ValueError("need at least two key-word matrices")
    cdef vector[Py_ssize_t] dims = vector[Py_ssize_t](t + 1)
    cdef vector[Py_ssize_t] strides = vector[Py_ssize_t](t + 1)
    cdef vector[row_ptr] rows = vector[row_ptr](t + 1)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] m
    arrays = []
    for i in range(t + 1):
        m = np.ascontiguousarray(mats[i], dtype=np.int64)
        arrays.append(m)
        dims[i] = m.shape[0]
        strides[i] = m.shape[1]
        rows[i] = <int64_t *> m.data
        total *= dims[i]
        if i >= 2:
            inner *= dims[i]
    for i in range(t + 1):
        if strides[i] != dims[(i + 1) % (t + 1)]:
            raise ValueError("key-word matrix shapes do not chain")
    if total == 0:
        return np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(
        arrays[0].ravel(), kind="stable").astype(np.int64)
    keys = np.empty(total, dtype=np.uint64)
    counts = np.empty(total, dtype=np.int64)
    cdef uint64_t[::1] kv = keys
    cdef int64_t[::1] cv = counts
    cdef Py_ssize_t used = _count_sorted(n, &kv[0], &cv[0], <int64_t *> order.data,
                                         order.shape[0], inner, rows.data(), strides.data(),
                                         dims.data(), t)
    return keys[:used].copy(), counts[:used].copy()


def heavy_candidates(list mats, int n, Py_ssize_t threshold):
    """Only the candidates produced by at least ``threshold`` tuples, sorted by key."""
    keys, counts = candidate_counts(mats, n)
    sel = counts >= threshold
    return keys[sel], counts[sel]


cdef inline uint64_t _mix(uint64_t k) noexcept nogil:
    k ^= k >> 33
    k *= 0xff51afd7ed558ccdULL
    k ^= k >> 33
    return k


cdef class CandidateCounter:
    """Multiset of packed candidates that tracks how many reach ``threshold``."""

    cdef vector[uint64_t] _keys
    cdef vector[int64_t] _counts  # 0 marks an empty slot
    cdef uint64_t _mask
    cdef Py_ssize_t _size
    cdef readonly Py_ssize_t threshold
    cdef readonly Py_ssize_t heavy
    cdef readonly Py_ssize_t total

    def __init__(self, Py_ssize_t threshold):
        if threshold < 1:
            raise ValueError("threshold must be positive")
        self.threshold = threshold
        self.heavy = 0
        self.total = 0
        self._size = 0
        self._alloc(64)

    cdef void _alloc(self, Py_ssize_t cap):
        self._keys.assign(cap, 0)
        self._counts.assign(cap, 0)
        self._mask = cap - 1

    cdef void _grow(self):
        cdef vector[uint64_t] old_keys = self._keys
        cdef vector[int64_t] old_counts = self._counts
        cdef Py_ssize_t k
        cdef uint64_t j
        self._alloc(2 * old_keys.size())
        for k in range(<Py_ssize_t> old_keys.size()):
            if old_counts[k]:
                j = _mix(old_keys[k]) & self._mask
                while self._counts[j]:
                    j = (j + 1) & self._mask
                self._keys[j] = old_keys[k]
                self._counts[j] = old_counts[k]

    cdef uint64_t _slot(self, uint64_t key) noexcept:
        """Slot holding ``key``, else the empty slot where it would go."""
        cdef uint64_t j = _mix(key) & self._mask
        while self._counts[j] and self._keys[j] != key:
            j = (j + 1) & self._mask
        return j

    cdef void _erase(self, uint64_t i) noexcept:
        cdef uint64_t j = i, home
        while True:
            j = (j + 1) & self._mask
            if not self._counts[j]:
                break
            home = _mix(self._keys[j]) & self._mask
            # move j back into the hole unless its home lies cyclically in (i, j]
            if ((j - home) & self._mask) >= ((j - i) & self._mask):
                self._keys[i] = self._keys[j]
                self._counts[i] = self._counts[j]
                i = j
        self._counts[i] = 0
        self._size -= 1

    def add(self, keys):
        cdef const uint64_t[::1] kv = np.ascontiguousarray(keys, dtype=np.uint64)
        cdef Py_ssize_t k
        cdef uint64_t j
        for k in range(kv.shape[0]):
            j = self._slot(kv[k])
            if not self._counts[j]:
                if 2 * (self._size + 1) > <Py_ssize_t> self._keys.size():
                    self._grow()
                    j = self._slot(kv[k])
                self._keys[j] = kv[k]
                self._size += 1
            self._counts[j] += 1
            if self._counts[j] == self.threshold:
                self.heavy += 1
        self.total += kv.shape[0]

    def remove(self, keys):
        cdef const uint64_t[::1] kv = np.ascontiguousarray(keys, dtype=np.uint64)
        cdef Py_ssize_t k
        cdef uint64_t j
        for k in range(kv.shape[0]):
            j = self._slot(kv[k])
            if not self._counts[j]:
                raise KeyError(f"candidate {kv[k]} not present")
            if self._counts[j] == self.threshold:
                self.heavy -= 1
            self._counts[j] -= 1
            self.total -= 1
            if not self._counts[j]:
                self._erase(j)

    def count(self, uint64_t key):
        cdef uint64_t j = self._slot(key)
        return self._counts[j]

    def heavy_items(self):
        """Keys at or above the threshold with their counts, sorted by key."""
        cdef Py_ssize_t k
        keys, counts = [], []
        for k in range(<Py_ssize_t> self._keys.size()):
            if self._counts[k] >= self.threshold:
                keys.append(self._keys[k])
                counts.append(self._counts[k])
        keys = np.array(keys, dtype=np.uint64)
        order = np.argsort(keys, kind="stable")
        return keys[order], np.array(counts, dtype=np.int64)[order]

    def __len__(self):
        return self._size
