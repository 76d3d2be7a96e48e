# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree walker: the Monte Carlo hot loop."""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t x) nogil:
    cdef uint64_t z = x + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def walk_tree(const int64_t[::1] child_start, const int64_t[::1] child_count,
              const double[::1] cumulative, const int64_t[::1] child,
              const int64_t[::1] leaf_of, uint64_t base_key, int64_t start, int64_t stop):
    """Leaf index reached by each trial in ``range(start, stop)``."""
    cdef int64_t n = stop - start
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] res = out
    cdef int64_t i, node, c, f, k
    cdef uint64_t key, draws
    cdef double u
    with nogil:
        for i in range(n):
            key = mix64(base_key + <uint64_t>(start + i))
            node = 0
            draws = 0
            while child_count[node] > 0:
                c = child_count[node]
                f = child_start[node]
                if c == 1:
                    node = child[f]
                    continue
                u = <double>(mix64(key + 2 * draws) >> 11) * INV_2_53
                draws += 1
                k = 0
                while k < c - 1 and not (u < cumulative[f + k]):
                    k += 1
                node = child[f + k]
            res[i] = leaf_of[node]
    return out
