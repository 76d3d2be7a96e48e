"""Pure-numpy tree walker, used when the compiled extension is unavailable.

Performs exactly the same integer and floating-point operations as
``_kernel.pyx`` so both backends agree bit for bit.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV_2_53 = 1.0 / (1 << 53)


def mix64(x):
    z = x + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def walk_tree(child_start, child_count, cumulative, child, leaf_of, base_key, start, stop):
    """Leaf index reached by each trial in ``range(start, stop)``."""
    n = stop - start
    with np.errstate(over="ignore"):
        keys = mix64(np.uint64(base_key) + np.arange(start, stop, dtype=np.uint64))
        node = np.zeros(n, dtype=np.int64)
        draws = np.zeros(n, dtype=np.uint64)
        active = np.flatnonzero(child_count[node] > 0)
        while active.size:
            cur = node[active]
            count = child_count[cur]
            first = child_start[cur]
            single = count == 1
            if single.any():
                node[active[single]] = child[first[single]]
            multi = ~single
            if multi.any():
                idx = active[multi]
                c = count[multi]
                f = first[multi]
                d = draws[idx]
                u = (mix64(keys[idx] + d * np.uint64(2)) >> _S11).astype(np.float64) * _INV_2_53
                k = np.zeros(idx.size, dtype=np.int64)
                done = np.zeros(idx.size, dtype=bool)
                for j in range(int(c.max())):
                    hit = ~done & ((j >= c - 1) | (u < cumulative[f + np.minimum(j, c - 1)]))
                    k[hit] = j
                    done |= hit
                node[idx] = child[f + k]
                draws[idx] = d + np.uint64(1)
            active = active[child_count[node[active]] > 0]
    return leaf_of[node]
