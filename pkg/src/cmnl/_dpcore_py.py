"""Pure-numpy fallback for the DP table-fill kernel.

Implements exactly the contract of the compiled kernel in _dpcore.pyx:
same relaxation order (products ascending, schedules ascending, strict
improvement only), so both kernels produce bit-identical tables and
backpointers. The reported step count is the dense sweep size
n * cells * schedules, identical to the compiled kernel's accounting.
"""

from __future__ import annotations

import numpy as np


def fill(radix, delta_digits, cost, admissible, h, bp):
    dims = tuple(int(r) for r in radix)
    n, S, D = delta_digits.shape
    cells = h.shape[0]

    h_cur = h.reshape(dims).copy()
    for j in range(n):
        h_next = h_cur.copy()  # the empty schedule
        bp_layer = bp[j].reshape(dims)
        for s in range(1, S):
            if not admissible[j, s]:
                continue
            delta = delta_digits[j, s]
            if any(delta[g] >= dims[g] for g in range(D)):
                continue  # cannot fit anywhere
            src = tuple(slice(0, dims[g] - int(delta[g])) for g in range(D))
            dst = tuple(slice(int(delta[g]), dims[g]) for g in range(D))
            cand = h_cur[src] + cost[j, s]
            view = h_next[dst]
            mask = cand < view
            if mask.any():
                view[mask] = cand[mask]
                bp_layer[dst][mask] = s
        h_cur = h_next
    h.reshape(dims)[...] = h_cur
    return int(n) * int(cells) * int(S)
