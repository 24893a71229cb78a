# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled table-fill kernel for the patience-constrained grid DP.

Contract (shared with the numpy fallback in _dpcore_py): given one guess's
discretized placement deltas, sweep products in order and relax every
(cell, schedule) pair against the previous layer, keeping the minimum
display cost per cell. The sweep is dense by design; its step count is the
fixed figure n * cells * schedules, which is what the complexity accounting
measures.
"""

import numpy as np

from libc.math cimport HUGE_VAL
from libc.string cimport memcpy


def fill(radix, delta_digits, cost, admissible, h, bp):
    """Run the layered relaxation in place.

    radix        int64[D]      digit sizes (D = 3 * stages)
    delta_digits int64[n,S,D]  per product, schedule: digit increments
    cost         float64[n,S]  display cost of the schedule
    admissible   uint8[n,S]    schedule allowed under this guess
    h            float64[cells] in: seed layer; out: final layer
    bp           int16[n,cells] out: chosen schedule per product per cell
    Returns the dense step count n * cells * S.
    """
    cdef long long[::1] radix_v = np.ascontiguousarray(radix, dtype=np.int64)
    cdef long long[:, :, ::1] dd = np.ascontiguousarray(delta_digits, dtype=np.int64)
    cdef double[:, ::1] cost_v = np.ascontiguousarray(cost, dtype=np.float64)
    cdef unsigned char[:, ::1] adm = np.ascontiguousarray(admissible, dtype=np.uint8)
    cdef double[::1] h_v = h
    cdef short[:, ::1] bp_v = bp

    cdef Py_ssize_t n = dd.shape[0]
    cdef Py_ssize_t S = dd.shape[1]
    cdef Py_ssize_t D = dd.shape[2]
    cdef Py_ssize_t cells = h_v.shape[0]

    # row-major strides per digit
    stride_np = np.ones(D, dtype=np.int64)
    cdef Py_ssize_t g
    for g in range(D - 2, -1, -1):
        stride_np[g] = stride_np[g + 1] * radix_v[g + 1]
    cdef long long[::1] stride = stride_np

    # flatten per-(product, schedule) deltas and touched-digit caps
    fdelta_np = np.zeros((n, S), dtype=np.int64)
    tidx_np = np.full((n, S, D), -1, dtype=np.int32)
    tcap_np = np.zeros((n, S, D), dtype=np.int64)
    tlen_np = np.zeros((n, S), dtype=np.int32)
    cdef Py_ssize_t j, s, t
    for j in range(n):
        for s in range(S):
            t = 0
            for g in range(D):
                if dd[j, s, g] > 0:
                    fdelta_np[j, s] += dd[j, s, g] * stride_np[g]
                    tidx_np[j, s, t] = g
                    tcap_np[j, s, t] = radix_v[g] - 1 - dd[j, s, g]
                    t += 1
            tlen_np[j, s] = t
    cdef long long[:, ::1] fdelta = fdelta_np
    cdef int[:, :, ::1] tidx = tidx_np
    cdef long long[:, :, ::1] tcap = tcap_np
    cdef int[:, ::1] tlen = tlen_np

    cur_np = np.array(h, dtype=np.float64, copy=True)
    nxt_np = np.empty(cells, dtype=np.float64)
    cdef double[::1] cur = cur_np
    cdef double[::1] nxt = nxt_np
    cdef double[::1] tmp

    dig_np = np.zeros(D, dtype=np.int64)
    cdef long long[::1] dig = dig_np

    cdef Py_ssize_t src, dst
    cdef double hsrc, cand
    cdef bint ok

    for j in range(n):
        memcpy(&nxt[0], &cur[0], cells * sizeof(double))  # the empty schedule
        for g in range(D):
            dig[g] = 0
        for src in range(cells):
            hsrc = cur[src]
            if hsrc < HUGE_VAL:
                for s in range(1, S):
                    if adm[j, s]:
                        ok = True
                        for t in range(tlen[j, s]):
                            if dig[tidx[j, s, t]] > tcap[j, s, t]:
                                ok = False
                                break
                        if ok:
                            dst = src + fdelta[j, s]
                            cand = hsrc + cost_v[j, s]
                            if cand < nxt[dst]:
                                nxt[dst] = cand
                                bp_v[j, dst] = <short> s
            # odometer over the digit vector
            g = D - 1
            while g >= 0:
                dig[g] += 1
                if dig[g] == radix_v[g]:
                    dig[g] = 0
                    g -= 1
                else:
                    break
        tmp = cur
        cur = nxt
        nxt = tmp

    cdef Py_ssize_t c
    for c in range(cells):
        h_v[c] = cur[c]
    return int(n) * int(cells) * int(S)
