# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled chain decomposition; see _chainkernel_py for the reference twin."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF X_STOPPER = 0
DEF Y_STOPPER = 1
DEF CYCLIC = 2
DEF UNDETERMINED = 3

INT32_MAX = 2**31 - 1


def fill_predecessors(pred, written, cnp.int64_t modulus, cnp.int64_t residue,
                      cnp.int64_t a, cnp.int64_t b, cnp.int64_t q_start,
                      exc_sources):
    """Scatter one rule's predecessors into `pred` without temporaries.

    Walks n = modulus*q + residue upward from q_start; the values
    a*q + b increase strictly, so the loop stops at the window edge.
    Out-of-window predecessors are recorded as -2.  Returns the updated
    written-slot count.
    """
    cdef cnp.int32_t[::1] pv = pred
    cdef Py_ssize_t window = pv.shape[0]
    cdef cnp.int64_t[::1] exc = np.asarray(exc_sources, dtype=np.int64)
    cdef Py_ssize_t n_exc = exc.shape[0]
    cdef cnp.int64_t q = q_start
    cdef cnp.int64_t n = modulus * q + residue
    cdef cnp.int64_t v = a * q + b
    cdef cnp.int64_t count = written
    cdef Py_ssize_t lo, hi, mid
    cdef int skip
    with nogil:
        while v < window:
            if v >= 0:
                skip = 0
                if n_exc:
                    lo = 0
                    hi = n_exc
                    while lo < hi:
                        mid = (lo + hi) // 2
                        if exc[mid] < n:
                            lo = mid + 1
                        else:
                            hi = mid
                    if lo < n_exc and exc[lo] == n:
                        skip = 1
                if not skip:
                    if n < window:
                        pv[v] = <cnp.int32_t> n
                    else:
                        pv[v] = -2
                    count += 1
            q += 1
            n += modulus
            v += a
    return count


cdef inline int root_kind(cnp.int32_t p) nogil:
    if p == -1:
        return X_STOPPER
    if p == -3:
        return Y_STOPPER
    return UNDETERMINED


def decompose_chains(pred):
    pred_arr = np.ascontiguousarray(pred, dtype=np.int32)
    cdef cnp.int32_t[::1] pv = pred_arr
    cdef Py_ssize_t n = pv.shape[0]

    kinds_arr = np.empty(n, dtype=np.uint8)
    roots_arr = np.empty(n, dtype=np.int32)
    depths_arr = np.empty(n, dtype=np.int32)
    state_arr = np.zeros(n, dtype=np.uint8)
    pos_arr = np.empty(n, dtype=np.int32)
    path_arr = np.empty(n, dtype=np.int32)

    cdef cnp.uint8_t[::1] kinds = kinds_arr
    cdef cnp.int32_t[::1] roots = roots_arr
    cdef cnp.int32_t[::1] depths = depths_arr
    cdef cnp.uint8_t[::1] state = state_arr
    cdef cnp.int32_t[::1] pos = pos_arr
    cdef cnp.int32_t[::1] path = path_arr

    cdef Py_ssize_t start, top, k, cut
    cdef cnp.int32_t x, p, node, cmin, d
    cdef int base_kind
    cdef cnp.int32_t base_root, base_depth
    cdef int handled

    with nogil:
        for start in range(n):
            if state[start] == 2:
                continue
            x = <cnp.int32_t> start
            # fast path: resolve in place when the predecessor is settled
            p = pv[x]
            if p < 0:
                kinds[x] = <cnp.uint8_t> root_kind(p)
                roots[x] = x
                depths[x] = 0
                state[x] = 2
                continue
            if state[p] == 2:
                kinds[x] = kinds[p]
                roots[x] = roots[p]
                depths[x] = depths[p] + 1
                state[x] = 2
                continue
            top = 0
            base_kind = 0
            base_root = -1
            base_depth = -1
            handled = 0
            while True:
                state[x] = 1
                pos[x] = <cnp.int32_t> top
                path[top] = x
                top += 1
                p = pv[x]
                if p < 0:
                    base_kind = root_kind(p)
                    base_root = x
                    base_depth = -1
                    break
                if state[p] == 1:
                    cut = pos[p]
                    cmin = path[cut]
                    for k in range(cut, top):
                        if path[k] < cmin:
                            cmin = path[k]
                    for k in range(cut, top):
                        node = path[k]
                        kinds[node] = CYCLIC
                        roots[node] = cmin
                        depths[node] = 0
                        state[node] = 2
                    for k in range(cut - 1, -1, -1):
                        node = path[k]
                        kinds[node] = CYCLIC
                        roots[node] = cmin
                        depths[node] = <cnp.int32_t> (cut - k)
                        state[node] = 2
                    handled = 1
                    break
                if state[p] == 2:
                    base_kind = kinds[p]
                    base_root = roots[p]
                    base_depth = depths[p]
                    break
                x = p
            if handled:
                continue
            d = base_depth
            for k in range(top - 1, -1, -1):
                node = path[k]
                d += 1
                kinds[node] = base_kind
                roots[node] = base_root
                depths[node] = d
                state[node] = 2

    return kinds_arr, roots_arr, depths_arr
