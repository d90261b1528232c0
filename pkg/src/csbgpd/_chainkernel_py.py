"""Pure-Python chain decomposition, the fallback twin of the compiled kernel.

Same algorithm, same outputs: iterative path walking with memoization,
linear in the window size.  Python lists beat numpy scalar indexing in
this access pattern, so the arrays are converted once at the boundary.
"""

from __future__ import annotations

import numpy as np

_X_STOPPER = 0
_Y_STOPPER = 1
_CYCLIC = 2
_UNDETERMINED = 3

_ROOT_KIND = {-1: _X_STOPPER, -3: _Y_STOPPER, -2: _UNDETERMINED}

_INT32_MAX = 2**31 - 1


def fill_predecessors(pred, written, modulus, residue, a, b, q_start, exc_sources):
    """Scatter one rule's predecessors into `pred`; numpy twin of the
    compiled filler.  Out-of-window predecessors are recorded as -2.
    Returns the updated written-slot count."""
    window = len(pred)
    q_end = -((-(window - b)) // a)  # smallest q with a*q + b >= window
    if q_end <= q_start:
        return written
    q = np.arange(q_start, q_end, dtype=np.int64)
    sources = modulus * q + residue
    values = a * q + b
    lo = int(np.searchsorted(values, 0))
    sources = sources[lo:]
    values = values[lo:]
    exc_sources = np.asarray(exc_sources, dtype=np.int64)
    if len(exc_sources):
        keep = ~np.isin(sources, exc_sources)
        sources = sources[keep]
        values = values[keep]
    pred[values] = np.where(sources < window, sources, -2)
    return written + len(values)


def decompose_chains(pred) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pred_list = np.asarray(pred, dtype=np.int32).tolist()
    n = len(pred_list)
    kinds = [0] * n
    roots = [0] * n
    depths = [0] * n
    state = [0] * n  # 0 new, 1 on current path, 2 done
    pos = [0] * n  # position on the current path while state == 1
    path: list[int] = []

    for start in range(n):
        if state[start] == 2:
            continue
        x = start
        # fast path: resolve in place when the predecessor is settled
        p = pred_list[x]
        if p < 0:
            kinds[x] = _ROOT_KIND[p]
            roots[x] = x
            state[x] = 2
            continue
        if state[p] == 2:
            kinds[x] = kinds[p]
            roots[x] = roots[p]
            depths[x] = depths[p] + 1
            state[x] = 2
            continue
        path.clear()
        base_kind = -1
        base_root = -1
        base_depth = -1
        while True:
            state[x] = 1
            pos[x] = len(path)
            path.append(x)
            p = pred_list[x]
            if p < 0:
                base_kind, base_root, base_depth = _ROOT_KIND[p], x, -1
                break
            sp = state[p]
            if sp == 1:
                # the path closed on itself: path[pos[p]:] is a cycle
                cut = pos[p]
                cycle = path[cut:]
                cmin = min(cycle)
                for node in cycle:
                    kinds[node] = _CYCLIC
                    roots[node] = cmin
                    depths[node] = 0
                    state[node] = 2
                for k in range(cut - 1, -1, -1):
                    node = path[k]
                    kinds[node] = _CYCLIC
                    roots[node] = cmin
                    depths[node] = cut - k
                    state[node] = 2
                base_kind = -2  # handled in place
                break
            if sp == 2:
                base_kind, base_root, base_depth = kinds[p], roots[p], depths[p]
                break
            x = p
        if base_kind == -2:
            continue
        d = base_depth
        for k in range(len(path) - 1, -1, -1):
            node = path[k]
            d += 1
            kinds[node] = base_kind
            roots[node] = base_root
            depths[node] = d
            state[node] = 2

    return (
        np.asarray(kinds, dtype=np.uint8),
        np.asarray(roots, dtype=np.int32),
        np.asarray(depths, dtype=np.int32),
    )
