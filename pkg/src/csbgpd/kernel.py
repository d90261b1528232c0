"""Chain-decomposition kernel selection.

The hot loop, walking every backward chain of a dense predecessor table
with memoization, ships twice: a compiled Cython extension and a pure
Python twin with identical semantics.  The compiled kernel is preferred
at import time; the pure one is always available and the benchmark
compares both.

Kernel contract: ``decompose_chains(pred)`` takes an int32 array where
``pred[x]`` is the unique predecessor of x or a root sentinel: ``-1``
for a root outside the backward image (an X-side stopper), ``-3`` for a
root inside it (a Y-side stopper), and ``-2`` when a predecessor exists
but lies outside the window.  Callers classify roots up front; the
kernel never looks at the maps.  It returns ``(kinds, roots, depths)``:

* ``kinds[x]`` is one of the ``KIND_*`` codes below;
* ``roots[x]`` is the chain end for stoppers, the smallest cycle element
  for cyclic chains, and the last in-window element otherwise;
* ``depths[x]`` counts backward steps from x to that root element.
"""

from __future__ import annotations

from . import _chainkernel_py

KIND_X_STOPPER = 0
KIND_Y_STOPPER = 1
KIND_CYCLIC = 2
KIND_UNDETERMINED = 3

try:
    from . import _chainkernel  # type: ignore[attr-defined]

    BACKEND = "compiled"
except ImportError:  # build without the extension: fall back
    _chainkernel = None
    BACKEND = "python"


def available_backends() -> dict[str, object]:
    """Backend modules by name; each provides decompose_chains and
    fill_predecessors with identical semantics."""
    backends: dict[str, object] = {"python": _chainkernel_py}
    if _chainkernel is not None:
        backends["compiled"] = _chainkernel
    return backends


def get_backend(name: str | None = None):
    backends = available_backends()
    if name is None:
        name = BACKEND
    if name not in backends:
        raise ValueError(f"kernel backend {name!r} not available")
    return backends[name]


decompose_chains = get_backend().decompose_chains
fill_predecessors = get_backend().fill_predecessors
