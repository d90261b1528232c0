import numpy as np
import pytest

from csbgpd import kernel
from csbgpd.catalog import named_example
from csbgpd.countable import (
    CYCLIC,
    PROVABLY_INFINITE,
    UNDETERMINED,
    X_STOPPER,
    Y_STOPPER,
    IndexMap,
    backward_chain,
    compose_index_maps,
    decompose_window,
    in_image_mask,
    predecessor_array,
)
from csbgpd.errors import AmbiguousPredecessorError

SHIFT = IndexMap((), 0, 1, ((1, 1),))


def brute_predecessors(imap: IndexMap, window: int, probe: int) -> list[int]:
    """Oracle: scan a much larger domain for forward images."""
    pred = [-1] * window
    for n in range(probe):
        v = imap.apply(n)
        if v is not None and 0 <= v < window:
            assert pred[v] == -1
            pred[v] = n if n < window else -2
    return pred


@pytest.mark.parametrize(
    "imap",
    [
        compose_index_maps(SHIFT, SHIFT),
        IndexMap(((0, 1), (1, 0)), 2, 1, ((1, 0),)),
        IndexMap(((1, 0),), 2, 2, ((2, 2), (2, -1))),
        IndexMap((), 0, 2, ((4, 0), (4, 2))),
    ],
)
def test_predecessor_array_matches_forward_scan(imap):
    window = 60
    computed = predecessor_array(imap, window).tolist()
    expected = brute_predecessors(imap, window, probe=500)
    assert computed == expected


def test_predecessor_array_detects_collisions():
    colliding = IndexMap((), 0, 2, ((2, 0), (2, 0)))
    with pytest.raises(AmbiguousPredecessorError):
        predecessor_array(colliding, 20)


def test_in_image_mask_exact():
    g = IndexMap(((0, 0),), 1, 1, ((1, 0),))  # image is all of N
    values = np.arange(10, dtype=np.int64)
    assert in_image_mask(g, values).all()
    shift = SHIFT  # image is N minus {0}
    mask = in_image_mask(shift, values)
    assert not mask[0] and mask[1:].all()


def all_backends():
    return sorted(kernel.available_backends())


def test_both_backends_available_in_this_build():
    # the compiled extension is part of the build; the pure twin always exists
    assert "python" in all_backends()


@pytest.mark.parametrize("backend", all_backends())
def test_kernel_agrees_with_exact_tracer(backend):
    problems = [
        named_example("evens_odds").payload["problem"],
        named_example("hilbert_hotel").payload["problem"],
    ]
    for problem in problems:
        comp = problem.composite()
        window = 50
        dec = decompose_window(comp, problem.G.index_map, window, backend=backend)
        for x in range(window):
            chain = backward_chain(comp, x, 10_000, g_map=problem.G.index_map)
            assert dec.kind_of(x) == chain.kind
            assert dec.roots[x] == chain.root
            assert dec.depths[x] == chain.steps


@pytest.mark.parametrize("backend", all_backends())
def test_kernel_handles_cycles(backend):
    identity = IndexMap((), 0, 1, ((1, 0),))
    dec = decompose_window(identity, identity, 10, backend=backend)
    assert all(dec.kind_of(x) == CYCLIC for x in range(10))
    assert dec.roots.tolist() == list(range(10))  # 1-cycles: root is the point
    permuted = IndexMap(((0, 1), (1, 2), (2, 0)), 3, 1, ((1, 0),))
    dec = decompose_window(permuted, permuted, 6, backend=backend)
    assert all(dec.kind_of(x) == CYCLIC for x in range(6))
    assert dec.roots[:3].tolist() == [0, 0, 0]  # the 3-cycle reports its minimum


@pytest.mark.parametrize("backend", all_backends())
def test_kernel_reports_out_of_window_as_undetermined(backend):
    # forward-decreasing map: predecessors climb out of any window
    falling = IndexMap((), 2, 1, ((1, -2),))
    window = 12
    dec = decompose_window(falling, falling, window, backend=backend)
    assert {dec.kind_of(x) for x in range(window)} == {UNDETERMINED}
    # the exact tracer proves more: the chain provably diverges
    chain = backward_chain(falling, 0, 50, g_map=falling)
    assert chain.kind == PROVABLY_INFINITE


def test_backends_produce_identical_outputs():
    backends = all_backends()
    if len(backends) < 2:
        pytest.skip("compiled backend not built")
    maps = [
        compose_index_maps(SHIFT, SHIFT),
        IndexMap(((0, 1), (1, 0)), 2, 1, ((1, 0),)),
        IndexMap((), 0, 2, ((4, 0), (4, 2))),
        IndexMap((), 0, 1, ((1, 0),)),
    ]
    for imap in maps:
        pred = predecessor_array(imap, 500)
        results = [kernel.get_backend(b).decompose_chains(pred) for b in backends]
        for arrays in zip(*results):
            for a, b in zip(arrays, arrays[1:]):
                assert np.array_equal(a, b)


def test_unknown_backend_is_rejected():
    with pytest.raises(ValueError):
        kernel.get_backend("gpu")


@pytest.mark.parametrize("backend", all_backends())
def test_large_window_stopper_counts(backend):
    comp = compose_index_maps(SHIFT, SHIFT)
    window = 100_000
    dec = decompose_window(comp, SHIFT, window, backend=backend)
    kinds = dec.kinds
    x_code = kernel.KIND_X_STOPPER
    y_code = kernel.KIND_Y_STOPPER
    assert int((kinds == x_code).sum()) == window // 2
    assert int((kinds == y_code).sum()) == window // 2
    assert dec.depths.max() == window // 2 - 1
