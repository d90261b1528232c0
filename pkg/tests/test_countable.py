import random

import pytest

from csbgpd.catalog import named_example
from csbgpd.countable import (
    CYCLIC,
    EMBEDDING,
    LEFT_CANCELLABLE_ONLY,
    NEITHER,
    PROVABLY_INFINITE,
    UNDETERMINED,
    X_STOPPER,
    Y_STOPPER,
    CountableFamily,
    CountableMap,
    CountableProblem,
    IndexMap,
    backward_chain,
    compose_index_maps,
    construct_h_window,
    embedding_status_countable,
    families_equivalent,
    is_g_point_countable,
    materialize_map,
    validate_countable,
    window_verdicts,
)
from csbgpd.csb import CsbProblem, construct_h
from csbgpd.errors import HypothesisError, PreconditionError
from csbgpd.functors import validate_functor
from csbgpd.groups import GROUP_POOL, cyclic_group


def trivial_family(**overrides) -> CountableFamily:
    base = dict(
        shapes={"1": GROUP_POOL["1"]},
        exceptions={},
        tail_start=0,
        period=1,
        tail_shapes=("1",),
    )
    base.update(overrides)
    return CountableFamily(**base)


def shift_map(offset: int, fam=None) -> CountableMap:
    fam = fam or trivial_family()
    return CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap((), 0, 1, ((1, offset),)),
        exception_homs={},
        rule_homs=((0,),),
    )


def evens_odds() -> CountableProblem:
    return named_example("evens_odds").payload["problem"]


def hilbert_hotel() -> CountableProblem:
    return named_example("hilbert_hotel").payload["problem"]


# --- index maps -----------------------------------------------------------


def test_apply_and_preimages_hand_cases():
    imap = IndexMap(((1, 0),), 2, 2, ((2, 2), (2, -1)))
    assert imap.apply(0) is None
    assert imap.apply(1) == 0
    assert imap.apply(2) == 4  # n = 2q, q = 1 -> 2q + 2
    assert imap.apply(3) == 1  # n = 2q+1, q = 1 -> 2q - 1
    assert imap.preimages(0) == (1,)
    assert imap.preimages(1) == (3,)
    assert imap.preimages(4) == (2,)
    assert imap.preimages(2) == ()


def test_exact_injectivity_check_finds_rule_collisions():
    # both residues produce the even numbers
    colliding = IndexMap((), 0, 2, ((2, 0), (2, 0)))
    assert colliding.check_injective_exact()
    clean = IndexMap((), 0, 2, ((2, 0), (2, 1)))
    assert clean.check_injective_exact() == []


def pointwise_compose_oracle(outer: IndexMap, inner: IndexMap, n: int):
    v = inner.apply(n)
    return None if v is None else outer.apply(v)


@pytest.mark.parametrize(
    "outer,inner",
    [
        (IndexMap((), 0, 1, ((1, 1),)), IndexMap((), 0, 1, ((1, 1),))),
        (IndexMap(((0, 0),), 1, 1, ((1, 0),)), IndexMap((), 0, 1, ((1, 1),))),
        (
            IndexMap(((0, 3), (1, 7)), 2, 2, ((3, 5), (2, 0))),
            IndexMap(((0, 1),), 1, 3, ((2, 4), (1, 9), (3, 2))),
        ),
        (
            IndexMap((), 0, 3, ((3, 0), (3, 1), (3, 2))),
            IndexMap(((2, 11),), 3, 2, ((5, 6), (4, 3))),
        ),
    ],
)
def test_compose_index_maps_matches_pointwise_oracle(outer, inner):
    composite = compose_index_maps(outer, inner)
    for n in range(400):
        assert composite.apply(n) == pointwise_compose_oracle(outer, inner, n), n


# --- validation -----------------------------------------------------------


def test_validate_inclusion_shift_on_constant_family():
    z3 = cyclic_group(3)
    fam = CountableFamily(
        shapes={"z3": z3}, exceptions={}, tail_start=0, period=1, tail_shapes=("z3",)
    )
    cmap = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap((), 0, 1, ((1, 1),)),
        exception_homs={},
        rule_homs=((0, 1, 2),),
    )
    assert validate_countable(cmap, 100) == []


def test_validate_flags_injectivity_collision():
    fam = trivial_family()
    cmap = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap((), 0, 2, ((2, 0), (2, 0))),
        exception_homs={},
        rule_homs=((0,), (0,)),
    )
    report = validate_countable(cmap, 40)
    assert any(v.axiom == "injectivity" for v in report)


def test_validate_flags_rule_overlap():
    fam = trivial_family()
    cmap = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap(((5, 50),), 2, 1, ((1, 0),)),
        exception_homs={5: (0,)},
        rule_homs=((0,),),
    )
    report = validate_countable(cmap, 40)
    assert any(v.axiom == "rule-overlap" for v in report)


def test_validate_flags_shape_mismatch():
    z2 = GROUP_POOL["Z2"]
    mixed = CountableFamily(
        shapes={"1": GROUP_POOL["1"], "z2": z2},
        exceptions={},
        tail_start=0,
        period=2,
        tail_shapes=("1", "z2"),
    )
    # identity index map but a payload that ignores the changing shapes
    cmap = CountableMap(
        source=mixed,
        target=mixed,
        index_map=IndexMap((), 0, 1, ((1, 1),)),
        exception_homs={},
        rule_homs=((0,),),
    )
    report = validate_countable(cmap, 40)
    assert any(v.axiom == "homomorphism" for v in report)


def test_window_precondition():
    with pytest.raises(PreconditionError):
        validate_countable(shift_map(1), 0)


def test_pradic_maps_validate():
    problem = named_example("pradic_pair").payload["problem"]
    assert validate_countable(problem.F, 60) == []
    assert validate_countable(problem.G, 60) == []


# --- embedding status -----------------------------------------------------


def test_embedding_status_trio():
    problem = named_example("pradic_pair").payload["problem"]
    assert embedding_status_countable(problem.F, 50) == EMBEDDING
    assert embedding_status_countable(problem.G, 50) == LEFT_CANCELLABLE_ONLY
    fam = trivial_family()
    squashing = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap((), 0, 2, ((2, 0), (2, 0))),
        exception_homs={},
        rule_homs=((0,), (0,)),
    )
    assert embedding_status_countable(squashing, 40) == NEITHER


def test_materialized_window_agrees_with_checkers():
    problem = named_example("pradic_pair").payload["problem"]
    mat = materialize_map(problem.G, 20)
    assert validate_functor(mat) == []
    from csbgpd.functors import is_embedding_homwise, is_left_cancellable

    assert not is_embedding_homwise(mat)
    assert is_left_cancellable(mat)


# --- backward chains ------------------------------------------------------


def brute_force_chain(problem: CountableProblem, x: int, limit: int = 200):
    """Independent tracer over materialized arrays on [0, limit)."""
    f = [problem.F.index_map.apply(n) for n in range(limit)]
    g = [problem.G.index_map.apply(n) for n in range(limit)]
    composite = [
        g[v] if v is not None and v < limit else None for v in f
    ]
    g_image = {v for v in g if v is not None}
    chain = [x]
    current = x
    while True:
        preds = [n for n, v in enumerate(composite) if v == current]
        assert len(preds) <= 1
        if not preds:
            kind = Y_STOPPER if current in g_image else X_STOPPER
            return kind, current, len(chain) - 1
        if preds[0] in chain:
            return CYCLIC, None, len(chain) - 1
        chain.append(preds[0])
        current = preds[0]


def test_evens_odds_chains_match_brute_force():
    problem = evens_odds()
    for x in range(30):
        verdict, chain = is_g_point_countable(problem, x, 10_000)
        kind, root, steps = brute_force_chain(problem, x)
        assert chain.kind == kind
        assert chain.root == root
        assert chain.steps == steps
        assert verdict is (x % 2 == 1)
    six = backward_chain(problem.composite(), 6, 100, g_map=problem.G.index_map)
    assert (six.kind, six.root, six.steps) == (X_STOPPER, 0, 3)
    seven = backward_chain(problem.composite(), 7, 100, g_map=problem.G.index_map)
    assert (seven.kind, seven.root) == (Y_STOPPER, 1)


def test_hilbert_hotel_chains_all_stop_at_zero():
    problem = hilbert_hotel()
    for x in range(25):
        verdict, chain = is_g_point_countable(problem, x, 10_000)
        assert verdict is False
        assert chain.kind == X_STOPPER and chain.root == 0
        kind, root, _ = brute_force_chain(problem, x)
        assert (kind, root) == (X_STOPPER, 0)


def test_identity_maps_give_cyclic_fixed_points():
    problem = CountableProblem(
        X=trivial_family(), Y=trivial_family(), F=shift_map(0), G=shift_map(0)
    )
    for x in (0, 3, 17):
        verdict, chain = is_g_point_countable(problem, x, 100)
        assert verdict is True
        assert chain.kind == CYCLIC and chain.cycle_length == 1 and chain.root == x


def test_budget_semantics():
    problem = evens_odds()
    verdict, chain = is_g_point_countable(problem, 20, 3)
    assert verdict is None
    assert chain.kind == UNDETERMINED and chain.steps == 3
    assert chain.prefix == (20, 18, 16, 14)


def test_divergent_chain_detection_and_budget():
    composite = named_example("divergent_chain").payload["composite"]
    detected = backward_chain(composite, 0, 50, detect_divergence=True)
    assert detected.kind == PROVABLY_INFINITE
    assert detected.prefix[:4] == (0, 1, 3, 5)[: len(detected.prefix)]
    blind = backward_chain(composite, 0, 50, detect_divergence=False)
    assert blind.kind == UNDETERMINED
    # the 50-step trace really does climb monotonically
    values = blind.prefix
    assert len(values) == 51
    assert all(b > a for a, b in zip(values[1:], values[2:]))


def test_detector_declines_when_an_exception_masks_the_ray():
    # same shape as the divergent example, but index 7 is overridden, so
    # the climbing ray 1, 3, 5 actually stops at 5; the detector must not
    # fire even though two consecutive steps used the growing rule
    masked = IndexMap(((1, 0), (7, 2)), 2, 2, ((2, 2), (2, -1)))
    chain = backward_chain(masked, 0, 50, g_map=masked, detect_divergence=True)
    assert chain.kind in (X_STOPPER, Y_STOPPER)
    assert chain.root == 5
    assert chain.prefix == (0, 1, 3, 5)


def test_stopper_without_backward_map_raises():
    composite = compose_index_maps(
        shift_map(1).index_map, shift_map(1).index_map
    )
    with pytest.raises(PreconditionError):
        backward_chain(composite, 6, 100)


def test_chain_prefixes_resimulate():
    for problem in (evens_odds(), hilbert_hotel()):
        composite = problem.composite()
        for x in range(0, 20, 3):
            _, chain = is_g_point_countable(problem, x, 10_000)
            for later, earlier in zip(chain.prefix, chain.prefix[1:]):
                assert composite.apply(earlier) == later
            if chain.kind in (X_STOPPER, Y_STOPPER):
                assert composite.preimages(chain.root) == ()
                in_image = bool(problem.G.index_map.preimages(chain.root))
                assert in_image == (chain.kind == Y_STOPPER)


# --- windowed construction ------------------------------------------------


def test_construct_h_window_even_odd_bijection():
    problem = evens_odds()
    result = construct_h_window(problem, 100, 10_000)
    assert result.undetermined == ()
    values = [entry.to for _, entry in sorted(result.entries.items())]
    assert set(values) == set(range(100))  # injective and hits every index
    for x, entry in result.entries.items():
        if x % 2 == 0:
            assert entry.case == "f_image" and entry.to == x + 1
        else:
            assert entry.case == "g_inverse" and entry.to == x - 1


def test_construct_h_window_identity_problem():
    problem = CountableProblem(
        X=trivial_family(), Y=trivial_family(), F=shift_map(0), G=shift_map(0)
    )
    result = construct_h_window(problem, 50, 1_000)
    assert result.undetermined == ()
    assert all(e.case == "g_inverse" and e.to == x for x, e in result.entries.items())


def test_construct_h_window_budget_one_reports_residuals():
    problem = evens_odds()
    result = construct_h_window(problem, 100, 1)
    assert len(result.undetermined) > 50
    # whatever was determined is still correct
    for x, entry in result.entries.items():
        expected = x + 1 if x % 2 == 0 else x - 1
        assert entry.to == expected


def test_construct_h_window_rejects_non_embeddings():
    problem = named_example("pradic_pair").payload["problem"]
    with pytest.raises(HypothesisError, match="G is not an embedding"):
        construct_h_window(problem, 30, 1_000)


def test_windowed_h_group_payloads_invert():
    z3 = cyclic_group(3)
    fam = CountableFamily(
        shapes={"z3": z3}, exceptions={}, tail_start=0, period=1, tail_shapes=("z3",)
    )
    twist = (0, 2, 1)  # inversion automorphism of Z/3
    fmap = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap((), 0, 1, ((1, 1),)),
        exception_homs={},
        rule_homs=(twist,),
    )
    gmap = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap((), 0, 1, ((1, 1),)),
        exception_homs={},
        rule_homs=(twist,),
    )
    problem = CountableProblem(X=fam, Y=fam, F=fmap, G=gmap)
    result = construct_h_window(problem, 30, 1_000)
    for x, entry in result.entries.items():
        if entry.case == "g_inverse":
            hom = gmap.hom_at(entry.to)
            assert tuple(entry.hom[hom[e]] for e in range(3)) == (0, 1, 2)
        else:
            assert entry.hom == twist


# --- family equivalence ---------------------------------------------------


def test_families_equivalent_trio():
    k = 2
    circle = cyclic_group(k)
    circles = CountableFamily(
        shapes={"c": circle}, exceptions={}, tail_start=0, period=1, tail_shapes=("c",)
    )
    pointed = CountableFamily(
        shapes={"1": GROUP_POOL["1"], "c": circle},
        exceptions={0: "1"},
        tail_start=1,
        period=1,
        tail_shapes=("c",),
    )
    verdict = families_equivalent(circles, pointed)
    assert not verdict.equivalent
    assert "order 1" in verdict.reason
    assert families_equivalent(circles, circles).equivalent
    slow = trivial_family(period=3, tail_shapes=("1", "1", "1"))
    assert families_equivalent(trivial_family(), slow).equivalent


def test_families_with_distinct_finite_counts_differ():
    z2 = GROUP_POOL["Z2"]
    one_point = CountableFamily(
        shapes={"1": GROUP_POOL["1"], "z2": z2},
        exceptions={0: "1"},
        tail_start=1,
        period=1,
        tail_shapes=("z2",),
    )
    two_points = CountableFamily(
        shapes={"1": GROUP_POOL["1"], "z2": z2},
        exceptions={0: "1", 1: "1"},
        tail_start=2,
        period=1,
        tail_shapes=("z2",),
    )
    assert not families_equivalent(one_point, two_points).equivalent
    assert families_equivalent(one_point, one_point).equivalent


# --- divergence detector soundness ----------------------------------------


def random_injective_index_map(rng: random.Random) -> IndexMap:
    # negative offsets (possible in raw composites) make backward chains
    # climb, which is the only way the divergence detector can trigger
    for _ in range(500):
        modulus = rng.randint(1, 3)
        rules = tuple(
            (rng.randint(1, 4), rng.randint(-4, 6)) for _ in range(modulus)
        )
        tail_start = rng.randint(0, 4)
        exceptions = []
        used = set()
        for n in range(tail_start):
            if rng.random() < 0.5:  # partial heads, as raw composites allow
                continue
            v = rng.randint(0, 8)
            while v in used:
                v += 1
            used.add(v)
            exceptions.append((n, v))
        candidate = IndexMap(tuple(exceptions), tail_start, modulus, rules)
        if any(candidate.min_rule_value(r) < 0 for r in range(modulus)):
            continue
        if candidate.injective_exact():
            return candidate
    raise AssertionError("could not sample an injective map")


def test_divergence_detector_never_fires_on_terminating_chains():
    rng = random.Random(20240817)
    fired = 0
    for _ in range(300):
        imap = random_injective_index_map(rng)
        for start in range(6):
            chain = backward_chain(imap, start, 40, g_map=imap)
            if chain.kind == PROVABLY_INFINITE:
                fired += 1
                # re-trace with ten times the horizon: must not terminate
                longer = backward_chain(
                    imap, start, 400, g_map=imap, detect_divergence=False
                )
                assert longer.kind == UNDETERMINED
    assert fired > 0  # the detector is not vacuous on this sample


# --- agreement with the finite engine --------------------------------------


def permuted_head_problem() -> CountableProblem:
    fam = trivial_family()
    f = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap(((0, 2), (1, 0), (2, 1)), 3, 1, ((1, 0),)),
        exception_homs={0: (0,), 1: (0,), 2: (0,)},
        rule_homs=((0,),),
    )
    g = CountableMap(
        source=fam,
        target=fam,
        index_map=IndexMap(((0, 1), (1, 0)), 2, 1, ((1, 0),)),
        exception_homs={0: (0,), 1: (0,)},
        rule_homs=((0,),),
    )
    return CountableProblem(X=fam, Y=fam, F=f, G=g)


def test_windowed_h_agrees_with_finite_engine_when_image_covers():
    problem = permuted_head_problem()
    window = 12
    windowed = construct_h_window(problem, window, 10_000)
    assert windowed.undetermined == ()

    F_mat = materialize_map(problem.F, window, target_window=window)
    G_mat = materialize_map(problem.G, window, target_window=window)
    finite = CsbProblem.from_embeddings(F_mat, G_mat)
    h = construct_h(finite)
    for x in range(window):
        assert h.obj_map[x] == windowed.entries[x].to
