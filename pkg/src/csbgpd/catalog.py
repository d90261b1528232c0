"""Constructors, named examples, and seeded random generators.

Everything here is deterministic in its inputs: the same seed always
yields the same instance, so golden values in tests stay stable.

The delooping of Z/k stands in for the homotopical circle throughout:
the true circle has loop group Z, which no finite table can carry, and
every statement exercised here only needs a point with more than one
automorphism (isolatedness already fails at k = 2).  Finite groupoids
that embed into each other both ways are necessarily equivalent, so the
random embedding pairs exist to exercise the construction on scrambled
presentations, not to manufacture hard instances; the genuinely
asymmetric examples live in countable mode.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable

from .csb import CsbProblem
from .countable import (
    EMBEDDING,
    LEFT_CANCELLABLE_ONLY,
    PROVABLY_INFINITE,
    UNDETERMINED,
    X_STOPPER,
    Y_STOPPER,
    ChainVerdict,
    CountableFamily,
    CountableMap,
    CountableProblem,
    IndexMap,
    backward_chain,
    construct_h_window,
    embedding_status_countable,
    families_equivalent,
    validate_problem,
)
from .errors import PreconditionError
from .functors import (
    Functor,
    is_embedding_homwise,
    is_left_cancellable,
    validate_functor,
)
from .groupoid import Groupoid, groupoids_equivalent, validate_groupoid
from .groups import (
    GROUP_POOL,
    FiniteGroup,
    cyclic_group,
    enumerate_homs,
    enumerate_isomorphisms,
)


@dataclass(frozen=True)
class GeneratorParams:
    seed: int
    max_classes: int = 4
    group_pool: tuple[str, ...] = tuple(GROUP_POOL)
    max_fanout: int = 2

    def __post_init__(self) -> None:
        if not self.group_pool:
            raise PreconditionError("group pool must be nonempty")
        if self.max_classes < 1 or self.max_fanout < 1:
            raise PreconditionError("bounds must be positive")
        for name in self.group_pool:
            if name not in GROUP_POOL:
                raise PreconditionError(f"unknown pool group {name!r}")


@dataclass(frozen=True)
class BlockInfo:
    group: FiniteGroup
    size: int
    obj_offset: int
    mor_offset: int

    def mor_index(self, i: int, j: int, e: int) -> int:
        return self.mor_offset + (i * self.size + j) * self.group.order + e


def blocks_groupoid(
    classes: list[tuple[FiniteGroup, int]]
) -> tuple[Groupoid, tuple[BlockInfo, ...]]:
    """Disjoint union of uniform blocks: one class per entry, `size`
    mutually isomorphic objects with automorphism group `group`.

    A block morphism i -> j is a pair (i, j) decorated with a group
    element; composition multiplies the decorations.
    """
    blocks: list[BlockInfo] = []
    src: list[int] = []
    dst: list[int] = []
    identity_of: list[int] = []
    composition: dict[tuple[int, int], int] = {}
    for group, size in classes:
        info = BlockInfo(group, size, len(identity_of), len(src))
        blocks.append(info)
        for i in range(size):
            for j in range(size):
                for _ in range(group.order):
                    src.append(info.obj_offset + i)
                    dst.append(info.obj_offset + j)
        for i in range(size):
            identity_of.append(info.mor_index(i, i, group.identity))
        for i in range(size):
            for j in range(size):
                for k in range(size):
                    for e1 in range(group.order):
                        first = info.mor_index(i, j, e1)
                        for e2 in range(group.order):
                            second = info.mor_index(j, k, e2)
                            composition[(second, first)] = info.mor_index(
                                i, k, group.mult(e2, e1)
                            )
    return (
        Groupoid(
            len(identity_of), tuple(src), tuple(dst), tuple(identity_of), composition
        ),
        tuple(blocks),
    )


def build(kind: str, *args: Any) -> Groupoid:
    """Named constructors: discrete(n), delooping(group),
    disjoint_union(kinds...), n_copies(n, group)."""
    if kind == "discrete":
        (n,) = args
        return blocks_groupoid([(GROUP_POOL["1"], 1)] * n)[0]
    if kind == "delooping":
        (group,) = args
        group = GROUP_POOL[group] if isinstance(group, str) else group
        return blocks_groupoid([(group, 1)])[0]
    if kind == "disjoint_union":
        classes: list[tuple[FiniteGroup, int]] = []
        for sub in args:
            sub_kind, *sub_args = sub
            piece = build(sub_kind, *sub_args)
            classes.extend(_as_blocks(piece))
        return blocks_groupoid(classes)[0]
    if kind == "n_copies":
        n, group = args
        group = GROUP_POOL[group] if isinstance(group, str) else group
        return blocks_groupoid([(group, 1)] * n)[0]
    raise PreconditionError(f"unknown constructor kind {kind!r}")


def _as_blocks(g: Groupoid) -> list[tuple[FiniteGroup, int]]:
    # only used to re-flatten groupoids produced by blocks_groupoid
    from .groupoid import aut_group, iso_classes

    partition = iso_classes(g)
    return [
        (aut_group(g, rep)[0], len(partition.members(c)))
        for c, rep in enumerate(partition.representative)
    ]


def permute_groupoid(
    g: Groupoid, obj_perm: list[int], mor_perm: list[int]
) -> Groupoid:
    """Relabel objects and morphisms; perm[old] = new."""
    n, m = g.object_count, g.morphism_count
    src = [0] * m
    dst = [0] * m
    for old in range(m):
        src[mor_perm[old]] = obj_perm[g.src[old]]
        dst[mor_perm[old]] = obj_perm[g.dst[old]]
    identity_of = [0] * n
    for x in range(n):
        identity_of[obj_perm[x]] = mor_perm[g.identity_of[x]]
    composition = {
        (mor_perm[s], mor_perm[f]): mor_perm[r]
        for (s, f), r in g.composition.items()
    }
    return Groupoid(n, tuple(src), tuple(dst), tuple(identity_of), composition)


def _random_perms(g: Groupoid, rng: random.Random) -> tuple[list[int], list[int]]:
    obj_perm = list(range(g.object_count))
    mor_perm = list(range(g.morphism_count))
    rng.shuffle(obj_perm)
    rng.shuffle(mor_perm)
    return obj_perm, mor_perm


def permute_functor(
    F: Functor,
    source: Groupoid,
    target: Groupoid,
    src_perms: tuple[list[int], list[int]],
    tgt_perms: tuple[list[int], list[int]],
) -> Functor:
    obj_s, mor_s = src_perms
    obj_t, mor_t = tgt_perms
    obj_map = [0] * len(F.obj_map)
    for x, y in enumerate(F.obj_map):
        obj_map[obj_s[x]] = obj_t[y]
    mor_map = [0] * len(F.mor_map)
    for m, w in enumerate(F.mor_map):
        mor_map[mor_s[m]] = mor_t[w]
    return Functor(source, target, tuple(obj_map), tuple(mor_map))


def _block_functor(
    src_g: Groupoid,
    tgt_g: Groupoid,
    src_blocks: tuple[BlockInfo, ...],
    tgt_blocks: tuple[BlockInfo, ...],
    class_map: list[int],
    homs: list[tuple[int, ...]],
    gauges: list[list[int]],
    obj_maps: list[list[int]],
) -> Functor:
    """Assemble a functor from per-class data.

    Per class: a target class, a group homomorphism, one target gauge
    element per source object, and an object map into the target class.
    The morphism (i, j, e) maps to (o(i), o(j)) decorated with
    ``gauge_j * hom(e) * gauge_i^-1``, which is functorial for any choice
    of gauges.
    """
    obj_map = [0] * src_g.object_count
    mor_map = [0] * src_g.morphism_count
    for c, block in enumerate(src_blocks):
        target_block = tgt_blocks[class_map[c]]
        hom = homs[c]
        H = target_block.group
        for i in range(block.size):
            obj_map[block.obj_offset + i] = (
                target_block.obj_offset + obj_maps[c][i]
            )
        for i in range(block.size):
            gi_inv = H.inverse(gauges[c][i])
            for j in range(block.size):
                gj = gauges[c][j]
                for e in range(block.group.order):
                    decorated = H.mult(gj, H.mult(hom[e], gi_inv))
                    mor_map[block.mor_index(i, j, e)] = target_block.mor_index(
                        obj_maps[c][i], obj_maps[c][j], decorated
                    )
    return Functor(src_g, tgt_g, tuple(obj_map), tuple(mor_map))


def _random_classes(
    params: GeneratorParams, rng: random.Random, count: int | None = None
) -> list[tuple[FiniteGroup, int]]:
    k = count if count is not None else rng.randint(1, params.max_classes)
    return [
        (GROUP_POOL[rng.choice(params.group_pool)], rng.randint(1, params.max_fanout))
        for _ in range(k)
    ]


def random_groupoid(params: GeneratorParams) -> Groupoid:
    rng = random.Random(params.seed)
    g, _ = blocks_groupoid(_random_classes(params, rng))
    return permute_groupoid(g, *_random_perms(g, rng))


def random_functor(params: GeneratorParams) -> Functor:
    """A seeded random functor between random groupoids.

    Class maps, homomorphisms, gauges and object maps are all drawn
    independently, so the result ranges over embeddings, merely
    left-cancellable functors, and collapsing functors alike.
    """
    rng = random.Random(params.seed)
    src_classes = _random_classes(params, rng)
    tgt_classes = _random_classes(params, rng)
    src_g, src_blocks = blocks_groupoid(src_classes)
    tgt_g, tgt_blocks = blocks_groupoid(tgt_classes)
    class_map = [rng.randrange(len(tgt_blocks)) for _ in src_blocks]
    homs = []
    gauges = []
    obj_maps = []
    for c, block in enumerate(src_blocks):
        target_block = tgt_blocks[class_map[c]]
        options = enumerate_homs(block.group, target_block.group)
        homs.append(options[rng.randrange(len(options))])
        gauges.append(
            [rng.randrange(target_block.group.order) for _ in range(block.size)]
        )
        obj_maps.append(
            [rng.randrange(target_block.size) for _ in range(block.size)]
        )
    F = _block_functor(
        src_g, tgt_g, src_blocks, tgt_blocks, class_map, homs, gauges, obj_maps
    )
    src_perms = _random_perms(src_g, rng)
    tgt_perms = _random_perms(tgt_g, rng)
    source = permute_groupoid(src_g, *src_perms)
    target = permute_groupoid(tgt_g, *tgt_perms)
    return permute_functor(F, source, target, src_perms, tgt_perms)


def _shape_matching(
    names: list[str], rng: random.Random
) -> list[int]:
    """A random bijection of class indices preserving the shape name."""
    by_name: dict[str, list[int]] = {}
    for c, name in enumerate(names):
        by_name.setdefault(name, []).append(c)
    matching = [0] * len(names)
    for name, members in sorted(by_name.items()):
        images = members[:]
        rng.shuffle(images)
        for c, d in zip(members, images):
            matching[c] = d
    return matching


def _random_embedding(
    src_g: Groupoid,
    tgt_g: Groupoid,
    src_blocks: tuple[BlockInfo, ...],
    tgt_blocks: tuple[BlockInfo, ...],
    class_map: list[int],
    rng: random.Random,
) -> Functor:
    homs = []
    gauges = []
    obj_maps = []
    for c, block in enumerate(src_blocks):
        target_block = tgt_blocks[class_map[c]]
        isos = enumerate_isomorphisms(block.group, target_block.group)
        homs.append(isos[rng.randrange(len(isos))])
        gauges.append(
            [rng.randrange(target_block.group.order) for _ in range(block.size)]
        )
        obj_maps.append(
            [rng.randrange(target_block.size) for _ in range(block.size)]
        )
    return _block_functor(
        src_g, tgt_g, src_blocks, tgt_blocks, class_map, homs, gauges, obj_maps
    )


def random_embedding_pair(params: GeneratorParams) -> CsbProblem:
    """Seeded embeddings both ways over a shared multiset of shapes.

    Finite groupoids embedded into each other both ways always share
    their class-shape multiset, so X and Y are built over the same pool
    draw; the pair still exercises everything because layouts, object
    fan-outs, matchings, automorphisms and gauges are all scrambled.
    """
    rng = random.Random(params.seed)
    k = rng.randint(1, params.max_classes)
    names = [rng.choice(params.group_pool) for _ in range(k)]
    x_classes = [(GROUP_POOL[n], rng.randint(1, params.max_fanout)) for n in names]
    y_classes = [(GROUP_POOL[n], rng.randint(1, params.max_fanout)) for n in names]
    x_g, x_blocks = blocks_groupoid(x_classes)
    y_g, y_blocks = blocks_groupoid(y_classes)
    F = _random_embedding(
        x_g, y_g, x_blocks, y_blocks, _shape_matching(names, rng), rng
    )
    G = _random_embedding(
        y_g, x_g, y_blocks, x_blocks, _shape_matching(names, rng), rng
    )
    x_perms = _random_perms(x_g, rng)
    y_perms = _random_perms(y_g, rng)
    X = permute_groupoid(x_g, *x_perms)
    Y = permute_groupoid(y_g, *y_perms)
    return CsbProblem.from_embeddings(
        permute_functor(F, X, Y, x_perms, y_perms),
        permute_functor(G, Y, X, y_perms, x_perms),
    )


def random_connected_instance(
    params: GeneratorParams,
) -> tuple[Groupoid, Groupoid, Functor, Functor]:
    """Connected X, an embedding G : Y -> X, and an arbitrary functor
    F : X -> Y; the raw material for the connected-case observations."""
    rng = random.Random(params.seed)
    name = rng.choice(params.group_pool)
    group = GROUP_POOL[name]
    x_classes = [(group, rng.randint(1, params.max_fanout))]
    y_classes = [(group, rng.randint(1, params.max_fanout))]
    x_g, x_blocks = blocks_groupoid(x_classes)
    y_g, y_blocks = blocks_groupoid(y_classes)
    G = _random_embedding(y_g, x_g, y_blocks, x_blocks, [0], rng)
    homs = enumerate_homs(group, group)
    F = _block_functor(
        x_g,
        y_g,
        x_blocks,
        y_blocks,
        [0],
        [homs[rng.randrange(len(homs))]],
        [[rng.randrange(group.order) for _ in range(x_blocks[0].size)]],
        [[rng.randrange(y_blocks[0].size) for _ in range(x_blocks[0].size)]],
    )
    x_perms = _random_perms(x_g, rng)
    y_perms = _random_perms(y_g, rng)
    X = permute_groupoid(x_g, *x_perms)
    Y = permute_groupoid(y_g, *y_perms)
    return (
        X,
        Y,
        permute_functor(F, X, Y, x_perms, y_perms),
        permute_functor(G, Y, X, y_perms, x_perms),
    )


# --- named examples -------------------------------------------------------


@dataclass(frozen=True)
class NamedExample:
    name: str
    description: str
    payload: dict[str, Any]
    expected: dict[str, Any]


def _trivial_family() -> CountableFamily:
    return CountableFamily(
        shapes={"1": GROUP_POOL["1"]},
        exceptions={},
        tail_start=0,
        period=1,
        tail_shapes=("1",),
    )


def _shift_map(
    source: CountableFamily, target: CountableFamily, offset: int
) -> CountableMap:
    return CountableMap(
        source=source,
        target=target,
        index_map=IndexMap((), 0, 1, ((1, offset),)),
        exception_homs={},
        rule_homs=((0,),),
    )


def _example_point_into_circle() -> NamedExample:
    point = build("discrete", 1)
    circle = build("delooping", "Z2")
    functor = Functor(point, circle, (0,), (circle.identity_of[0],))
    return NamedExample(
        name="point_into_circle",
        description=(
            "Picking a point of a delooping: left-cancellable, but an "
            "embedding only if the point has no nontrivial automorphism."
        ),
        payload={"functor": functor},
        expected={"left_cancellable": True, "embedding": False},
    )


def _example_lc_csb_fails() -> NamedExample:
    point = build("discrete", 1)
    circle = build("delooping", "Z2")
    forward = Functor(point, circle, (0,), (circle.identity_of[0],))
    backward = Functor(circle, point, (0,), (0, 0))
    return NamedExample(
        name="lc_csb_fails",
        description=(
            "Left-cancellable maps both ways between inequivalent "
            "groupoids: the embedding hypothesis cannot be weakened."
        ),
        payload={"A": point, "B": circle, "F": forward, "G": backward},
        expected={
            "F_left_cancellable": True,
            "G_left_cancellable": True,
            "F_embedding": False,
            "G_embedding": False,
            "equivalent": False,
        },
    )


def _example_evens_odds() -> NamedExample:
    fam = _trivial_family()
    problem = CountableProblem(
        X=fam, Y=fam, F=_shift_map(fam, fam, 1), G=_shift_map(fam, fam, 1)
    )
    return NamedExample(
        name="evens_odds",
        description=(
            "Both maps shift by one; the constructed bijection swaps "
            "evens with odds."
        ),
        payload={"problem": problem},
        expected={
            "even_verdict": X_STOPPER,
            "even_root": 0,
            "odd_verdict": Y_STOPPER,
            "odd_root": 1,
            "h_even_offset": 1,
            "h_odd_offset": -1,
        },
    )


def _example_hilbert_hotel() -> NamedExample:
    fam = _trivial_family()
    problem = CountableProblem(
        X=fam, Y=fam, F=_shift_map(fam, fam, 0), G=_shift_map(fam, fam, 1)
    )
    return NamedExample(
        name="hilbert_hotel",
        description=(
            "Identity forward, shift backward: every chain stops on the "
            "X side at 0 and the construction returns the identity."
        ),
        payload={"problem": problem},
        expected={"all_verdicts": X_STOPPER, "root": 0, "h_offset": 0},
    )


def _example_pradic_pair(k: int = 2) -> NamedExample:
    circle = cyclic_group(k)
    circles = CountableFamily(
        shapes={"circle": circle},
        exceptions={},
        tail_start=0,
        period=1,
        tail_shapes=("circle",),
    )
    pointed = CountableFamily(
        shapes={"1": GROUP_POOL["1"], "circle": circle},
        exceptions={0: "1"},
        tail_start=1,
        period=1,
        tail_shapes=("circle",),
    )
    identity_hom = tuple(range(k))
    forward = CountableMap(
        source=circles,
        target=pointed,
        index_map=IndexMap((), 0, 1, ((1, 1),)),
        exception_homs={},
        rule_homs=(identity_hom,),
    )
    backward = CountableMap(
        source=pointed,
        target=circles,
        index_map=IndexMap(((0, 0),), 1, 1, ((1, 0),)),
        exception_homs={0: (0,)},
        rule_homs=(identity_hom,),
    )
    return NamedExample(
        name=f"pradic_pair({k})",
        description=(
            "A family of circles against the same family with one extra "
            "point: left-cancellable maps both ways, an embedding only "
            "forward, and no equivalence."
        ),
        payload={
            "problem": CountableProblem(
                X=circles, Y=pointed, F=forward, G=backward
            )
        },
        expected={
            "forward_status": EMBEDDING,
            "backward_status": LEFT_CANCELLABLE_ONLY,
            "equivalent": False,
        },
    )


def _example_divergent_chain() -> NamedExample:
    composite = IndexMap(((1, 0),), 2, 2, ((2, 2), (2, -1)))
    return NamedExample(
        name="divergent_chain",
        description=(
            "A composite whose backward chain from 0 climbs 1, 3, 5, ... "
            "forever under one rule: provably infinite with detection on, "
            "undetermined within any budget with it off."
        ),
        payload={"composite": composite},
        expected={
            "with_detection": PROVABLY_INFINITE,
            "without_detection_budget_50": UNDETERMINED,
        },
    )


_NAMED: dict[str, Callable[..., NamedExample]] = {
    "point_into_circle": _example_point_into_circle,
    "lc_csb_fails": _example_lc_csb_fails,
    "evens_odds": _example_evens_odds,
    "hilbert_hotel": _example_hilbert_hotel,
    "pradic_pair": _example_pradic_pair,
    "divergent_chain": _example_divergent_chain,
}


def catalog_names() -> tuple[str, ...]:
    return tuple(sorted(_NAMED))


def named_example(name: str, **kwargs: Any) -> NamedExample:
    """Look up a named example; `pradic_pair(3)` style arguments allowed."""
    base = name
    if "(" in name and name.endswith(")"):
        base, raw = name[:-1].split("(", 1)
        kwargs.setdefault("k", int(raw))
    if base not in _NAMED:
        raise PreconditionError(f"unknown example {name!r}")
    return _NAMED[base](**kwargs)


def verify_named(example: NamedExample) -> list[str]:
    """Re-run every expected verdict of a bundle; failures as messages."""
    failures: list[str] = []

    def expect(label: str, actual: Any) -> None:
        wanted = example.expected[label]
        if actual != wanted:
            failures.append(f"{label}: expected {wanted!r}, got {actual!r}")

    base = example.name.split("(")[0]
    if base == "point_into_circle":
        F = example.payload["functor"]
        if validate_functor(F):
            failures.append("functor does not validate")
        expect("left_cancellable", is_left_cancellable(F))
        expect("embedding", is_embedding_homwise(F))
    elif base == "lc_csb_fails":
        for key in ("A", "B"):
            if validate_groupoid(example.payload[key]):
                failures.append(f"groupoid {key} does not validate")
        F, G = example.payload["F"], example.payload["G"]
        expect("F_left_cancellable", is_left_cancellable(F))
        expect("G_left_cancellable", is_left_cancellable(G))
        expect("F_embedding", is_embedding_homwise(F))
        expect("G_embedding", is_embedding_homwise(G))
        witness = groupoids_equivalent(example.payload["A"], example.payload["B"])
        expect("equivalent", witness is not None)
    elif base == "evens_odds":
        problem = example.payload["problem"]
        if validate_problem(problem, 40):
            failures.append("problem does not validate")
        for x in range(12):
            _, chain = _chain_of(problem, x)
            if x % 2 == 0:
                expect("even_verdict", chain.kind)
                expect("even_root", chain.root)
            else:
                expect("odd_verdict", chain.kind)
                expect("odd_root", chain.root)
        h = construct_h_window(problem, 20, 1000)
        for x, entry in h.entries.items():
            offset = entry.to - x
            expect("h_even_offset" if x % 2 == 0 else "h_odd_offset", offset)
    elif base == "hilbert_hotel":
        problem = example.payload["problem"]
        if validate_problem(problem, 40):
            failures.append("problem does not validate")
        for x in range(12):
            _, chain = _chain_of(problem, x)
            expect("all_verdicts", chain.kind)
            expect("root", chain.root)
        h = construct_h_window(problem, 20, 1000)
        for x, entry in h.entries.items():
            expect("h_offset", entry.to - x)
    elif base == "pradic_pair":
        problem = example.payload["problem"]
        if validate_problem(problem, 40):
            failures.append("problem does not validate")
        expect("forward_status", embedding_status_countable(problem.F, 40))
        expect("backward_status", embedding_status_countable(problem.G, 40))
        expect("equivalent", families_equivalent(problem.X, problem.Y).equivalent)
    elif base == "divergent_chain":
        composite = example.payload["composite"]
        with_detection = backward_chain(composite, 0, 50, detect_divergence=True)
        without = backward_chain(composite, 0, 50, detect_divergence=False)
        expect("with_detection", with_detection.kind)
        expect("without_detection_budget_50", without.kind)
    else:
        failures.append(f"no verifier for {example.name!r}")
    return failures


def _chain_of(problem: CountableProblem, x: int) -> tuple[bool | None, ChainVerdict]:
    from .countable import is_g_point_countable

    return is_g_point_countable(problem, x, 10_000)
