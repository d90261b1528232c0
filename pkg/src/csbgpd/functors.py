"""Functors between finite groupoids and the embedding machinery.

The two embedding criteria implemented here are equivalent and the test
suite exercises that equivalence as a property:

* hom-wise: every induced map ``hom(x, x') -> hom(Fx, Fx')`` is a bijection;
* fiber-wise: every fiber groupoid is a proposition.

Left-cancellability (injectivity on iso classes) is strictly weaker than
being an embedding whenever automorphism groups are nontrivial; the
catalog's point-into-delooping example is the canonical witness.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError, StructuralError
from .groupoid import (
    Groupoid,
    Violation,
    check_groupoid_structure,
    is_proposition_groupoid,
    iso_classes,
)


@dataclass(eq=True)
class Functor:
    source: Groupoid
    target: Groupoid
    obj_map: tuple[int, ...]
    mor_map: tuple[int, ...]

    def obj(self, x: int) -> int:
        return self.obj_map[x]

    def mor(self, m: int) -> int:
        return self.mor_map[m]


def identity_functor(g: Groupoid) -> Functor:
    return Functor(
        g, g, tuple(range(g.object_count)), tuple(range(g.morphism_count))
    )


def check_functor_structure(F: Functor) -> None:
    check_groupoid_structure(F.source)
    check_groupoid_structure(F.target)
    if len(F.obj_map) != F.source.object_count:
        raise StructuralError("obj_map must cover every source object")
    if len(F.mor_map) != F.source.morphism_count:
        raise StructuralError("mor_map must cover every source morphism")
    for x, y in enumerate(F.obj_map):
        if not (0 <= y < F.target.object_count):
            raise StructuralError(f"obj_map[{x}] = {y} out of range")
    for m, w in enumerate(F.mor_map):
        if not (0 <= w < F.target.morphism_count):
            raise StructuralError(f"mor_map[{m}] = {w} out of range")


def validate_functor(F: Functor) -> list[Violation]:
    """Exhaustive functoriality scan; empty report iff F is a functor."""
    check_functor_structure(F)
    out: list[Violation] = []
    s, t = F.source, F.target
    for m in range(s.morphism_count):
        w = F.mor_map[m]
        if t.src[w] != F.obj_map[s.src[m]] or t.dst[w] != F.obj_map[s.dst[m]]:
            out.append(Violation("endpoint-preservation", (m, w)))
    for x in range(s.object_count):
        if F.mor_map[s.identity_of[x]] != t.identity_of[F.obj_map[x]]:
            out.append(Violation("identity-preservation", (x,)))
    for (sec, fst), r in s.composition.items():
        image = t.composition.get((F.mor_map[sec], F.mor_map[fst]))
        if image != F.mor_map[r]:
            out.append(Violation("composition-preservation", (sec, fst)))
    return out


def compose_functors(outer: Functor, inner: Functor) -> Functor:
    """Pointwise composite ``outer after inner``."""
    if inner.target is not outer.source and inner.target != outer.source:
        raise PreconditionError("functors not composable: groupoid mismatch")
    return Functor(
        inner.source,
        outer.target,
        tuple(outer.obj_map[y] for y in inner.obj_map),
        tuple(outer.mor_map[w] for w in inner.mor_map),
    )


@dataclass(frozen=True)
class FiberGroupoid:
    """The fiber of a functor over a target object.

    Objects are pairs ``(x, p)`` with ``p : F(x) -> base`` in the target,
    listed in lexicographic order.  A morphism ``(x, p) -> (x', p')`` is a
    source morphism ``q : x -> x'`` with ``p' after F(q) == p``; the label
    table records ``(src_obj, dst_obj, q)`` per fiber morphism.
    """

    base: int
    objects: tuple[tuple[int, int], ...]
    morphism_labels: tuple[tuple[int, int, int], ...]
    groupoid: Groupoid


def fiber_groupoid(F: Functor, base: int) -> FiberGroupoid:
    if not (0 <= base < F.target.object_count):
        raise StructuralError(f"target object {base} out of range")
    s, t = F.source, F.target
    objects: list[tuple[int, int]] = []
    for x in range(s.object_count):
        for p in t.hom(F.obj_map[x], base):
            objects.append((x, p))
    obj_index = {pair: i for i, pair in enumerate(objects)}

    labels: list[tuple[int, int, int]] = []
    for i, (x, p) in enumerate(objects):
        for j, (x2, p2) in enumerate(objects):
            for q in s.hom(x, x2):
                if t.compose(p2, F.mor_map[q]) == p:
                    labels.append((i, j, q))
    label_index = {lab: k for k, lab in enumerate(labels)}

    src = tuple(lab[0] for lab in labels)
    dst = tuple(lab[1] for lab in labels)
    identity_of = tuple(
        label_index[(i, i, s.identity_of[x])] for i, (x, _) in enumerate(objects)
    )
    composition: dict[tuple[int, int], int] = {}
    for k2, (j2, k, q2) in enumerate(labels):
        for k1, (i, j1, q1) in enumerate(labels):
            if j1 == j2:
                composition[(k2, k1)] = label_index[(i, k, s.compose(q2, q1))]
    return FiberGroupoid(
        base,
        tuple(objects),
        tuple(labels),
        Groupoid(len(objects), src, dst, identity_of, composition),
    )


def first_hom_defect(F: Functor) -> tuple[int, int, str] | None:
    """First object pair where hom(x,x') -> hom(Fx,Fx') fails to biject."""
    s = F.source
    for x in range(s.object_count):
        for x2 in range(s.object_count):
            image = [F.mor_map[q] for q in s.hom(x, x2)]
            if len(set(image)) != len(image):
                return (x, x2, "not injective on hom-set")
            if len(image) != len(F.target.hom(F.obj_map[x], F.obj_map[x2])):
                return (x, x2, "not surjective on hom-set")
    return None


def is_embedding_homwise(F: Functor) -> bool:
    """Embedding criterion via hom-sets: the identity-type action is bijective."""
    return first_hom_defect(F) is None


def is_embedding_fiberwise(F: Functor) -> bool:
    """Embedding criterion via fibers: every fiber is a proposition."""
    return all(
        is_proposition_groupoid(fiber_groupoid(F, y).groupoid)
        for y in range(F.target.object_count)
    )


def first_cancellation_defect(F: Functor) -> tuple[int, int] | None:
    """First pair merged by F: hom(Fx,Fx') inhabited but hom(x,x') empty."""
    s = F.source
    for x in range(s.object_count):
        for x2 in range(s.object_count):
            if s.hom(x, x2):
                continue
            if F.target.hom(F.obj_map[x], F.obj_map[x2]):
                return (x, x2)
    return None


def is_left_cancellable(F: Functor) -> bool:
    """Injectivity on iso classes: F(x) ~ F(x') forces x ~ x'."""
    return first_cancellation_defect(F) is None


@dataclass(eq=True)
class NaturalIso:
    """A natural isomorphism between two parallel functors.

    ``components[x]`` is a target morphism ``F(x) -> G(x)``; in a groupoid
    every component is automatically invertible, so only naturality needs
    checking.
    """

    F: Functor
    G: Functor
    components: tuple[int, ...]


def check_natural_iso(n: NaturalIso) -> bool:
    F, G = n.F, n.G
    if F.source != G.source or F.target != G.target:
        raise PreconditionError("natural iso requires parallel functors")
    s, t = F.source, F.target
    if len(n.components) != s.object_count:
        raise StructuralError("one component required per source object")
    for x, eta in enumerate(n.components):
        if not (0 <= eta < t.morphism_count):
            raise StructuralError(f"component[{x}] = {eta} out of range")
        if t.src[eta] != F.obj_map[x] or t.dst[eta] != G.obj_map[x]:
            return False
    for q in range(s.morphism_count):
        x, x2 = s.src[q], s.dst[q]
        lhs = t.compose(n.components[x2], F.mor_map[q])
        rhs = t.compose(G.mor_map[q], n.components[x])
        if lhs != rhs:
            return False
    return True


@dataclass(eq=True)
class EquivalenceWitness:
    """Quasi-inverse plus the two validated natural isomorphisms."""

    quasi_inverse: Functor
    counit: NaturalIso  # F after Q  =>  identity on the target
    unit: NaturalIso  # Q after F  =>  identity on the source


def hom_bijection_inverses(
    F: Functor,
) -> dict[tuple[int, int], dict[int, int]]:
    """Per object pair, the inverse of the hom-set bijection of a fully
    faithful functor: target morphism -> unique source preimage."""
    s = F.source
    out: dict[tuple[int, int], dict[int, int]] = {}
    for x in range(s.object_count):
        for x2 in range(s.object_count):
            homs = s.hom(x, x2)
            if homs:
                out[(x, x2)] = {F.mor_map[q]: q for q in homs}
    return out


def is_equivalence(F: Functor) -> EquivalenceWitness | None:
    """Equivalence decision: fully faithful and essentially surjective.

    The quasi-inverse picks, for each target class, the smallest preimage
    object, and for each target object the smallest connecting iso, so the
    witness is deterministic.  Both natural isomorphisms are re-checked
    before returning.
    """
    if not is_embedding_homwise(F):
        return None
    s, t = F.source, F.target
    t_classes = iso_classes(t)

    class_preimage: dict[int, int] = {}
    for d in range(t_classes.class_count):
        rep = t_classes.representative[d]
        for x in range(s.object_count):
            if t.hom(F.obj_map[x], rep):
                class_preimage[d] = x
                break
        else:
            return None  # class d is not hit: not essentially surjective

    q_obj: list[int] = []
    counit_components: list[int] = []
    for y in range(t.object_count):
        x = class_preimage[t_classes.class_of[y]]
        q_obj.append(x)
        counit_components.append(min(t.hom(F.obj_map[x], y)))

    inverses = hom_bijection_inverses(F)
    q_mor: list[int] = []
    for w in range(t.morphism_count):
        y, y2 = t.src[w], t.dst[w]
        x, x2 = q_obj[y], q_obj[y2]
        conjugate = t.compose(
            t.inverse(counit_components[y2]), t.compose(w, counit_components[y])
        )
        q_mor.append(inverses[(x, x2)][conjugate])
    Q = Functor(t, s, tuple(q_obj), tuple(q_mor))

    counit = NaturalIso(
        compose_functors(F, Q), identity_functor(t), tuple(counit_components)
    )
    unit_components = tuple(
        inverses[(q_obj[F.obj_map[x]], x)][counit_components[F.obj_map[x]]]
        for x in range(s.object_count)
    )
    unit = NaturalIso(compose_functors(Q, F), identity_functor(s), unit_components)

    if validate_functor(Q) or not check_natural_iso(counit) or not check_natural_iso(unit):
        raise PreconditionError("constructed quasi-inverse failed validation")
    return EquivalenceWitness(Q, counit, unit)
