"""Finite groupoids as dense object/morphism tables.

Conventions used everywhere in the package:

* objects are the indices ``0 .. object_count-1``;
* morphisms are the indices ``0 .. len(src)-1`` with endpoint arrays
  ``src``/``dst``;
* ``composition[(s, f)]`` is the composite ``s after f`` and is present
  exactly when ``dst[f] == src[s]``;
* inverses are derived from the table, never stored.

A finite groupoid models a 1-truncated homotopy type with finitely many
points and finite identity types: ``hom(x, x')`` plays the role of the
identity type ``x = x'``, so connectivity is "propositional equality of
points" and the automorphism group of ``x`` is the loop group at ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PreconditionError, StructuralError
from .groups import FiniteGroup, groups_isomorphic


@dataclass(eq=True)
class Groupoid:
    object_count: int
    src: tuple[int, ...]
    dst: tuple[int, ...]
    identity_of: tuple[int, ...]
    composition: dict[tuple[int, int], int]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def morphism_count(self) -> int:
        return len(self.src)

    def compose(self, second: int, first: int) -> int:
        """The composite ``second after first``; pair must be composable."""
        return self.composition[(second, first)]

    def hom(self, x: int, x2: int) -> tuple[int, ...]:
        return self._hom_table().get((x, x2), ())

    def _hom_table(self) -> dict[tuple[int, int], tuple[int, ...]]:
        table = self._cache.get("hom")
        if table is None:
            acc: dict[tuple[int, int], list[int]] = {}
            for m in range(self.morphism_count):
                acc.setdefault((self.src[m], self.dst[m]), []).append(m)
            table = {k: tuple(v) for k, v in acc.items()}
            self._cache["hom"] = table
        return table

    def inverse(self, m: int) -> int:
        inv = self._cache.get("inverse")
        if inv is None:
            inv = self._compute_inverses()
            self._cache["inverse"] = inv
        return inv[m]

    def _compute_inverses(self) -> tuple[int, ...]:
        out = []
        for m in range(self.morphism_count):
            x, y = self.src[m], self.dst[m]
            for g in self.hom(y, x):
                if (
                    self.composition.get((g, m)) == self.identity_of[x]
                    and self.composition.get((m, g)) == self.identity_of[y]
                ):
                    out.append(g)
                    break
            else:
                raise PreconditionError(f"morphism {m} has no inverse")
        return tuple(out)


@dataclass(frozen=True)
class IsoClassPartition:
    """Connected components of a groupoid, indexed by smallest member."""

    class_of: tuple[int, ...]
    representative: tuple[int, ...]

    @property
    def class_count(self) -> int:
        return len(self.representative)

    def members(self, c: int) -> tuple[int, ...]:
        return tuple(x for x, k in enumerate(self.class_of) if k == c)


@dataclass(frozen=True)
class Violation:
    """A single violated axiom, naming the offending indices."""

    axiom: str
    indices: tuple[int, ...]
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.axiom} violated at {self.indices}"
        return f"{msg}: {self.detail}" if self.detail else msg


def check_groupoid_structure(g: Groupoid) -> None:
    """Raise StructuralError if any table references an out-of-range index."""
    n, m = g.object_count, g.morphism_count
    if n < 0:
        raise StructuralError("object_count must be nonnegative")
    if len(g.dst) != m:
        raise StructuralError("src and dst arrays differ in length")
    for label, arr, bound in (("src", g.src, n), ("dst", g.dst, n)):
        for i, v in enumerate(arr):
            if not (0 <= v < bound):
                raise StructuralError(f"{label}[{i}] = {v} out of range")
    if len(g.identity_of) != n:
        raise StructuralError("identity_of must list one morphism per object")
    for x, i in enumerate(g.identity_of):
        if not (0 <= i < m):
            raise StructuralError(f"identity_of[{x}] = {i} out of range")
    for (s, f), r in g.composition.items():
        for v in (s, f, r):
            if not (0 <= v < m):
                raise StructuralError(f"composition entry ({s},{f})->{r} out of range")


def validate_groupoid(g: Groupoid) -> list[Violation]:
    """Exhaustive scan of the groupoid axioms.

    Returns the empty list iff `g` is a valid groupoid.  Index-range
    problems raise StructuralError instead of being reported, since a
    broken table cannot be meaningfully scanned.
    """
    check_groupoid_structure(g)
    out: list[Violation] = []
    m = g.morphism_count

    for x, i in enumerate(g.identity_of):
        if g.src[i] != x or g.dst[i] != x:
            out.append(Violation("identity-endpoints", (x, i), "not an endomorphism"))

    # composition defined on a pair iff that pair is composable
    for s in range(m):
        for f in range(m):
            composable = g.dst[f] == g.src[s]
            present = (s, f) in g.composition
            if present and not composable:
                out.append(Violation("composability-domain", (s, f), "spurious entry"))
            elif composable and not present:
                out.append(Violation("composability-domain", (s, f), "missing entry"))

    for (s, f), r in g.composition.items():
        if g.dst[f] == g.src[s] and (g.src[r] != g.src[f] or g.dst[r] != g.dst[s]):
            out.append(Violation("composite-endpoints", (s, f, r)))

    for f in range(m):
        left = g.composition.get((g.identity_of[g.dst[f]], f))
        right = g.composition.get((f, g.identity_of[g.src[f]]))
        if left is not None and left != f:
            out.append(Violation("identity-left", (f, left)))
        if right is not None and right != f:
            out.append(Violation("identity-right", (f, right)))

    by_src: list[list[int]] = [[] for _ in range(g.object_count)]
    for f in range(m):
        by_src[g.src[f]].append(f)
    for f in range(m):
        for s in by_src[g.dst[f]]:
            sf = g.composition.get((s, f))
            if sf is None:
                continue
            for t in by_src[g.dst[s]]:
                ts = g.composition.get((t, s))
                lhs = g.composition.get((t, sf))
                rhs = g.composition.get((ts, f)) if ts is not None else None
                if lhs is not None and rhs is not None and lhs != rhs:
                    out.append(Violation("associativity", (t, s, f)))

    for f in range(m):
        x, y = g.src[f], g.dst[f]
        inverses = [
            h
            for h in range(m)
            if g.src[h] == y
            and g.dst[h] == x
            and g.composition.get((h, f)) == g.identity_of[x]
            and g.composition.get((f, h)) == g.identity_of[y]
        ]
        if not inverses:
            out.append(Violation("inverse-existence", (f,)))
        elif len(inverses) > 1:
            out.append(Violation("inverse-uniqueness", (f, *inverses)))
    return out


def iso_classes(g: Groupoid) -> IsoClassPartition:
    """Partition objects by connectivity; class indices ordered by smallest member.

    Computed by breadth-first search over the morphism edges.  (The test
    suite cross-checks against an independent union-find.)
    """
    n = g.object_count
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for m in range(g.morphism_count):
        x, y = g.src[m], g.dst[m]
        if x != y:
            adjacency[x].append(y)
            adjacency[y].append(x)
    class_of = [-1] * n
    reps: list[int] = []
    for start in range(n):
        if class_of[start] != -1:
            continue
        c = len(reps)
        reps.append(start)
        queue = [start]
        class_of[start] = c
        while queue:
            x = queue.pop()
            for y in adjacency[x]:
                if class_of[y] == -1:
                    class_of[y] = c
                    queue.append(y)
    return IsoClassPartition(tuple(class_of), tuple(reps))


def hom_set(g: Groupoid, x: int, x2: int) -> tuple[int, ...]:
    """Morphisms from x to x2 in ascending order."""
    if not (0 <= x < g.object_count and 0 <= x2 < g.object_count):
        raise StructuralError(f"object index out of range: ({x}, {x2})")
    return g.hom(x, x2)


def aut_group(g: Groupoid, x: int) -> tuple[FiniteGroup, tuple[int, ...]]:
    """The automorphism group at x and the morphisms realizing its elements.

    Element 0 is always the identity morphism; the rest follow in
    ascending morphism order.  Multiplication is composition:
    ``mult(a, b) = a after b``.
    """
    if not (0 <= x < g.object_count):
        raise StructuralError(f"object index {x} out of range")
    e = g.identity_of[x]
    realizers = (e,) + tuple(m for m in g.hom(x, x) if m != e)
    index = {m: i for i, m in enumerate(realizers)}
    table = tuple(
        tuple(index[g.compose(a, b)] for b in realizers) for a in realizers
    )
    return FiniteGroup(len(realizers), table), realizers


def is_connected(g: Groupoid) -> bool:
    return g.object_count > 0 and iso_classes(g).class_count == 1


def is_proposition_groupoid(g: Groupoid) -> bool:
    """True iff every hom-set (including endomorphisms) has exactly one element.

    This is the subsingleton test: any two points are equal in a unique
    way.  The empty groupoid is a proposition.
    """
    n = g.object_count
    for x in range(n):
        for x2 in range(n):
            if len(g.hom(x, x2)) != 1:
                return False
    return True


@dataclass(frozen=True)
class GroupoidEquivalence:
    """Witness that two groupoids are equivalent.

    ``class_map[c]`` is the matched class of the second groupoid and
    ``group_isos[c]`` the element bijection between the automorphism
    groups at the class representatives.
    """

    class_map: tuple[int, ...]
    group_isos: tuple[tuple[int, ...], ...]


def groupoids_equivalent(
    g1: Groupoid, g2: Groupoid
) -> GroupoidEquivalence | None:
    """Decide equivalence: a class bijection matching automorphism groups.

    Returns the lexicographically least matching when one exists.
    """
    p1, p2 = iso_classes(g1), iso_classes(g2)
    if p1.class_count != p2.class_count:
        return None
    groups1 = [aut_group(g1, r)[0] for r in p1.representative]
    groups2 = [aut_group(g2, r)[0] for r in p2.representative]
    k = p1.class_count
    iso_cache: dict[tuple[int, int], tuple[int, ...] | None] = {}

    def iso_between(c1: int, c2: int) -> tuple[int, ...] | None:
        if (c1, c2) not in iso_cache:
            iso_cache[(c1, c2)] = groups_isomorphic(groups1[c1], groups2[c2])
        return iso_cache[(c1, c2)]

    assignment: list[int] = []
    used = [False] * k

    def extend(c1: int) -> bool:
        if c1 == k:
            return True
        for c2 in range(k):
            if used[c2] or iso_between(c1, c2) is None:
                continue
            assignment.append(c2)
            used[c2] = True
            if extend(c1 + 1):
                return True
            assignment.pop()
            used[c2] = False
        return False

    if not extend(0):
        return None
    isos = tuple(iso_between(c1, c2) for c1, c2 in enumerate(assignment))
    return GroupoidEquivalence(tuple(assignment), isos)  # type: ignore[arg-type]
