"""Finite groups as dense multiplication tables.

Groups appear in two roles: automorphism groups computed from a groupoid,
and the "shape" carried by each class of a countable family.  Everything
here is exact table arithmetic; no group is ever larger than a few dozen
elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import PreconditionError, StructuralError

DEFAULT_MAX_ISO_ORDER = 64


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group: element count, multiplication table, identity index."""

    order: int
    table: tuple[tuple[int, ...], ...]
    identity: int = 0

    def mult(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inverse(self, a: int) -> int:
        row = self.table[a]
        for b in range(self.order):
            if row[b] == self.identity and self.table[b][a] == self.identity:
                return b
        raise PreconditionError(f"element {a} has no inverse; not a group")

    def element_order(self, a: int) -> int:
        x = a
        n = 1
        while x != self.identity:
            x = self.mult(x, a)
            n += 1
            if n > self.order:
                raise PreconditionError(f"element {a} does not cycle; not a group")
        return n

    def is_abelian(self) -> bool:
        return all(
            self.table[a][b] == self.table[b][a]
            for a in range(self.order)
            for b in range(a + 1, self.order)
        )


@dataclass(frozen=True)
class GroupViolation:
    axiom: str
    indices: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.axiom} at {self.indices}"


def check_group_structure(g: FiniteGroup) -> None:
    """Raise StructuralError unless the table is a well-formed n x n index table."""
    n = g.order
    if n < 1:
        raise StructuralError("group order must be at least 1")
    if len(g.table) != n or any(len(row) != n for row in g.table):
        raise StructuralError(f"multiplication table is not {n} x {n}")
    for a, row in enumerate(g.table):
        for b, c in enumerate(row):
            if not (0 <= c < n):
                raise StructuralError(f"table[{a}][{b}] = {c} out of range")
    if not (0 <= g.identity < n):
        raise StructuralError(f"identity index {g.identity} out of range")


def validate_group(g: FiniteGroup) -> list[GroupViolation]:
    """Exhaustive scan of the group axioms; empty report iff valid."""
    check_group_structure(g)
    out: list[GroupViolation] = []
    n = g.order
    e = g.identity
    for a in range(n):
        if g.table[e][a] != a or g.table[a][e] != a:
            out.append(GroupViolation("identity", (a,)))
    for a in range(n):
        if not any(
            g.table[a][b] == e and g.table[b][a] == e for b in range(n)
        ):
            out.append(GroupViolation("inverse", (a,)))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if g.table[g.table[a][b]][c] != g.table[a][g.table[b][c]]:
                    out.append(GroupViolation("associativity", (a, b, c)))
    return out


def order_profile(g: FiniteGroup) -> tuple[int, ...]:
    """Sorted multiset of element orders; an isomorphism invariant."""
    return tuple(sorted(g.element_order(a) for a in range(g.order)))


def _closure(g: FiniteGroup, seed: frozenset[int]) -> frozenset[int]:
    members = set(seed) | {g.identity}
    frontier = list(members)
    while frontier:
        a = frontier.pop()
        for b in list(members):
            for c in (g.mult(a, b), g.mult(b, a)):
                if c not in members:
                    members.add(c)
                    frontier.append(c)
    return frozenset(members)


def generating_sequence(g: FiniteGroup) -> tuple[int, ...]:
    """Canonical generating sequence: repeatedly adjoin the smallest missing element."""
    gens: list[int] = []
    generated = _closure(g, frozenset())
    while len(generated) < g.order:
        e = min(set(range(g.order)) - generated)
        gens.append(e)
        generated = _closure(g, generated | {e})
    return tuple(gens)


def _extend_by_generators(
    g: FiniteGroup, h: FiniteGroup, gens: tuple[int, ...], images: tuple[int, ...]
) -> tuple[int, ...] | None:
    """Grow the map gens -> images to a full homomorphism table, or None."""
    phi: dict[int, int] = {g.identity: h.identity}
    for a, b in zip(gens, images):
        phi[a] = b
    frontier = list(phi)
    while frontier:
        a = frontier.pop()
        for s, t in list(phi.items()):
            prod = g.mult(a, s)
            img = h.mult(phi[a], phi[s])
            if prod in phi:
                if phi[prod] != img:
                    return None
            else:
                phi[prod] = img
                frontier.append(prod)
    if len(phi) != g.order:
        return None
    full = tuple(phi[a] for a in range(g.order))
    for a in range(g.order):
        for b in range(g.order):
            if full[g.mult(a, b)] != h.mult(full[a], full[b]):
                return None
    return full


@lru_cache(maxsize=None)
def enumerate_homs(g: FiniteGroup, h: FiniteGroup) -> tuple[tuple[int, ...], ...]:
    """All homomorphisms g -> h as element-map tuples, lexicographic order."""
    gens = generating_sequence(g)
    if not gens:
        return (tuple(h.identity for _ in range(g.order)),)
    gen_orders = [g.element_order(a) for a in gens]
    candidates: list[list[int]] = []
    for k in gen_orders:
        # order of the image must divide the order of the generator
        candidates.append([b for b in range(h.order) if k % h.element_order(b) == 0])
    found: list[tuple[int, ...]] = []
    for images in itertools.product(*candidates):
        full = _extend_by_generators(g, h, gens, images)
        if full is not None:
            found.append(full)
    return tuple(sorted(found))


@lru_cache(maxsize=None)
def enumerate_isomorphisms(
    g: FiniteGroup, h: FiniteGroup
) -> tuple[tuple[int, ...], ...]:
    """All isomorphisms g -> h, lexicographic order; empty if none exist."""
    if g.order != h.order or order_profile(g) != order_profile(h):
        return ()
    return tuple(
        phi for phi in enumerate_homs(g, h) if len(set(phi)) == g.order
    )


def groups_isomorphic(
    a: FiniteGroup, b: FiniteGroup, max_order: int = DEFAULT_MAX_ISO_ORDER
) -> tuple[int, ...] | None:
    """First isomorphism found by generator-image backtracking, or None.

    Candidate generator images are tried in ascending order with
    element-order pruning, so the returned bijection is deterministic.
    Orders above `max_order` are refused rather than attempted.
    """
    if a.order > max_order or b.order > max_order:
        raise PreconditionError(
            f"group order exceeds cap {max_order}; raise max_order to override"
        )
    if a.order != b.order or order_profile(a) != order_profile(b):
        return None
    gens = generating_sequence(a)
    if not gens:
        return tuple(b.identity for _ in range(a.order))
    gen_orders = [a.element_order(x) for x in gens]
    pools = [
        [y for y in range(b.order) if b.element_order(y) == k] for k in gen_orders
    ]
    for images in itertools.product(*pools):
        full = _extend_by_generators(a, b, gens, images)
        if full is not None and len(set(full)) == a.order:
            return full
    return None


def trivial_group() -> FiniteGroup:
    return FiniteGroup(1, ((0,),))


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise PreconditionError("cyclic group needs n >= 1")
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    return FiniteGroup(n, table)


def direct_product(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup:
    n = a.order * b.order
    idx = lambda i, j: i * b.order + j

    def mult(p: int, q: int) -> int:
        i1, j1 = divmod(p, b.order)
        i2, j2 = divmod(q, b.order)
        return idx(a.mult(i1, i2), b.mult(j1, j2))

    table = tuple(tuple(mult(p, q) for q in range(n)) for p in range(n))
    return FiniteGroup(n, table, idx(a.identity, b.identity))


def symmetric_group_3() -> FiniteGroup:
    """S3 on the letters {0,1,2}; element 0 is the identity permutation."""
    perms = sorted(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}

    def mult(p: int, q: int) -> int:
        # composition: first apply perms[q], then perms[p]
        pp, qq = perms[p], perms[q]
        return index[tuple(pp[qq[i]] for i in range(3))]

    table = tuple(tuple(mult(p, q) for q in range(6)) for p in range(6))
    return FiniteGroup(6, table)


GROUP_POOL: dict[str, FiniteGroup] = {
    "1": trivial_group(),
    "Z2": cyclic_group(2),
    "Z3": cyclic_group(3),
    "Z4": cyclic_group(4),
    "Z2xZ2": direct_product(cyclic_group(2), cyclic_group(2)),
    "Z6": cyclic_group(6),
    "S3": symmetric_group_3(),
    "Z8": cyclic_group(8),
}
