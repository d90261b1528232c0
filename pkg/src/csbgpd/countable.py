"""Rule-presented countable families of groupoid classes and their maps.

A :class:`CountableFamily` assigns a finite-group shape to every natural
index: finitely many listed exceptions, then an eventually-periodic tail.
A :class:`CountableMap` carries an injective piecewise-affine index map
(finite exception table plus one affine rule per residue class) together
with a group homomorphism per rule.  This is the smallest rule language
closed under composition by cases that still admits exact predecessor
solving, which is what makes the chain taxonomy decidable at all.

Unlike the total finite case, the image of a map here can be a proper
subset, so backward chains under the composite ``G after F`` genuinely
split into the four classical fates: stopped on the X side, stopped on
the Y side, cyclic, or infinite.  A finite machine cannot always decide
the infinite case, so ``Undetermined`` is a first-class verdict: it
marks exactly the point where a classical proof would appeal to
excluded middle.  The divergence detector upgrades it to
``ProvablyInfinite`` only when a rule provably re-applies forever.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousPredecessorError,
    ConstructionError,
    HypothesisError,
    PreconditionError,
    StructuralError,
)
from .functors import Functor, first_hom_defect
from .groupoid import Groupoid, Violation
from .groups import FiniteGroup, groups_isomorphic, validate_group
from . import kernel


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(eq=True)
class IndexMap:
    """A piecewise-affine map on natural indices.

    ``exceptions`` overrides the rules on finitely many indices; for
    ``n = modulus*q + r >= tail_start`` the image is ``a_r*q + b_r``.
    User-facing maps keep every ``b_r >= 0``; composites may carry
    negative offsets as long as no domain index maps below zero.
    """

    exceptions: tuple[tuple[int, int], ...]
    tail_start: int
    modulus: int
    rules: tuple[tuple[int, int], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise StructuralError("modulus must be at least 1")
        if len(self.rules) != self.modulus:
            raise StructuralError("exactly one rule required per residue")
        for r, (a, _) in enumerate(self.rules):
            if a < 1:
                raise StructuralError(f"rule {r} has slope {a} < 1")
        if self.tail_start < 0:
            raise StructuralError("tail_start must be nonnegative")
        self.exceptions = tuple(sorted(self.exceptions))
        keys = [n for n, _ in self.exceptions]
        if len(set(keys)) != len(keys):
            raise StructuralError("duplicate exception index")
        if any(n < 0 or v < 0 for n, v in self.exceptions):
            raise StructuralError("exception entries must be nonnegative")

    def exception_table(self) -> dict[int, int]:
        table = self._cache.get("exc")
        if table is None:
            table = dict(self.exceptions)
            self._cache["exc"] = table
        return table

    def q_min(self, r: int) -> int:
        return max(0, _ceil_div(self.tail_start - r, self.modulus))

    def apply(self, n: int) -> int | None:
        exc = self.exception_table()
        if n in exc:
            return exc[n]
        if n >= self.tail_start:
            r = n % self.modulus
            a, b = self.rules[r]
            return a * (n // self.modulus) + b
        return None

    def preimages(self, v: int) -> tuple[int, ...]:
        """All n with apply(n) == v, solved exactly from the rules."""
        exc = self.exception_table()
        out = [n for n, w in self.exceptions if w == v]
        for r, (a, b) in enumerate(self.rules):
            num = v - b
            if num >= 0 and num % a == 0:
                n = self.modulus * (num // a) + r
                if n >= self.tail_start and n not in exc:
                    out.append(n)
        return tuple(sorted(out))

    def max_exception_value(self) -> int:
        return max((v for _, v in self.exceptions), default=-1)

    def check_injective_exact(self) -> list[str]:
        """Exact global injectivity via linear congruences, no window.

        Two affine rules collide somewhere iff their offset difference is
        divisible by the gcd of their slopes (the solution set of the
        resulting linear Diophantine equation is unbounded, so domain
        cutoffs never save it).
        """
        out: list[str] = []
        seen_values: dict[int, int] = {}
        for n, v in self.exceptions:
            if v in seen_values:
                out.append(f"exceptions {seen_values[v]} and {n} share value {v}")
            seen_values[v] = n
        for n, v in self.exceptions:
            for m in self.preimages(v):
                if m != n:
                    out.append(f"exception {n} and index {m} share value {v}")
        for r1 in range(self.modulus):
            a1, b1 = self.rules[r1]
            for r2 in range(r1 + 1, self.modulus):
                a2, b2 = self.rules[r2]
                if (b2 - b1) % math.gcd(a1, a2) == 0:
                    out.append(f"rules {r1} and {r2} collide on a common value")
        return out

    def injective_exact(self) -> bool:
        flag = self._cache.get("injective")
        if flag is None:
            flag = not self.check_injective_exact()
            self._cache["injective"] = flag
        return flag

    def min_rule_value(self, r: int) -> int:
        a, b = self.rules[r]
        return a * self.q_min(r) + b


def compose_index_maps(outer: IndexMap, inner: IndexMap) -> IndexMap:
    """The composite ``outer after inner`` in the same rule language.

    The composite modulus is the product of the two moduli; its tail
    starts once the inner image has climbed past every index where the
    outer map is not pure-rule, and everything below that is tabulated
    pointwise as exceptions.
    """
    mf, mg = inner.modulus, outer.modulus
    M = mf * mg
    base = max(
        inner.tail_start,
        max((n for n, _ in inner.exceptions), default=-1) + 1,
    )
    bad = {n for n, _ in outer.exceptions} | set(range(outer.tail_start))
    max_bad = max(bad, default=-1)

    T = base
    for r in range(mf):
        a, b = inner.rules[r]
        q_thresh = max(
            (max_bad - b) // a + 1, max(0, _ceil_div(base - r, mf))
        )
        T = max(T, mf * q_thresh + r)

    exceptions: list[tuple[int, int]] = []
    for n in range(T):
        v = inner.apply(n)
        if v is None:
            continue
        w = outer.apply(v)
        if w is not None:
            exceptions.append((n, w))

    rules: list[tuple[int, int]] = []
    for big_r in range(M):
        r = big_r % mf
        a_f, b_f = inner.rules[r]
        c = (big_r - r) // mf
        A = a_f * mg
        B = a_f * c + b_f
        r_g = B % mg
        a_g, b_g = outer.rules[r_g]
        e = (B - r_g) // mg
        rules.append((a_g * a_f, a_g * e + b_g))
    return IndexMap(tuple(exceptions), T, M, tuple(rules))


@dataclass(frozen=True)
class ChainVerdict:
    """The fate of one backward chain under a composite index map."""

    kind: str  # y_stopper | x_stopper | cyclic | provably_infinite | undetermined
    root: int | None
    cycle_length: int | None
    steps: int
    prefix: tuple[int, ...]


Y_STOPPER = "y_stopper"
X_STOPPER = "x_stopper"
CYCLIC = "cyclic"
PROVABLY_INFINITE = "provably_infinite"
UNDETERMINED = "undetermined"


def _divergence_proved(composite: IndexMap, r: int, value: int, pred: int) -> bool:
    """Sound check that rule r keeps supplying strictly larger predecessors.

    Requires: the rule's slope divides the composite modulus (so the
    applicability congruence is preserved along the iteration), the
    residue matches the offset modulo the slope (so the next predecessor
    is again solvable by the same rule), strict growth at this step, and
    the predecessor already past every exception entry, both values
    (which would divert a later step) and indices (which would mask the
    rule and stop the chain).  Under exact global injectivity no other
    rule can ever fire, so the chain is provably infinite.
    """
    a, b = composite.rules[r]
    if composite.modulus % a != 0:
        return False
    if (r - b) % a != 0:
        return False
    if pred <= value:
        return False
    if pred <= composite.max_exception_value():
        return False
    if pred <= max((n for n, _ in composite.exceptions), default=-1):
        return False
    return True


def backward_chain(
    composite: IndexMap,
    x: int,
    budget: int,
    g_map: IndexMap | None = None,
    detect_divergence: bool = True,
) -> ChainVerdict:
    """Trace the backward chain of x, solving one exact predecessor per step.

    Stops at: no predecessor (a stopper, classified by solving membership
    in the image of ``g_map``), a revisited value (cyclic), a provable
    single-rule divergence, or the step budget (undetermined).
    """
    if not composite.injective_exact():
        raise AmbiguousPredecessorError(composite.check_injective_exact()[0])
    exc = composite.exception_table()
    values = [x]
    position = {x: 0}
    last_rule: int | None = None
    current = x
    steps = 0
    while steps < budget:
        preds = composite.preimages(current)
        if len(preds) > 1:
            raise AmbiguousPredecessorError(
                f"indices {preds} all map to {current}"
            )
        if not preds:
            if g_map is None:
                raise PreconditionError(
                    "stopper classification requires the backward index map"
                )
            kind = Y_STOPPER if g_map.preimages(current) else X_STOPPER
            return ChainVerdict(kind, current, None, steps, tuple(values))
        n = preds[0]
        rule: int | None = None if n in exc else n % composite.modulus
        if (
            detect_divergence
            and rule is not None
            and rule == last_rule
            and _divergence_proved(composite, rule, current, n)
        ):
            return ChainVerdict(
                PROVABLY_INFINITE, None, None, steps, tuple(values)
            )
        if n in position:
            length = len(values) - position[n]
            return ChainVerdict(
                CYCLIC, min(values[position[n] :]), length, steps, tuple(values)
            )
        values.append(n)
        position[n] = len(values) - 1
        last_rule = rule
        current = n
        steps += 1
    return ChainVerdict(UNDETERMINED, None, None, budget, tuple(values))


@dataclass(eq=True)
class CountableFamily:
    """An N-indexed family of finite-group shapes.

    Index n carries ``exceptions[n]`` when listed (exception indices live
    below ``tail_start``) and the residue shape ``tail_shapes[n % period]``
    otherwise.  Discrete sets are the special case where every shape is
    the trivial group.
    """

    shapes: dict[str, FiniteGroup]
    exceptions: dict[int, str]
    tail_start: int
    period: int
    tail_shapes: tuple[str, ...]

    def shape_id_at(self, n: int) -> str:
        return self.exceptions.get(n, self.tail_shapes[n % self.period])

    def group_at(self, n: int) -> FiniteGroup:
        return self.shapes[self.shape_id_at(n)]


def validate_family(fam: CountableFamily) -> list[Violation]:
    out: list[Violation] = []
    if fam.period < 1 or len(fam.tail_shapes) != fam.period:
        raise StructuralError("period must match the tail shape list")
    for sid in list(fam.tail_shapes) + list(fam.exceptions.values()):
        if sid not in fam.shapes:
            raise StructuralError(f"unknown shape id {sid!r}")
    for n in fam.exceptions:
        if not (0 <= n < fam.tail_start):
            out.append(Violation("exception-range", (n,), "index outside [0, tail_start)"))
    for sid, group in sorted(fam.shapes.items()):
        for v in validate_group(group):
            out.append(Violation(f"shape {sid}: {v.axiom}", v.indices))
    return out


@dataclass(eq=True)
class CountableMap:
    """An index map with one group-homomorphism payload per rule."""

    source: CountableFamily
    target: CountableFamily
    index_map: IndexMap
    exception_homs: dict[int, tuple[int, ...]]
    rule_homs: tuple[tuple[int, ...], ...]

    def hom_at(self, n: int) -> tuple[int, ...]:
        if n in self.index_map.exception_table():
            return self.exception_homs[n]
        return self.rule_homs[n % self.index_map.modulus]


def _check_hom(
    hom: tuple[int, ...], gs: FiniteGroup, gt: FiniteGroup
) -> str | None:
    if len(hom) != gs.order:
        return "wrong domain size"
    if any(not (0 <= v < gt.order) for v in hom):
        return "image element out of range"
    if hom[gs.identity] != gt.identity:
        return "does not preserve the identity"
    for a in range(gs.order):
        for b in range(gs.order):
            if hom[gs.mult(a, b)] != gt.mult(hom[a], hom[b]):
                return f"not multiplicative at ({a},{b})"
    return None


def validate_countable(F: CountableMap, window: int) -> list[Violation]:
    """Validate a countable map on [0, window).

    Checks rule overlap, totality, nonnegative injective images, and the
    homomorphism payloads against the shape endpoints at every window
    index.  Requires the window to reach one full period past the tail
    start so every rule is exercised.
    """
    imap = F.index_map
    if window < imap.tail_start + imap.modulus:
        raise PreconditionError(
            f"window {window} too small; need >= {imap.tail_start + imap.modulus}"
        )
    out = [
        Violation(f"source family: {v.axiom}", v.indices) for v in validate_family(F.source)
    ]
    out += [
        Violation(f"target family: {v.axiom}", v.indices) for v in validate_family(F.target)
    ]
    if len(F.rule_homs) != imap.modulus:
        raise StructuralError("one rule homomorphism required per residue")
    if set(F.exception_homs) != {n for n, _ in imap.exceptions}:
        raise StructuralError("exception homomorphisms must match exception indices")
    for r, (_, b) in enumerate(imap.rules):
        if b < 0:
            out.append(Violation("rule-offset", (r,), "negative offset in a user map"))
    for n, _ in imap.exceptions:
        if n >= imap.tail_start:
            out.append(Violation("rule-overlap", (n,), "exception collides with the tail"))

    images: dict[int, int] = {}
    for n in range(window):
        v = imap.apply(n)
        if v is None:
            out.append(Violation("totality", (n,), "no rule or exception applies"))
            continue
        if v < 0:
            out.append(Violation("negative-image", (n, v)))
            continue
        if v in images:
            out.append(Violation("injectivity", (images[v], n), f"both map to {v}"))
        else:
            images[v] = n
        problem = _check_hom(F.hom_at(n), F.source.group_at(n), F.target.group_at(v))
        if problem is not None:
            out.append(Violation("homomorphism", (n,), problem))
    return out


EMBEDDING = "embedding"
LEFT_CANCELLABLE_ONLY = "left_cancellable_only"
NEITHER = "neither"


def embedding_status_countable(F: CountableMap, window: int) -> str:
    """Classify a validated map: embedding, left-cancellable only, or neither.

    Rule level: an injective index map with bijective homomorphism
    payloads is an embedding; injective with some non-bijective payload
    is merely left-cancellable.  The verdict is cross-checked by
    materializing the window as finite groupoids and running the functor
    checkers.
    """
    imap = F.index_map
    seen: set[int] = set()
    injective = True
    bijective = True
    for n in range(window):
        v = imap.apply(n)
        if v is None or v in seen:
            injective = False
            break
        seen.add(v)
        hom = F.hom_at(n)
        if len(set(hom)) != len(hom) or len(hom) != F.target.group_at(v).order:
            bijective = False
    if injective:
        status = EMBEDDING if bijective else LEFT_CANCELLABLE_ONLY
    else:
        status = NEITHER

    mat = materialize_map(F, window)
    mat_embedding = first_hom_defect(mat) is None
    if mat_embedding != (status == EMBEDDING):
        raise ConstructionError(
            "rule-level and materialized embedding verdicts disagree"
        )
    return status


def materialize_family(
    fam: CountableFamily, window: int
) -> tuple[Groupoid, tuple[int, ...]]:
    """The window [0, window) as a disjoint union of deloopings.

    Object n is index n; returns the groupoid plus the morphism offset of
    each index's block.
    """
    src: list[int] = []
    dst: list[int] = []
    identity_of: list[int] = []
    composition: dict[tuple[int, int], int] = {}
    offsets: list[int] = []
    for n in range(window):
        g = fam.group_at(n)
        base = len(src)
        offsets.append(base)
        identity_of.append(base + g.identity)
        for _ in range(g.order):
            src.append(n)
            dst.append(n)
        for a in range(g.order):
            for b in range(g.order):
                composition[(base + a, base + b)] = base + g.mult(a, b)
    return (
        Groupoid(window, tuple(src), tuple(dst), tuple(identity_of), composition),
        tuple(offsets),
    )


def materialize_map(
    F: CountableMap, window: int, target_window: int | None = None
) -> Functor:
    """The map on [0, window) as a functor between materialized windows."""
    images = []
    for n in range(window):
        v = F.index_map.apply(n)
        if v is None:
            raise PreconditionError(f"map undefined at index {n}")
        images.append(v)
    if target_window is None:
        target_window = max(images, default=-1) + 1
    source_g, source_off = materialize_family(F.source, window)
    target_g, target_off = materialize_family(F.target, target_window)
    obj_map = tuple(images)
    mor_map: list[int] = []
    for n in range(window):
        hom = F.hom_at(n)
        for e in range(F.source.group_at(n).order):
            mor_map.append(target_off[images[n]] + hom[e])
    return Functor(source_g, target_g, obj_map, tuple(mor_map))


@dataclass(eq=True)
class CountableProblem:
    """Families X, Y with maps F : X -> Y and G : Y -> X."""

    X: CountableFamily
    Y: CountableFamily
    F: CountableMap
    G: CountableMap
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def composite(self) -> IndexMap:
        comp = self._cache.get("composite")
        if comp is None:
            comp = compose_index_maps(self.G.index_map, self.F.index_map)
            self._cache["composite"] = comp
        return comp


def validate_problem(problem: CountableProblem, window: int) -> list[Violation]:
    out = [
        Violation(f"F: {v.axiom}", v.indices, v.detail)
        for v in validate_countable(problem.F, window)
    ]
    out += [
        Violation(f"G: {v.axiom}", v.indices, v.detail)
        for v in validate_countable(problem.G, window)
    ]
    return out


def is_g_point_countable(
    problem: CountableProblem,
    x: int,
    budget: int,
    detect_divergence: bool = True,
) -> tuple[bool | None, ChainVerdict]:
    """Budgeted g-point semi-decision; None means undetermined.

    A stopper on the Y side, a cycle, or a provably infinite chain means
    every ancestor keeps an inhabited G-fiber (true); a stopper on the X
    side is exactly the f-point witness (false); exhausting the budget
    propagates the undetermined verdict.
    """
    chain = backward_chain(
        problem.composite(),
        x,
        budget,
        g_map=problem.G.index_map,
        detect_divergence=detect_divergence,
    )
    if chain.kind in (Y_STOPPER, CYCLIC, PROVABLY_INFINITE):
        return True, chain
    if chain.kind == X_STOPPER:
        return False, chain
    return None, chain


def window_verdicts(
    problem: CountableProblem,
    window: int,
    budget: int,
    detect_divergence: bool = True,
) -> dict[int, ChainVerdict]:
    return {
        x: backward_chain(
            problem.composite(),
            x,
            budget,
            g_map=problem.G.index_map,
            detect_divergence=detect_divergence,
        )
        for x in range(window)
    }


@dataclass(frozen=True)
class WindowEntry:
    case: str  # "g_inverse" | "f_image"
    to: int
    hom: tuple[int, ...]


@dataclass(eq=True)
class WindowedH:
    window: int
    entries: dict[int, WindowEntry]
    undetermined: tuple[int, ...]
    verdicts: dict[int, ChainVerdict]


def window_h_indices(
    problem: CountableProblem, verdicts: dict[int, ChainVerdict]
) -> tuple[dict[int, tuple[str, int]], tuple[int, ...]]:
    """The index-level part of the window construction.

    Well-defined whenever both index maps are injective: a g-point index
    always has exactly one G-preimage, an f-point maps through F.  This
    exists even for merely left-cancellable maps, being the point-level
    map; only the group payloads need the embedding hypothesis.
    """
    entries: dict[int, tuple[str, int]] = {}
    undetermined: list[int] = []
    for x in sorted(verdicts):
        chain = verdicts[x]
        if chain.kind == UNDETERMINED:
            undetermined.append(x)
        elif chain.kind == X_STOPPER:
            v = problem.F.index_map.apply(x)
            if v is None:
                raise PreconditionError(f"F undefined at {x}")
            entries[x] = ("f_image", v)
        else:
            preds = problem.G.index_map.preimages(x)
            if len(preds) != 1:
                raise ConstructionError(
                    f"g-point {x} has {len(preds)} G-preimages; expected exactly one"
                )
            entries[x] = ("g_inverse", preds[0])
    return entries, tuple(undetermined)


def construct_h_window(
    problem: CountableProblem,
    window: int,
    budget: int,
    detect_divergence: bool = True,
) -> WindowedH:
    """The equivalence on a window: inverse of G on g-points, F elsewhere.

    Both maps must classify as embeddings, which makes every G payload
    invertible along g-point chains.  Indices whose chains stay
    undetermined within the budget are reported and left unmapped; no
    entry is ever guessed.
    """
    for name, cmap in (("F", problem.F), ("G", problem.G)):
        if embedding_status_countable(cmap, window) != EMBEDDING:
            raise HypothesisError(f"{name} is not an embedding on the window")
    verdicts = window_verdicts(problem, window, budget, detect_divergence)
    index_entries, undetermined = window_h_indices(problem, verdicts)
    entries: dict[int, WindowEntry] = {}
    for x, (case, to) in index_entries.items():
        if case == "f_image":
            entries[x] = WindowEntry(case, to, problem.F.hom_at(x))
        else:
            hom = problem.G.hom_at(to)
            if len(set(hom)) != len(hom):
                raise ConstructionError(f"G payload at {to} is not invertible")
            inverse = tuple(hom.index(e) for e in range(len(hom)))
            entries[x] = WindowEntry(case, to, inverse)
    return WindowedH(window, entries, tuple(undetermined), verdicts)


@dataclass(frozen=True)
class FamiliesEquivalence:
    equivalent: bool
    reason: str


def _shape_counts(fam: CountableFamily) -> list[tuple[FiniteGroup, int | None]]:
    """Occurrence count per shape iso class; None encodes countably many."""
    buckets: list[tuple[FiniteGroup, int | None]] = []

    def bump(group: FiniteGroup, amount: int | None) -> None:
        for i, (rep, count) in enumerate(buckets):
            if groups_isomorphic(rep, group) is not None:
                if amount is None or count is None:
                    buckets[i] = (rep, None)
                else:
                    buckets[i] = (rep, count + amount)
                return
        buckets.append((group, amount))

    for sid in fam.tail_shapes:
        bump(fam.shapes[sid], None)
    for n in sorted(fam.exceptions):
        bump(fam.shapes[fam.exceptions[n]], 1)
    return buckets


def families_equivalent(
    a: CountableFamily, b: CountableFamily
) -> FamiliesEquivalence:
    """Decide equivalence by shape-class cardinality bookkeeping.

    A shape occurring in a periodic tail occurs countably often (removing
    the finitely many exception indices never changes that); otherwise
    its finitely many exception occurrences must match exactly.
    """
    counts_a = _shape_counts(a)
    counts_b = list(_shape_counts(b))
    for rep, count in counts_a:
        for i, (rep_b, count_b) in enumerate(counts_b):
            if groups_isomorphic(rep, rep_b) is not None:
                if count != count_b:
                    return FamiliesEquivalence(
                        False,
                        f"shape of order {rep.order}: count "
                        f"{'inf' if count is None else count} vs "
                        f"{'inf' if count_b is None else count_b}",
                    )
                counts_b.pop(i)
                break
        else:
            return FamiliesEquivalence(
                False,
                f"shape of order {rep.order} occurs only on one side",
            )
    if counts_b:
        rep, _ = counts_b[0]
        return FamiliesEquivalence(
            False, f"shape of order {rep.order} occurs only on one side"
        )
    return FamiliesEquivalence(True, "")


def predecessor_array(
    composite: IndexMap, window: int, fill_rule=None
) -> np.ndarray:
    """Dense int32 predecessor table on [0, window): -1 no predecessor
    anywhere, -2 predecessor exists but lies outside the window.

    Built by one forward fill per rule (through the selected kernel
    backend, overridable via `fill_rule`) plus an exact out-of-window
    solve; a collision is an injectivity bug and raises.  32-bit entries
    keep the hot arrays at half the memory traffic.
    """
    if window >= 2**31:
        raise PreconditionError("windows beyond 2^31 are not supported")
    fill = fill_rule if fill_rule is not None else kernel.fill_predecessors
    pred = np.full(window, -1, dtype=np.int32)
    written = 0

    exc = composite.exception_table()
    exc_sources = np.fromiter(exc.keys(), dtype=np.int64, count=len(exc))
    if exc:
        values = np.fromiter(exc.values(), dtype=np.int64, count=len(exc))
        inside = values < window
        src_inside = exc_sources[inside]
        pred[values[inside]] = np.where(src_inside < window, src_inside, -2)
        written += int(inside.sum())
    M = composite.modulus
    for r, (a, b) in enumerate(composite.rules):
        written = fill(
            pred, written, M, r, a, b, composite.q_min(r), exc_sources
        )

    if window - int((pred == -1).sum()) != written:
        # a slot was written twice: recover one offending pair exactly
        for x in range(window):
            hit = composite.preimages(x)
            if len(hit) > 1:
                raise AmbiguousPredecessorError(
                    f"indices {hit[0]} and {hit[1]} both map to {x}"
                )
        raise AmbiguousPredecessorError("colliding predecessors in window")
    return pred


def classify_roots(pred: np.ndarray, g_map: IndexMap) -> np.ndarray:
    """Rewrite genuine root sentinels in place: -1 stays for roots outside
    the image of g_map, -3 marks roots inside it.  Returns `pred`."""
    root_positions = np.nonzero(pred == -1)[0]
    if len(root_positions):
        y_side = in_image_mask(g_map, root_positions)
        pred[root_positions[y_side]] = -3
    return pred


def in_image_mask(g_map: IndexMap, values: np.ndarray) -> np.ndarray:
    """Vectorized exact membership of each value in the image of g_map."""
    mask = np.zeros(len(values), dtype=bool)
    exc = g_map.exception_table()
    if exc:
        mask |= np.isin(values, np.fromiter(exc.values(), dtype=np.int64))
    M = g_map.modulus
    exc_sources = np.fromiter(exc.keys(), dtype=np.int64) if exc else None
    for r, (a, b) in enumerate(g_map.rules):
        num = values - b
        ok = (num >= 0) & (num % a == 0)
        q = np.where(ok, num // a, 0)
        n = M * q + r
        ok &= n >= g_map.tail_start
        if exc_sources is not None and ok.any():
            ok &= ~np.isin(n, exc_sources)
        mask |= ok
    return mask


@dataclass(eq=False)
class WindowDecomposition:
    """Chain decomposition of a dense window, produced by the kernel."""

    window: int
    kinds: np.ndarray  # uint8 codes, see KIND_* in csbgpd.kernel
    roots: np.ndarray
    depths: np.ndarray
    backend: str

    def kind_of(self, x: int) -> str:
        code = int(self.kinds[x])
        return {
            kernel.KIND_X_STOPPER: X_STOPPER,
            kernel.KIND_Y_STOPPER: Y_STOPPER,
            kernel.KIND_CYCLIC: CYCLIC,
            kernel.KIND_UNDETERMINED: UNDETERMINED,
        }[code]


def decompose_window(
    composite: IndexMap,
    g_map: IndexMap,
    window: int,
    backend: str | None = None,
) -> WindowDecomposition:
    """Classify every index in [0, window) by the fate of its backward chain.

    This is the dense bulk path: predecessors are tabulated once, the
    selected kernel walks every chain with memoization, and stopper roots
    are classified against the image of g_map in one vectorized pass.
    Chains that leave the window upward are reported undetermined rather
    than resolved, matching the budget semantics of the exact tracer.
    """
    if not composite.injective_exact():
        raise AmbiguousPredecessorError(composite.check_injective_exact()[0])
    mod = kernel.get_backend(backend)
    pred = predecessor_array(composite, window, fill_rule=mod.fill_predecessors)
    classify_roots(pred, g_map)
    kinds, roots, depths = mod.decompose_chains(pred)
    return WindowDecomposition(
        window, kinds, roots, depths, backend or kernel.BACKEND
    )


def chains_dot(
    verdicts: dict[int, ChainVerdict], window: int
) -> str:
    """Render traced chains as DOT: one edge per backward step, roots
    colored by verdict."""
    colors = {
        X_STOPPER: "indianred",
        Y_STOPPER: "palegreen",
        CYCLIC: "skyblue",
        PROVABLY_INFINITE: "gold",
        UNDETERMINED: "gray",
    }
    node_color: dict[int, str] = {}
    edges: set[tuple[int, int]] = set()
    for x in sorted(verdicts):
        chain = verdicts[x]
        for earlier, later in zip(chain.prefix[1:], chain.prefix):
            edges.add((earlier, later))
        if chain.kind in (X_STOPPER, Y_STOPPER) and chain.root is not None:
            node_color[chain.root] = colors[chain.kind]
        elif chain.kind == CYCLIC:
            for v in chain.prefix:
                node_color.setdefault(v, colors[CYCLIC])
        elif chain.prefix:
            node_color.setdefault(chain.prefix[-1], colors[chain.kind])
    nodes = sorted(set(verdicts) | {v for e in edges for v in e} | set(node_color))
    lines = ["digraph chains {", "  rankdir=LR;"]
    for v in nodes:
        if v in node_color:
            lines.append(
                f'  "{v}" [style=filled, fillcolor={node_color[v]}];'
            )
        else:
            lines.append(f'  "{v}";')
    for a, b in sorted(edges):
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
