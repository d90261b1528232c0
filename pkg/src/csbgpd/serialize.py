"""JSON (de)serialization for every on-disk format.

The groupoid schema is bit-exact and strict: composition triples must be
listed for exactly the composable pairs, and a missing pair is a schema
error rather than an axiom violation.  All writers emit sorted keys with
two-space indentation so reports are byte-stable across runs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .countable import CountableFamily, CountableMap, CountableProblem, IndexMap
from .csb import CsbCertificate, CsbProblem
from .errors import SchemaError
from .functors import Functor, NaturalIso
from .groupoid import Groupoid
from .groups import FiniteGroup


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def _get(obj: dict, key: str, kind: type, where: str) -> Any:
    _require(isinstance(obj, dict), f"{where}: expected an object")
    _require(key in obj, f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is int:
        _require(isinstance(value, int) and not isinstance(value, bool),
                 f"{where}: {key!r} must be an integer")
    else:
        _require(isinstance(value, kind), f"{where}: {key!r} must be {kind.__name__}")
    return value


def groupoid_to_obj(g: Groupoid) -> dict:
    return {
        "objects": g.object_count,
        "morphisms": [
            {"src": g.src[m], "dst": g.dst[m]} for m in range(g.morphism_count)
        ],
        "identity": list(g.identity_of),
        "compose": sorted([s, f, r] for (s, f), r in g.composition.items()),
    }


def groupoid_from_obj(obj: dict) -> Groupoid:
    n = _get(obj, "objects", int, "groupoid")
    morphisms = _get(obj, "morphisms", list, "groupoid")
    src: list[int] = []
    dst: list[int] = []
    for i, entry in enumerate(morphisms):
        src.append(_get(entry, "src", int, f"morphism {i}"))
        dst.append(_get(entry, "dst", int, f"morphism {i}"))
    identity = _get(obj, "identity", list, "groupoid")
    _require(all(isinstance(v, int) for v in identity), "identity must hold integers")
    triples = _get(obj, "compose", list, "groupoid")
    composition: dict[tuple[int, int], int] = {}
    for i, triple in enumerate(triples):
        _require(
            isinstance(triple, list) and len(triple) == 3
            and all(isinstance(v, int) for v in triple),
            f"compose entry {i} must be [second, first, result]",
        )
        s, f, r = triple
        _require((s, f) not in composition, f"duplicate compose entry ({s}, {f})")
        composition[(s, f)] = r
    g = Groupoid(n, tuple(src), tuple(dst), tuple(identity), composition)
    m = len(src)
    for s in range(m):
        for f in range(m):
            composable = 0 <= f < m and dst[f] == src[s]
            if composable and (s, f) not in composition:
                raise SchemaError(f"absent composable pair ({s}, {f})")
    for (s, f) in composition:
        _require(0 <= s < m and 0 <= f < m, f"compose pair ({s}, {f}) out of range")
        if dst[f] != src[s]:
            raise SchemaError(f"compose entry ({s}, {f}) is not a composable pair")
    return g


def functor_to_obj(F: Functor, inline: bool = True) -> dict:
    out: dict[str, Any] = {
        "obj_map": list(F.obj_map),
        "mor_map": list(F.mor_map),
    }
    if inline:
        out["source"] = groupoid_to_obj(F.source)
        out["target"] = groupoid_to_obj(F.target)
    return out


def functor_from_obj(
    obj: dict,
    source: Groupoid | None = None,
    target: Groupoid | None = None,
    base_dir: Path | None = None,
) -> Functor:
    def resolve(key: str, given: Groupoid | None) -> Groupoid:
        if key in obj:
            ref = obj[key]
            if isinstance(ref, str):
                _require(base_dir is not None, f"functor: {key} path needs a base dir")
                loaded = load_json(Path(base_dir) / ref)
                return groupoid_from_obj(loaded)
            return groupoid_from_obj(ref)
        _require(given is not None, f"functor: missing {key!r}")
        return given  # type: ignore[return-value]

    src = resolve("source", source)
    tgt = resolve("target", target)
    obj_map = _get(obj, "obj_map", list, "functor")
    mor_map = _get(obj, "mor_map", list, "functor")
    _require(all(isinstance(v, int) for v in obj_map), "obj_map must hold integers")
    _require(all(isinstance(v, int) for v in mor_map), "mor_map must hold integers")
    return Functor(src, tgt, tuple(obj_map), tuple(mor_map))


def natural_iso_to_obj(n: NaturalIso) -> dict:
    return {"components": list(n.components)}


def problem_to_obj(problem: CsbProblem) -> dict:
    return {
        "X": groupoid_to_obj(problem.X),
        "Y": groupoid_to_obj(problem.Y),
        "F": functor_to_obj(problem.F, inline=False),
        "G": functor_to_obj(problem.G, inline=False),
    }


def problem_from_obj(obj: dict) -> CsbProblem:
    X = groupoid_from_obj(_get(obj, "X", dict, "problem"))
    Y = groupoid_from_obj(_get(obj, "Y", dict, "problem"))
    F = functor_from_obj(_get(obj, "F", dict, "problem"), source=X, target=Y)
    G = functor_from_obj(_get(obj, "G", dict, "problem"), source=Y, target=X)
    return CsbProblem.from_embeddings(F, G)


def certificate_to_obj(cert: CsbCertificate) -> dict:
    witnesses = []
    for v in cert.class_witnesses:
        if v.g_point:
            witnesses.append({"g_point": True, "y": v.witness_y, "p": v.witness_p})
        else:
            witnesses.append(
                {
                    "g_point": False,
                    "root_class": v.f_root_class,
                    "steps": v.f_steps,
                }
            )
    return {
        "h": functor_to_obj(cert.h, inline=False),
        "class_tags": list(cert.class_tags),
        "class_witnesses": witnesses,
        "split_witnesses": [list(w) for w in cert.split_witnesses],
        "g_branch_classes": list(cert.g_branch_classes),
        "f_branch_classes": list(cert.f_branch_classes),
        "em_sites": list(cert.em_sites),
        "checks": dict(cert.checks),
        "valid": cert.valid,
    }


def group_to_obj(g: FiniteGroup) -> dict:
    return {
        "order": g.order,
        "table": [list(row) for row in g.table],
        "identity": g.identity,
    }


def group_from_obj(obj: dict) -> FiniteGroup:
    order = _get(obj, "order", int, "group")
    table = _get(obj, "table", list, "group")
    _require(
        all(isinstance(row, list) and all(isinstance(v, int) for v in row) for row in table),
        "group table must be a matrix of integers",
    )
    identity = obj.get("identity", 0)
    _require(isinstance(identity, int), "group identity must be an integer")
    return FiniteGroup(order, tuple(tuple(row) for row in table), identity)


def family_to_obj(fam: CountableFamily) -> dict:
    return {
        "shapes": {sid: group_to_obj(g) for sid, g in sorted(fam.shapes.items())},
        "exceptions": [[n, fam.exceptions[n]] for n in sorted(fam.exceptions)],
        "tail_start": fam.tail_start,
        "period": fam.period,
        "tail_shapes": list(fam.tail_shapes),
    }


def family_from_obj(obj: dict) -> CountableFamily:
    shapes_obj = _get(obj, "shapes", dict, "family")
    shapes = {str(sid): group_from_obj(g) for sid, g in shapes_obj.items()}
    exceptions: dict[int, str] = {}
    for entry in _get(obj, "exceptions", list, "family"):
        _require(
            isinstance(entry, list) and len(entry) == 2 and isinstance(entry[0], int),
            "family exception entries must be [index, shape_id]",
        )
        exceptions[entry[0]] = str(entry[1])
    tail_shapes = _get(obj, "tail_shapes", list, "family")
    return CountableFamily(
        shapes=shapes,
        exceptions=exceptions,
        tail_start=_get(obj, "tail_start", int, "family"),
        period=_get(obj, "period", int, "family"),
        tail_shapes=tuple(str(s) for s in tail_shapes),
    )


def index_map_to_obj(imap: IndexMap) -> dict:
    return {
        "exceptions": [list(e) for e in imap.exceptions],
        "tail_start": imap.tail_start,
        "modulus": imap.modulus,
        "rules": [list(r) for r in imap.rules],
    }


def index_map_from_obj(obj: dict) -> IndexMap:
    exceptions = []
    for entry in _get(obj, "exceptions", list, "index map"):
        _require(
            isinstance(entry, list) and len(entry) == 2
            and all(isinstance(v, int) for v in entry),
            "index map exceptions must be [n, value] pairs",
        )
        exceptions.append((entry[0], entry[1]))
    rules = []
    for entry in _get(obj, "rules", list, "index map"):
        _require(
            isinstance(entry, list) and len(entry) == 2
            and all(isinstance(v, int) for v in entry),
            "index map rules must be [slope, offset] pairs",
        )
        rules.append((entry[0], entry[1]))
    return IndexMap(
        tuple(exceptions),
        _get(obj, "tail_start", int, "index map"),
        _get(obj, "modulus", int, "index map"),
        tuple(rules),
    )


def countable_map_to_obj(cmap: CountableMap, inline: bool = True) -> dict:
    out: dict[str, Any] = {
        "index": index_map_to_obj(cmap.index_map),
        "exception_homs": [
            [n, list(cmap.exception_homs[n])] for n in sorted(cmap.exception_homs)
        ],
        "rule_homs": [list(h) for h in cmap.rule_homs],
    }
    if inline:
        out["source"] = family_to_obj(cmap.source)
        out["target"] = family_to_obj(cmap.target)
    return out


def countable_map_from_obj(
    obj: dict,
    source: CountableFamily | None = None,
    target: CountableFamily | None = None,
) -> CountableMap:
    if "source" in obj:
        source = family_from_obj(_get(obj, "source", dict, "map"))
    if "target" in obj:
        target = family_from_obj(_get(obj, "target", dict, "map"))
    _require(source is not None and target is not None, "map: missing families")
    exception_homs: dict[int, tuple[int, ...]] = {}
    for entry in _get(obj, "exception_homs", list, "map"):
        _require(
            isinstance(entry, list) and len(entry) == 2 and isinstance(entry[0], int),
            "exception_homs entries must be [n, hom]",
        )
        exception_homs[entry[0]] = tuple(entry[1])
    rule_homs = tuple(
        tuple(h) for h in _get(obj, "rule_homs", list, "map")
    )
    return CountableMap(
        source=source,  # type: ignore[arg-type]
        target=target,  # type: ignore[arg-type]
        index_map=index_map_from_obj(_get(obj, "index", dict, "map")),
        exception_homs=exception_homs,
        rule_homs=rule_homs,
    )


def countable_problem_to_obj(problem: CountableProblem) -> dict:
    return {
        "X": family_to_obj(problem.X),
        "Y": family_to_obj(problem.Y),
        "F": countable_map_to_obj(problem.F, inline=False),
        "G": countable_map_to_obj(problem.G, inline=False),
    }


def countable_problem_from_obj(obj: dict) -> CountableProblem:
    X = family_from_obj(_get(obj, "X", dict, "countable problem"))
    Y = family_from_obj(_get(obj, "Y", dict, "countable problem"))
    F = countable_map_from_obj(
        _get(obj, "F", dict, "countable problem"), source=X, target=Y
    )
    G = countable_map_from_obj(
        _get(obj, "G", dict, "countable problem"), source=Y, target=X
    )
    return CountableProblem(X=X, Y=Y, F=F, G=G)


def load_json(path: Path | str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def sniff_kind(obj: Any) -> str:
    """Classify a parsed document: groupoid, functor, problem,
    countable_problem, countable_map, family, or index_map."""
    if not isinstance(obj, dict):
        raise SchemaError("top-level JSON value must be an object")
    if "objects" in obj and "compose" in obj:
        return "groupoid"
    if "obj_map" in obj and "mor_map" in obj:
        return "functor"
    if all(k in obj for k in ("X", "Y", "F", "G")):
        inner = obj["F"]
        if isinstance(inner, dict) and "rules" in inner.get("index", {}):
            return "countable_problem"
        if isinstance(inner, dict) and "obj_map" in inner:
            return "problem"
        raise SchemaError("cannot classify the F entry of the problem")
    if "index" in obj and "rule_homs" in obj:
        return "countable_map"
    if "tail_shapes" in obj and "shapes" in obj:
        return "family"
    if "rules" in obj and "modulus" in obj:
        return "index_map"
    raise SchemaError("unrecognized document shape")
