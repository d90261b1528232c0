"""Command-line surface.

Exit codes are uniform across subcommands:

* 0: success, the checked property holds;
* 1: the checked property is false (a counterexample is reported);
* 2: invalid input (parse, schema, structural, or hypothesis failure);
* 3: undetermined, meaning the answer needs more budget than allowed: the
  point where a classical argument would invoke excluded middle.

Reports are byte-stable given the same inputs and flags; only the bench
command emits timings.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import catalog, countable, kernel, serialize
from .csb import verify_csb
from .errors import CsbError, HypothesisError, PreconditionError, SchemaError
from .functors import (
    first_cancellation_defect,
    first_hom_defect,
    is_equivalence,
    validate_functor,
)
from .groupoid import validate_groupoid


@dataclass
class CommandResult:
    exit_code: int  # 0 success / 1 property-false / 2 invalid-input / 3 undetermined
    summary: str
    report: dict[str, Any]
    report_path: str | None = None


def _load(path: str) -> tuple[str, Any]:
    obj = serialize.load_json(path)
    return serialize.sniff_kind(obj), obj


def cmd_validate(path: str) -> CommandResult:
    kind, obj = _load(path)
    if kind == "groupoid":
        violations = validate_groupoid(serialize.groupoid_from_obj(obj))
    elif kind == "functor":
        violations = validate_functor(serialize.functor_from_obj(obj, base_dir=Path(path).parent))
    elif kind == "countable_map":
        cmap = serialize.countable_map_from_obj(obj)
        violations = countable.validate_countable(cmap, _default_window(cmap))
    elif kind == "countable_problem":
        problem = serialize.countable_problem_from_obj(obj)
        window = max(_default_window(problem.F), _default_window(problem.G))
        violations = countable.validate_problem(problem, window)
    elif kind == "problem":
        serialize.problem_from_obj(obj)  # construction enforces everything
        violations = []
    else:
        raise SchemaError(f"cannot validate a document of kind {kind!r}")
    report = {
        "kind": kind,
        "violations": [
            {"axiom": v.axiom, "indices": list(v.indices), "detail": v.detail}
            for v in violations
        ],
    }
    if violations:
        return CommandResult(1, f"{kind}: {len(violations)} violation(s)", report)
    return CommandResult(0, f"{kind}: valid", report)


def _default_window(cmap: countable.CountableMap) -> int:
    imap = cmap.index_map
    return max(100, imap.tail_start + imap.modulus)


def cmd_check(kind: str, path: str) -> CommandResult:
    doc_kind, obj = _load(path)
    report: dict[str, Any] = {"check": kind}
    if kind == "proposition":
        if doc_kind != "groupoid":
            raise SchemaError("proposition check expects a groupoid file")
        g = serialize.groupoid_from_obj(obj)
        if validate_groupoid(g):
            raise PreconditionError("groupoid does not validate")
        for x in range(g.object_count):
            for x2 in range(g.object_count):
                size = len(g.hom(x, x2))
                if size != 1:
                    report["counterexample"] = {"pair": [x, x2], "hom_size": size}
                    return CommandResult(1, "not a proposition", report)
        return CommandResult(0, "proposition", report)

    if doc_kind != "functor":
        raise SchemaError(f"{kind} check expects a functor file")
    F = serialize.functor_from_obj(obj, base_dir=Path(path).parent)
    if validate_functor(F):
        raise PreconditionError("functor does not validate")
    if kind == "embedding":
        defect = first_hom_defect(F)
        if defect is None:
            return CommandResult(0, "embedding", report)
        x, x2, reason = defect
        report["counterexample"] = {"pair": [x, x2], "reason": reason}
        return CommandResult(1, "not an embedding", report)
    if kind == "cancellable":
        defect = first_cancellation_defect(F)
        if defect is None:
            return CommandResult(0, "left-cancellable", report)
        report["counterexample"] = {"pair": list(defect)}
        return CommandResult(1, "not left-cancellable", report)
    if kind == "equivalence":
        witness = is_equivalence(F)
        if witness is None:
            defect = first_hom_defect(F)
            if defect is not None:
                report["counterexample"] = {
                    "pair": [defect[0], defect[1]],
                    "reason": defect[2],
                }
            else:
                report["counterexample"] = {"reason": "not essentially surjective"}
            return CommandResult(1, "not an equivalence", report)
        report["witness"] = {
            "quasi_inverse": serialize.functor_to_obj(witness.quasi_inverse, inline=False),
            "counit": serialize.natural_iso_to_obj(witness.counit),
            "unit": serialize.natural_iso_to_obj(witness.unit),
        }
        return CommandResult(0, "equivalence", report)
    raise SchemaError(f"unknown check kind {kind!r}")


def cmd_csb(path: str, certificate_out: str | None) -> CommandResult:
    doc_kind, obj = _load(path)
    if doc_kind != "problem":
        raise SchemaError("csb expects a problem file with X, Y, F, G")
    problem = serialize.problem_from_obj(obj)  # raises HypothesisError on bad inputs
    cert = verify_csb(problem)
    report = serialize.certificate_to_obj(cert)
    if certificate_out:
        Path(certificate_out).write_text(serialize.dumps_canonical(report))
    summary = "certificate valid" if cert.valid else "certificate INVALID"
    if not cert.valid:
        failing = sorted(name for name, ok in cert.checks.items() if not ok)
        summary += f" (failing: {', '.join(failing)})"
    return CommandResult(0 if cert.valid else 1, summary, report)


def cmd_chains(
    path: str,
    window: int,
    budget: int,
    dot_out: str | None,
    detect_divergence: bool = True,
) -> CommandResult:
    doc_kind, obj = _load(path)
    if doc_kind != "countable_problem":
        raise SchemaError("chains expects a countable problem file")
    problem = serialize.countable_problem_from_obj(obj)
    validation_window = max(
        window, _default_window(problem.F), _default_window(problem.G)
    )
    violations = countable.validate_problem(problem, validation_window)
    if violations:
        raise PreconditionError(f"invalid rules: {violations[0]}")

    verdicts = countable.window_verdicts(problem, window, budget, detect_divergence)
    statuses = {
        "F": countable.embedding_status_countable(problem.F, window),
        "G": countable.embedding_status_countable(problem.G, window),
    }
    both_embeddings = all(s == countable.EMBEDDING for s in statuses.values())
    if both_embeddings:
        h = countable.construct_h_window(problem, window, budget, detect_divergence)
        entries = {
            str(x): {"case": e.case, "to": e.to, "hom": list(e.hom)}
            for x, e in sorted(h.entries.items())
        }
        undetermined = list(h.undetermined)
        h_report: dict[str, Any] = {"payloads": "full", "entries": entries}
    else:
        index_entries, undetermined_t = countable.window_h_indices(problem, verdicts)
        entries = {
            str(x): {"case": case, "to": to}
            for x, (case, to) in sorted(index_entries.items())
        }
        undetermined = list(undetermined_t)
        h_report = {
            "payloads": "index-level only (not an embedding pair)",
            "entries": entries,
        }

    counts: dict[str, int] = {}
    for chain in verdicts.values():
        counts[chain.kind] = counts.get(chain.kind, 0) + 1
    report = {
        "window": window,
        "budget": budget,
        "divergence_detection": detect_divergence,
        "embedding_status": statuses,
        "verdicts": [
            {
                "index": x,
                "kind": verdicts[x].kind,
                "root": verdicts[x].root,
                "steps": verdicts[x].steps,
            }
            for x in sorted(verdicts)
        ],
        "counts": dict(sorted(counts.items())),
        "h": {"undetermined": undetermined, **h_report},
    }
    if dot_out:
        Path(dot_out).write_text(countable.chains_dot(verdicts, window))
    undecided = counts.get(countable.UNDETERMINED, 0)
    if undecided:
        return CommandResult(
            3, f"{undecided} undetermined chain(s) in window {window}", report
        )
    parts = ", ".join(f"{k}: {v}" for k, v in sorted(counts.items()))
    return CommandResult(0, f"window {window} decomposed ({parts})", report)


def _bench_instance() -> tuple[countable.IndexMap, countable.IndexMap]:
    """The all-trivial-shapes benchmark instance: both maps shift by one,
    so the composite shifts by two and every chain walks down to 0 or 1."""
    shift = countable.IndexMap((), 0, 1, ((1, 1),))
    composite = countable.compose_index_maps(shift, shift)
    return composite, shift


def cmd_bench(sizes: list[int], repeats: int = 3) -> CommandResult:
    if not sizes:
        sizes = [10_000, 100_000, 1_000_000]
    if any(s < 1 for s in sizes):
        raise PreconditionError("bench sizes must be >= 1")
    composite, g_map = _bench_instance()
    backends = sorted(kernel.available_backends())
    rows: list[dict[str, Any]] = []
    for backend in backends:
        for size in sizes:
            times = []
            for _ in range(repeats):
                start = time.perf_counter()
                countable.decompose_window(composite, g_map, size, backend=backend)
                times.append(time.perf_counter() - start)
            best = min(times)
            rows.append(
                {
                    "backend": backend,
                    "size": size,
                    "seconds": round(best, 6),
                    "seconds_max": round(max(times), 6),
                    "elements_per_second": round(size / best),
                }
            )
    exponents: dict[str, float] = {}
    for backend in backends:
        points = [(r["size"], r["seconds"]) for r in rows if r["backend"] == backend]
        if len(points) >= 2:
            logs = np.log([p[0] for p in points])
            logt = np.log([max(p[1], 1e-9) for p in points])
            slope = float(np.polyfit(logs, logt, 1)[0])
            exponents[backend] = round(slope, 3)
    report = {
        "instance": "shift-by-one both ways (discrete shapes)",
        "active_backend": kernel.BACKEND,
        "rows": rows,
        "fitted_exponents": exponents,
        "repeats": repeats,
    }
    lines = [
        f"{r['backend']:>8}  n={r['size']:>9}  {r['seconds']:.4f}s  "
        f"{r['elements_per_second']:>12} elem/s"
        for r in rows
    ]
    summary = "\n".join(
        lines + [f"fitted exponents: {exponents}", f"active backend: {kernel.BACKEND}"]
    )
    return CommandResult(0, summary, report)


def cmd_catalog_list() -> CommandResult:
    names = list(catalog.catalog_names()) + ["random_groupoid", "random_pair"]
    return CommandResult(0, "\n".join(names), {"names": names})


def _emit_payload(value: Any, stem: str, out_dir: Path) -> str:
    from .countable import CountableProblem, IndexMap
    from .csb import CsbProblem as FiniteProblem
    from .functors import Functor
    from .groupoid import Groupoid

    if isinstance(value, Groupoid):
        obj = serialize.groupoid_to_obj(value)
    elif isinstance(value, Functor):
        obj = serialize.functor_to_obj(value)
    elif isinstance(value, CountableProblem):
        obj = serialize.countable_problem_to_obj(value)
    elif isinstance(value, FiniteProblem):
        obj = serialize.problem_to_obj(value)
    elif isinstance(value, IndexMap):
        obj = serialize.index_map_to_obj(value)
    else:
        raise SchemaError(f"cannot serialize payload entry {stem!r}")
    path = out_dir / f"{stem}.json"
    path.write_text(serialize.dumps_canonical(obj))
    return path.name


def cmd_catalog_emit(name: str, out: str, seed: int = 0) -> CommandResult:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    if name == "random_groupoid":
        g = catalog.random_groupoid(catalog.GeneratorParams(seed=seed))
        written.append(_emit_payload(g, f"random_groupoid_{seed}", out_dir))
        expected: dict[str, Any] = {"seed": seed}
    elif name == "random_pair":
        problem = catalog.random_embedding_pair(catalog.GeneratorParams(seed=seed))
        written.append(_emit_payload(problem, f"random_pair_{seed}", out_dir))
        expected = {"seed": seed}
    else:
        example = catalog.named_example(name)
        failures = catalog.verify_named(example)
        if failures:
            return CommandResult(
                1,
                f"bundle {name} failed to re-validate: {failures[0]}",
                {"failures": failures},
            )
        for key, value in sorted(example.payload.items()):
            written.append(_emit_payload(value, key, out_dir))
        expected = example.expected
        (out_dir / "expected.json").write_text(serialize.dumps_canonical(expected))
        written.append("expected.json")
    report = {"name": name, "files": written, "expected": expected}
    return CommandResult(0, f"wrote {', '.join(written)} to {out_dir}", report)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("text", "json"), default="text", help="summary format"
    )
    common.add_argument("--out", help="write the full JSON report to this path")

    parser = argparse.ArgumentParser(
        prog="csbgpd",
        description=(
            "Embedding checks, the Cantor-Schroeder-Bernstein construction "
            "with certificates, and chain decomposition for countable families."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "validate", parents=[common], help="validate a groupoid/functor/map file"
    )
    p.add_argument("path")

    p = sub.add_parser(
        "check", parents=[common], help="check a property of a functor or groupoid"
    )
    p.add_argument(
        "kind", choices=("embedding", "cancellable", "equivalence", "proposition")
    )
    p.add_argument("path")

    p = sub.add_parser(
        "csb", parents=[common], help="run the construction and certify the result"
    )
    p.add_argument("path")
    p.add_argument("--certificate", help="write the certificate JSON here")

    p = sub.add_parser(
        "chains", parents=[common], help="chain verdicts and the windowed map"
    )
    p.add_argument("path")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--dot", help="write a DOT rendering of the traced chains")
    p.add_argument(
        "--no-divergence-detection",
        action="store_true",
        help="disable the provable-divergence detector",
    )

    p = sub.add_parser(
        "bench", parents=[common], help="chain decomposition throughput per backend"
    )
    p.add_argument("sizes", nargs="*", type=int)
    p.add_argument("--repeats", type=int, default=3)

    p = sub.add_parser("catalog", help="named example bundles")
    catalog_sub = p.add_subparsers(dest="catalog_command", required=True)
    catalog_sub.add_parser("list", parents=[common], help="list available bundles")
    q = catalog_sub.add_parser("emit", help="write a bundle to a directory")
    q.add_argument("name")
    q.add_argument("--out", required=True, dest="emit_out")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def run(argv: list[str]) -> CommandResult:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            result = cmd_validate(args.path)
        elif args.command == "check":
            result = cmd_check(args.kind, args.path)
        elif args.command == "csb":
            result = cmd_csb(args.path, args.certificate)
        elif args.command == "chains":
            result = cmd_chains(
                args.path,
                args.window,
                args.budget,
                args.dot,
                not args.no_divergence_detection,
            )
        elif args.command == "bench":
            result = cmd_bench(args.sizes, args.repeats)
        elif args.command == "catalog":
            if args.catalog_command == "list":
                result = cmd_catalog_list()
            else:
                result = cmd_catalog_emit(args.name, args.emit_out, args.seed)
        else:  # pragma: no cover - argparse enforces the choices
            raise SchemaError(f"unknown command {args.command!r}")
    except HypothesisError as exc:
        result = CommandResult(2, f"hypothesis failure: {exc}", {"error": str(exc)})
    except CsbError as exc:
        result = CommandResult(2, f"invalid input: {exc}", {"error": str(exc)})
    report_out = getattr(args, "out", None)
    if report_out:
        Path(report_out).write_text(serialize.dumps_canonical(result.report))
        result.report_path = report_out
    if args.format == "json":
        payload = {
            "exit_code": result.exit_code,
            "summary": result.summary,
            "report": result.report,
        }
        print(serialize.dumps_canonical(payload), end="")
    else:
        print(result.summary)
    return result


def main() -> None:
    sys.exit(run(sys.argv[1:]).exit_code)


if __name__ == "__main__":
    main()
