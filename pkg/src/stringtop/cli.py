"""Command-line driver: stringtop run | catalog | verify-chains | explain."""
from __future__ import annotations

import argparse
import sys

from . import __version__, catalog
from .chain_verifier import ChainError
from .exact_linalg import LinalgError, get_ring
from .graded_algebra import AlgebraError
from .jobspec import ParseError, ValidationError, parse_jobspec
from .report import render
from .runner import run_job
from .spectral_engine import EngineError
from .string_products import AssociativityFailure, EquivalenceViolation

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_ENGINE, EXIT_VERIFY = 0, 2, 3, 4, 5
ENGINE_ERRORS = (EngineError, AlgebraError, ChainError, LinalgError, AssociativityFailure,
                 EquivalenceViolation)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stringtop", description=__doc__)
    ap.add_argument("--version", action="version", version=f"stringtop {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", help="coefficient ring: Z, Q or Z/p (overrides the job)")
    common.add_argument("--max-degree", type=int, help="truncation degree (overrides the job)")
    common.add_argument("--format", choices=("text", "csv"), help="report format")
    common.add_argument("--figures", metavar="DIR", help="write one PNG chart per page into DIR")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run a job file")
    p.add_argument("file")
    p = sub.add_parser("verify-chains", parents=[common], help="run a chain-verify job file")
    p.add_argument("file")
    p = sub.add_parser("catalog", help="list the shipped models")
    p.add_argument("--max-degree", type=int, default=12)
    p.add_argument("--ring", default="Z")
    p = sub.add_parser("explain", help="describe one catalog model")
    p.add_argument("label")
    p.add_argument("--max-degree", type=int, default=12)
    p.add_argument("--ring", default="Z")
    return ap


def _err(msg: str, code: int) -> int:
    print(f"stringtop: error: {msg}", file=sys.stderr)
    return code


def _run(args, chains_only: bool) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        return _err(str(exc), EXIT_VALIDATION)
    try:
        job = parse_jobspec(text)
        if chains_only and job.kind != "chain-verify":
            raise ValidationError(f"verify-chains needs a chain-verify job, got kind {job.kind}")
        if args.ring:
            try:
                get_ring(args.ring)
            except ValueError as exc:
                raise ValidationError(str(exc)) from None
        rep = run_job(job, args.ring, args.max_degree)
    except ParseError as exc:
        return _err(f"{args.file}: {exc}", EXIT_PARSE)
    except ValidationError as exc:
        return _err(f"{args.file}: {exc}", EXIT_VALIDATION)
    except ENGINE_ERRORS as exc:
        return _err(f"{type(exc).__name__}: {exc}", EXIT_ENGINE)
    out = render(rep, args.format or job.job.get("format", "text"))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if args.figures:
        from .figures import write_page_charts

        for path in write_page_charts(rep.figures, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def _catalog(args) -> int:
    try:
        ring = get_ring(args.ring)
    except ValueError as exc:
        return _err(str(exc), EXIT_VALIDATION)
    for e in catalog.catalog_list(args.max_degree, ring):
        m = e.model
        gens = ", ".join(f"{m.pontryagin.basis[g].label}[{m.pontryagin.basis[g].degree}]"
                         for g in m.pontryagin.generators)
        print(f"{e.label:6}  dim {m.dim:2}  loop generators: {gens or '-'}  ({e.note})")
    print("parameterized: S<n> for any n >= 2, S<a>xS<b>")
    return EXIT_OK


def _explain(args) -> int:
    try:
        ring = get_ring(args.ring)
        lines = catalog.describe(args.label, args.max_degree, ring)
    except (ValueError, catalog.UnknownModel) as exc:
        return _err(f"unknown model or ring: {exc}", EXIT_VALIDATION)
    print("\n".join(lines))
    for e in catalog.catalog_list(args.max_degree, ring):
        if e.label == args.label:
            print(f"  note: {e.note}")
            for pin in e.default_pins:
                print(f"  default pin: d{pin.r} {pin.source} -> {pin.target}")
    if args.label in catalog.FIBRATIONS:
        base, fiber = catalog.FIBRATIONS[args.label]
        print(f"  fibration: {fiber} -> {args.label} -> {base}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command in ("run", "verify-chains"):
        return _run(args, args.command == "verify-chains")
    if args.command == "catalog":
        return _catalog(args)
    return _explain(args)


if __name__ == "__main__":
    sys.exit(main())
