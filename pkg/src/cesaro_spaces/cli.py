"""Command-line front end: norm, cesaro, envelope, classify, witness, verify.

Exit codes: 0 success (all checks PASS or SKIP), 1 some check FAILed,
2 usage or input error. Results go to stdout as JSON, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from . import norms, ops, verify
from .classify import GradeKind, SpaceSpec, cesaro_class, membership
from .sequences import SequenceError, sequence_from_json, sequence_to_json, truncate
from .witness import build_witness, list_claims


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit itself; route through exit code 2
        raise UsageError(f"{self.prog}: {message}")


def _count(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _emit(doc: Any) -> None:
    sys.stdout.write(json.dumps(verify.jsonable(doc), indent=2, allow_nan=False) + "\n")


def _schedule(grade) -> list[float]:
    if grade.kind is GradeKind.PLUS:
        return verify.plus_schedule(grade.p)
    return verify.minus_schedule(grade.p)


def cmd_norm(args: argparse.Namespace) -> int:
    seq = sequence_from_json(args.seq)
    spec = SpaceSpec.parse(args.space)
    scale = spec.scale.value
    if spec.grade.kind is GradeKind.EXACT:
        _emit(norms.norm(seq, scale, spec.grade.p, args.N).to_json())
        return 0
    rows = []
    for p in _schedule(spec.grade):
        rows.append({"p": p, **norms.norm(seq, scale, p, args.N).to_json()})
    _emit({"space": str(spec), "schedule": rows})
    return 0


def cmd_cesaro(args: argparse.Namespace) -> int:
    seq = sequence_from_json(args.seq)
    view = ops.cesaro_iterate(truncate(seq, args.N), args.iterate)
    _emit({"iterate": args.iterate, **view.to_json()})
    return 0


def cmd_envelope(args: argparse.Namespace) -> int:
    seq = sequence_from_json(args.seq)
    sup = ops.tail_sup(seq, args.N)
    if sup == float("inf"):
        raise ops.UnsupportedError("the sequence is unbounded: its envelope is identically +inf")
    view = ops.envelope(truncate(seq, args.N), sup)
    _emit({"tail_sup": sup, **view.to_json()})
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    seq = sequence_from_json(args.seq)
    verdict = membership(seq, SpaceSpec.parse(args.space))
    out = verdict.to_json()
    out["sequence"] = sequence_to_json(seq)
    out["cesaro_class"] = cesaro_class(seq).to_json()
    _emit(out)
    return 0


def cmd_witness(args: argparse.Namespace) -> int:
    if args.list:
        _emit([c.to_json() for c in list_claims()])
        return 0
    if not args.claim:
        raise UsageError("witness: --claim is required (or use --list)")
    _emit(build_witness(args.claim, args.p, args.q).to_json())
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = verify.budget(args.budget, args.seed, args.timings)
    ids = [args.check] if args.check else None
    if args.check and args.check not in verify.CHECKS:
        raise UsageError(f"verify: unknown check {args.check!r}; expected one of {', '.join(verify.CHECKS)}")
    results = verify.run_all(cfg, ids)
    report = verify.render_report(results, args.format, cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return 1 if any(r.status == "FAIL" for r in results) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cesaro-spaces", description="Norms, Cesàro means and membership in l_p, ces(p), d(p).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norm", help="certified norm enclosure")
    p.add_argument("--seq", required=True, help='sequence JSON, e.g. {"family":"basis","n":4}')
    p.add_argument("--space", required=True, help='space such as "d:2", "ces:2+" or "ell:3-"')
    p.add_argument("--N", type=_count, default=1_000_000, help="truncation level (default 1e6)")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("cesaro", help="first N Cesàro means")
    p.add_argument("--seq", required=True)
    p.add_argument("--N", type=_count, required=True)
    p.add_argument("--iterate", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=cmd_cesaro)

    p = sub.add_parser("envelope", help="first N terms of the decreasing envelope")
    p.add_argument("--seq", required=True)
    p.add_argument("--N", type=_count, required=True)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("classify", help="membership verdict")
    p.add_argument("--seq", required=True)
    p.add_argument("--space", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("witness", help="build a catalog witness")
    p.add_argument("--claim")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--list", action="store_true", help="list claim ids")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="run the check suite")
    p.add_argument("--check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", choices=("small", "full"), default="small")
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--out")
    p.add_argument("--timings", action="store_true", help="record runtime_ms (makes output run-dependent)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (SequenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
