"""Command-line front end.

Exit codes: 0 success (compatible, all checks passed), 1 negative verdict or
failed check, 2 input error (bad matching text, odd point count, size guard).
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from app.core.config import APP_VERSION, settings
from app.core.convex import ConvexConfig
from app.core.errors import MatchLoomError
from app.core.logging_utils import setup_logging
from app.services.compat_service import WitnessKind, brute_force_oracle, exists_witness, find_obstruction
from app.services.construction_service import RotationSequence, caterpillar_path_between, tree_path_between
from app.services.dcg_service import analyze, build_dcg, quotient_by_rotation
from app.services.export_service import FORMATS, export_graph, export_report
from app.services.matching_service import classify_matching, enumerate_matchings, format_matching, parse_matching
from app.services.verify_service import SUITES, verify_suite

logger = logging.getLogger("matchloom.cli")

EXIT_OK = 0
EXIT_NO = 1
EXIT_INPUT = 2


def _points(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError(f"point count must be even and >= 2 (got {value})")
    return value


def _infer_points(m1: str, points: int | None) -> int:
    if points is not None:
        return points
    tokens = [t for t in m1.replace(" ", "").split(",") if t]
    return 2 * len(tokens)


def cmd_enumerate(args) -> int:
    for m in enumerate_matchings(ConvexConfig(args.points)):
        print(f"{m}\t{classify_matching(m).value}" if args.classify else str(m))
    return EXIT_OK


def cmd_compat(args) -> int:
    points = _infer_points(args.m1, args.points)
    m1, m2 = parse_matching(args.m1, points), parse_matching(args.m2, points)
    kind = WitnessKind.parse(args.family)
    witness = exists_witness(m1, m2, kind)
    print(f"compatible: {'yes' if witness else 'no'} ({kind.value})")
    if witness and args.witness:
        print(f"witness ({witness.kind.value}): {witness}")
    if witness is None:
        found = find_obstruction(m1, m2, kind)
        print(f"obstruction: {found.kind.value} ({found.detail})" if found else "obstruction: none found")
    if args.oracle:
        oracle = brute_force_oracle(m1, m2, kind)
        agrees = oracle == (witness is not None)
        print(f"oracle: {'yes' if oracle else 'no'} ({'agrees' if agrees else 'DISAGREES'})")
        if not agrees:
            logger.error("Decider and oracle disagree on %s | %s (%s)", m1, m2, kind.value)
    return EXIT_OK if witness else EXIT_NO


def _print_sequence(seq: RotationSequence) -> None:
    for i, step in enumerate(seq.steps, start=1):
        rotated = " + ".join("{" + ",".join(str(e) for e in sorted(sc.members)) + "}" for sc in step.semicycles)
        how = "searched" if step.searched else f"rotate {rotated}"
        print(f"step {i}: {format_matching(step.before)} -> {format_matching(step.after)}")
        print(f"  {how}; witness {step.witness.kind.value}: {step.witness}")
    print(f"length: {len(seq)}")


def cmd_route(args) -> int:
    points = _infer_points(args.m1, args.points)
    m1, m2 = parse_matching(args.m1, points), parse_matching(args.m2, points)
    kind = WitnessKind.parse(args.family)
    if kind is WitnessKind.TREE:
        seq = tree_path_between(m1, m2)
    elif kind in (WitnessKind.CATERPILLAR, WitnessKind.ONE_LEGGED):
        seq = caterpillar_path_between(m1, m2, one_legged=kind is WitnessKind.ONE_LEGGED)
    else:
        raise MatchLoomError("routes exist for tree, caterpillar and onelegged only")
    _print_sequence(seq)
    return EXIT_OK


def cmd_dcg(args) -> int:
    dcg = build_dcg(ConvexConfig(args.points), args.family, args.workers, args.unsafe_size)
    if args.out:
        export_graph(dcg, Path(args.out), args.format)
    report = analyze(dcg)
    if args.stats or not args.out:
        print(report.summary())
    if args.quotient:
        quotient = quotient_by_rotation(dcg)
        print(f"orbits={len(quotient.orbits)} automorphism={str(quotient.automorphism).lower()} "
              f"parity_swap={str(quotient.parity_swap_automorphism).lower()}")
        for orbit in quotient.orbits:
            print(f"  {orbit.representative}\tsize={orbit.size}\tdegree={orbit.degree}\t{orbit.matching}")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_suite(ConvexConfig(args.points), args.suite, args.workers, args.unsafe_size)
    payload = report.as_dict()
    target = Path(args.report) if args.report else Path(settings.config_root) / "exports" / f"verify-{args.suite}-{args.points}.json"
    export_report(payload, target)
    for check in report.checks:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: {check.detail}")
    print(f"suite {args.suite} on {args.points} points: {'pass' if report.passed else 'FAIL'} (report: {target})")
    return EXIT_OK if report.passed else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchloom", description="Disjoint compatibility of plane perfect matchings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    parser.add_argument("--workers", type=int, default=None, help="parallel workers (overrides MLOOM_WORKERS)")
    parser.add_argument("--unsafe-size", action="store_true", help="lift the configured point-count guards")
    parser.add_argument("--debug", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list every plane perfect matching")
    p.add_argument("points", type=_points)
    p.add_argument("--classify", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("compat", help="decide disjoint compatibility of two matchings")
    p.add_argument("--m1", required=True)
    p.add_argument("--m2", required=True)
    p.add_argument("--points", type=_points, default=None, help="defaults to twice the edge count of --m1")
    p.add_argument("--family", default="tree", choices=["tree", "caterpillar", "onelegged", "path"])
    p.add_argument("--witness", action="store_true", help="print the compatible drawing")
    p.add_argument("--oracle", action="store_true", help="cross-check with exhaustive enumeration")
    p.set_defaults(func=cmd_compat)

    p = sub.add_parser("route", help="print a compatible rotation sequence between two matchings")
    p.add_argument("--m1", required=True)
    p.add_argument("--m2", required=True)
    p.add_argument("--points", type=_points, default=None)
    p.add_argument("--family", default="tree", choices=["tree", "caterpillar", "onelegged"])
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("dcg", help="build and analyze a disjoint compatibility graph")
    p.add_argument("--points", type=_points, required=True)
    p.add_argument("--family", default="tree", choices=["tree", "caterpillar", "onelegged", "path"])
    p.add_argument("--out")
    p.add_argument("--format", default="json", choices=FORMATS)
    p.add_argument("--stats", action="store_true")
    p.add_argument("--quotient", action="store_true", help="orbits under rotation by two positions")
    p.set_defaults(func=cmd_dcg)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, help=", ".join(SUITES))
    p.add_argument("--points", type=_points, required=True)
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(Path(settings.config_root), debug_enabled=args.debug or settings.debug_logging)
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except MatchLoomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
