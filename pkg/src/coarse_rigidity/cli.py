"""Command line entry point: ``coarse-rigidity {generate,run,verify,diff}``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .scenarios import (
    EXIT_CHECK,
    EXIT_IO,
    EXIT_OK,
    ScenarioError,
    canonical,
    generate,
    load_scenario,
    report_diff,
    run,
)
from .serialization import dumps, load_json

log = logging.getLogger("coarse_rigidity")


def _out_for(base: str | None, sc, many: bool) -> Path | None:
    if base is None:
        return None
    return Path(base) / sc.name if many else Path(base)


def _load_all(args):
    scs = []
    for path in args.scenario:
        sc = load_scenario(path)
        if args.seed is not None:
            sc = sc.with_seed(args.seed)
        scs.append(sc)
    return scs


def cmd_generate(args) -> int:
    scs = _load_all(args)
    if args.out is None:
        raise ScenarioError("generate needs --out")
    for sc in scs:
        for p in generate(sc, _out_for(args.out, sc, len(scs) > 1)):
            print(p)
    return EXIT_OK


def _run_one(sc, out, strict):
    report, code = run(sc, out, strict=strict)
    return sc, report, code


def cmd_run(args) -> int:
    scs = _load_all(args)
    many = len(scs) > 1
    with ThreadPoolExecutor(max_workers=min(len(scs), 8)) as pool:
        results = list(pool.map(lambda s: _run_one(s, _out_for(args.out, s, many), args.strict), scs))
    worst = EXIT_OK
    for sc, report, code in results:
        stage = report.get("failed_stage") or report.get("error")
        failed = [k for k, c in report["checks"].items() if not c["passed"]]
        line = f"{sc.name}: exit {code}"
        if stage:
            line += f" (stage: {stage})"
        if failed:
            line += f" (failed checks: {', '.join(failed)})"
        print(line)
        if args.out is None and not many:
            sys.stdout.write(dumps(report))
        worst = max(worst, code)
    return worst


def cmd_verify(args) -> int:
    """Re-run a scenario and compare with a stored report."""
    if len(args.scenario) != 1:
        raise ScenarioError("verify takes exactly one --scenario")
    sc = _load_all(args)[0]
    stored = load_json(args.report)
    report, _ = run(sc, strict=args.strict)
    diffs = report_diff(stored, report)
    if diffs:
        sys.stdout.write(dumps(diffs))
        return EXIT_CHECK
    print(f"{sc.name}: report reproduced")
    return EXIT_OK


def cmd_diff(args) -> int:
    a, b = load_json(args.a), load_json(args.b)
    diffs = report_diff(a, b)
    sys.stdout.write(dumps(diffs))
    return EXIT_OK if not diffs else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coarse-rigidity", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, out=True):
        sp.add_argument("--scenario", action="append", required=True, metavar="PATH")
        sp.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        sp.add_argument("--strict", action="store_true", help="treat an inconclusive verdict as failure")
        if out:
            sp.add_argument("--out", default=None, metavar="DIR")

    common(sub.add_parser("generate", help="write deterministic inputs"))
    common(sub.add_parser("run", help="run the pipeline and configured checks"))
    v = sub.add_parser("verify", help="re-run and compare against a stored report")
    common(v, out=False)
    v.add_argument("--report", required=True, metavar="PATH")
    d = sub.add_parser("diff", help="field-level diff of two reports (timing ignored)")
    d.add_argument("a")
    d.add_argument("b")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    handlers = {"generate": cmd_generate, "run": cmd_run, "verify": cmd_verify, "diff": cmd_diff}
    try:
        return handlers[args.verb](args)
    except (ScenarioError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


__all__ = ["main", "build_parser", "canonical"]
