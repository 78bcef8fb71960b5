"""``ncwb`` command line: run demos, check model files, solve assignment problems.

Exit codes: 0 pass, 1 check failed, 2 usage, parse or schema error.
"""
from __future__ import annotations

import argparse
import os
import sys

from .demos import DEMOS, DemoOptions, check_files, run_demo, solve_assignment
from .errors import NcwbError
from .report import dumps


def _common(p):
    p.add_argument("--tol", type=float, help="verification tolerance (also read from NCWB_TOL)")
    p.add_argument("--json", metavar="PATH", help="write the machine-readable report here")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized instances")
    p.add_argument("--drop-zero-effects", action="store_true",
                   help="drop zero effects when reducing joint measurements")
    p.add_argument("-q", "--quiet", action="store_true", help="print only the verdict line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncwb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    demo = sub.add_parser("demo", help="run a named demonstration")
    demo.add_argument("name", help=f"one of: {', '.join(DEMOS)}, or 'all'")
    _common(demo)
    check = sub.add_parser("check", help="check a model against a theory (JSON files)")
    check.add_argument("--theory", required=True)
    check.add_argument("--model", required=True)
    _common(check)
    solve = sub.add_parser("solve", help="enumerate assignments for a JSON problem")
    solve.add_argument("--problem", required=True)
    solve.add_argument("--mode", choices=["d", "s", "deterministic", "spectral"],
                       help="override the problem's mode")
    _common(solve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None:
        os.environ["NCWB_TOL"] = repr(args.tol)
    try:
        opts = DemoOptions(tol=args.tol, seed=args.seed, drop_zero=args.drop_zero_effects)
        if args.command == "demo":
            names = list(DEMOS) if args.name == "all" else [args.name]
            reports = [run_demo(n, opts) for n in names]
        elif args.command == "check":
            reports = [check_files(args.theory, args.model, opts)]
        else:
            reports = [solve_assignment(args.problem, opts, args.mode)]
    except NcwbError as exc:
        print(f"ncwb: error: {exc}", file=sys.stderr)
        return 2
    for r in reports:
        print(f"{r.name}: {r.verdict}" if args.quiet else r.summary())
    if args.json:
        payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
        with open(args.json, "w") as fh:
            fh.write(dumps(payload) + "\n")
    return max(r.exit_code for r in reports)


if __name__ == "__main__":
    sys.exit(main())
