"""Command-line entry point: ``spin7su3 {classify,verify,example-list}``.

Exit codes: 0 when every residual is within tolerance, 1 on a numerical
failure or a failed check, 2 on invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from ..subman import FDConfig
from .examples import DESCRIPTIONS, EXAMPLE_NAMES, ExampleSpec
from .report import PointFailure, ReportConfig, parse_gamma, run_report
from .verify import SUITES, run_verify


def _gamma_arg(text: str) -> float:
    try:
        return parse_gamma(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _sigma_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value not in (1, -1):
        raise argparse.ArgumentTypeError("sigma must be 1 or -1")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spin7su3",
        description="Induced SU(3)-structures on 6-submanifolds of Spin(7) manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", type=Path, metavar="PATH", help="also write the JSON output here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--h", type=_positive_float, default=None,
                        help="finite-difference step for exterior derivatives")

    cls = sub.add_parser("classify", parents=[common], help="torsion report over an example grid")
    cls.add_argument("--example", choices=EXAMPLE_NAMES, required=True)
    cls.add_argument("--sigma", type=_sigma_arg, default=1)
    cls.add_argument("--gamma", type=_gamma_arg, default=0.0,
                     help='phase: a number or a multiple of pi such as "pi/4", "-3pi/4"')
    cls.add_argument("--grid", type=_positive_int, default=3)
    cls.add_argument("--tol", type=_positive_float, default=None,
                     help="class-detection threshold (default scale-aware 1e-6)")
    cls.add_argument("--no-fd", action="store_true", help="skip finite-difference cross-checks")

    ver = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    ver.add_argument("--tol", type=_positive_float, default=1e-9,
                     help="tolerance for the algebraic suites")
    ver.add_argument("--suite", action="append", choices=list(SUITES),
                     help="restrict to the named suite (repeatable)")

    sub.add_parser("example-list", parents=[common], help="list the built-in examples")
    return parser


def _fd_config(h: float | None) -> FDConfig:
    return FDConfig() if h is None else FDConfig(h=h)


def _emit(payload: dict, path: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if path is not None:
        path.write_text(text + "\n")


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--gamma -3pi/4`` into ``--gamma=-3pi/4`` so argparse does not see an option."""
    out, items = [], list(argv)
    i = 0
    while i < len(items):
        if items[i] == "--gamma" and i + 1 < len(items) and items[i + 1].startswith("-"):
            out.append(f"--gamma={items[i + 1]}")
            i += 2
            continue
        out.append(items[i])
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_attach_negative_values(sys.argv[1:] if argv is None else argv))
    try:
        if args.command == "example-list":
            _emit({"examples": [{"name": n, "description": DESCRIPTIONS[n]} for n in EXAMPLE_NAMES]},
                  args.json)
            return 0
        if args.command == "classify":
            spec = ExampleSpec(args.example, sigma=args.sigma, gamma=args.gamma, grid=args.grid,
                               seed=args.seed)
            cfg = ReportConfig(fd=_fd_config(args.h), tol=args.tol, fd_cross_check=not args.no_fd)
            report = run_report(spec, cfg)
            _emit(report.as_dict(), args.json)
            return 0 if report.ok else 1
        results = run_verify(args.tol, args.seed, args.suite, _fd_config(args.h))
        passed = all(r.passed for r in results)
        _emit({"passed": passed, "suites": [r.as_dict() for r in results]}, args.json)
        return 0 if passed else 1
    except PointFailure as err:
        _emit({"error": "numerical failure", "u": err.u, "detail": str(err)}, args.json)
        return 1
    except (ValueError, ArithmeticError) as err:
        _emit({"error": "numerical failure", "detail": f"{type(err).__name__}: {err}"}, args.json)
        return 1


if __name__ == "__main__":
    sys.exit(main())
