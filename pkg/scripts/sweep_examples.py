"""Classify every built-in example for both sign conventions and print a summary table.

    python scripts/sweep_examples.py --gamma pi/4 --grid 2 --out reports/
"""

from __future__ import annotations

import argparse
from pathlib import Path

from spin7su3.lab import EXAMPLE_NAMES, ExampleSpec, parse_gamma, run_report


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--gamma", default="0")
    parser.add_argument("--grid", type=int, default=2)
    parser.add_argument("--out", type=Path, default=None, help="directory for JSON reports")
    args = parser.parse_args()
    gamma = parse_gamma(args.gamma)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    print(f"{'example':<18}{'sigma':>6}  {'label':<34}{'half-flat':>10}{'checks':>8}")
    for name in EXAMPLE_NAMES:
        for sigma in (1, -1):
            rep = run_report(ExampleSpec(name, sigma=sigma, gamma=gamma, grid=args.grid))
            agg = rep.aggregate
            label = "{" + ", ".join(agg["label"]) + "}"
            print(f"{name:<18}{sigma:>6}  {label:<34}{str(agg['half_flat']):>10}"
                  f"{'ok' if rep.ok else 'FAIL':>8}")
            if args.out is not None:
                (args.out / f"{name}_s{'+' if sigma > 0 else '-'}.json").write_text(rep.to_json())


if __name__ == "__main__":
    main()
