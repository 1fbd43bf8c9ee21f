"""Transfer-function figure data for several alpha values.

Runs the ``transfer`` subcommand for each alpha (one CSV/SVG pair per ray
angle plus the vertical scan) and prints the vertical-line diagnostics.

    python scripts/reproduce_figures.py --alpha 1.2 1.5 1.8
"""

import argparse
import json
from pathlib import Path

from degwave.cli import main as cli_main


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, nargs="+", default=[1.2, 1.5, 1.8])
    ap.add_argument("--out", type=Path, default=Path("results/figures"))
    args = ap.parse_args(argv)

    for alpha in args.alpha:
        out = args.out / f"alpha{alpha:g}"
        code = cli_main(["transfer", "--alpha", repr(alpha), "--out", str(out)])
        summary = json.loads((out / "transfer_summary.json").read_text())
        print(f"alpha={alpha:g} (exit {code}) -> {out}")
        print("  vertical:", json.dumps(summary["vertical"]))
        print("  cutoff family:", json.dumps(summary["cutoff_family"]))


if __name__ == "__main__":
    main()
