#!/usr/bin/env python3
"""Deterministic runner-up switch scenario: scan table plus summary JSON."""

import argparse
import pathlib
import sys

from polyloc.cli import main as cli_main


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--outdir", default="results/switch_scenario")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    code = cli_main(
        [
            "scenario",
            "--alpha", str(args.alpha),
            "--n", str(args.n),
            "--epsilon", str(args.epsilon),
            "--scan-out", str(outdir / "scan.csv"),
            "--out", str(outdir / "summary.json"),
        ]
    )
    if code == 0:
        print(f"wrote scan table and summary to {outdir}")
    sys.exit(code)


if __name__ == "__main__":
    main()
