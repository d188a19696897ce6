#!/usr/bin/env python3
"""Endpoint limit-law study: records, w/N histogram, and KS summary.

Thin wrapper over the CLI so the outputs are exactly the documented file
formats the figure renderer consumes.
"""

import argparse
import pathlib
import sys

from polyloc.cli import main as cli_main


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=777)
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--outdir", default="results/endpoint_law")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    code = cli_main(
        [
            "simulate",
            "--alpha", str(args.alpha),
            "--d", "1",
            "--N", str(args.N),
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--threads", str(args.threads),
            "--canonical",
            "--out", str(outdir / "records.jsonl"),
            "--histogram-out", str(outdir / "endpoint_histogram.csv"),
            "--summary-out", str(outdir / "summary.json"),
        ]
    )
    if code == 0:
        print(f"wrote records, histogram, and summary to {outdir}")
    sys.exit(code)


if __name__ == "__main__":
    main()
