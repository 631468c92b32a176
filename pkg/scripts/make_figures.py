#!/usr/bin/env python3
"""Regenerate the two canned correlational-decoherence comparisons.

Writes, per preset, the curve CSV, the report JSON and a gnuplot script;
render the plots with e.g. `gnuplot -p results/figures/fig1.gp`.
"""

import argparse
from pathlib import Path

from qdeph.cli import run_figure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/figures")
    args = ap.parse_args()
    outdir = Path(args.outdir)
    for preset in ("fig1", "fig2"):
        report, paths = run_figure(preset, outdir)
        print(f"{preset}: a_init = {report.a_init_value:.6f}  "
              f"l2_zn = {report.l2_zn:.4e}  "
              f"l2_renorm = {report.l2_renorm:.4e}  "
              f"winner = {report.winner}")
        for p in paths:
            print(f"  wrote {p}")


if __name__ == "__main__":
    main()
