"""Write the four figure tables (and SVG plots when matplotlib is present)."""

import argparse
from pathlib import Path

from isac_crlb.cli import run_figure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/figures"))
    ap.add_argument("--plot", action="store_true", help="also render SVGs")
    args = ap.parse_args()
    fmt = "csv+plot" if args.plot else "csv"
    for fig in ("fig1", "fig2", "fig3", "fig4"):
        for path in run_figure(fig, args.out, seed=0, fmt=fmt):
            print(path)


if __name__ == "__main__":
    main()
