"""Eigenvalue curves lambda_n(h) on a grid of cap sizes, written as CSV.

    python3 scripts/eigenvalue_curves.py --n-max 6 --out curves.csv
"""

import argparse
import sys

from cryo_transport.config import parse_h_grid
from cryo_transport.io import write_rows_csv
from cryo_transport.pipeline import SPECTRUM_COLUMNS, spectrum_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--h-grid", default="0:2:0.01")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    rows = spectrum_rows(args.n_max, parse_h_grid(args.h_grid))
    write_rows_csv(args.out or sys.stdout, SPECTRUM_COLUMNS, rows)


if __name__ == "__main__":
    main()
