"""Morlet RMSE against xi at sigma=60 for the direct, multiplication and truncated methods."""

import argparse
import sys

from sftkit.evaluation import MORLET_XIS, morlet_rmse_sweep, write_reports_csv

CONFIGS = [
    ("direct", 5, 0), ("direct", 6, 0), ("direct", 7, 0), ("direct", 9, 0),
    ("direct", 7, 5),
    ("multiply", 2, 0), ("multiply", 3, 0), ("multiply", 4, 0),
    ("multiply", 3, 5),
    ("truncated", 0, 0),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma", type=float, default=60.0)
    ap.add_argument("-o", "--output", default=None)
    args = ap.parse_args()
    reports = []
    for method, P, n0 in CONFIGS:
        reports += morlet_rmse_sweep(args.sigma, MORLET_XIS, method, P, n0)
        print(f"done {method} P={P} n0={n0}", file=sys.stderr)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    write_reports_csv(reports, out)


if __name__ == "__main__":
    main()
