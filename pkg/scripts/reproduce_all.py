#!/usr/bin/env python3
"""Regenerate the data for every figure into one output directory.

Usage: python3 scripts/reproduce_all.py [--out-dir out] [--trials 1000] [--seed 0]
"""
import argparse
import time

from ofdm_pa.harness import FIGURES, default_out_dir, reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=None)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("figures", nargs="*", default=list(FIGURES))
    args = ap.parse_args()
    out = args.out_dir or default_out_dir()
    for fig in args.figures:
        t0 = time.perf_counter()
        paths = reproduce(fig, out, trials=args.trials, base_seed=args.seed, fmt=args.format)
        print(f"{fig}: {len(paths)} files in {time.perf_counter() - t0:.2f} s -> {paths[-1]}")


if __name__ == "__main__":
    main()
