"""Fitted minimal constant of each theorem as a function of s.

    python scripts/constant_sweep.py [--s -0.02 -0.05 ...] [--out sweep.csv]

Each s gets its own isotropic Cauchy-type law (beta = 1/|s|) paired with the
standard Gaussian; rows are (s, slot, c_min). Plot-ready CSV.
"""

from __future__ import annotations

import argparse
import csv
import sys

from convexmetrics.harness import config_from_dict, fitted_constants, run_suite

CHECKS = ["thm_tv_from_bl", "thm_w1_from_bl", "thm_wq_from_wp:1,2", "thm_kl_from_tv"]


def sweep(values, seed=0):
    out = []
    for s in values:
        doc = {
            "seed": seed,
            "sweeps": [{"prefix": "c", "family": "cauchy-type", "n": 1, "s": [s]}],
            "specs": {"g": {"family": "std-gaussian", "params": {"n": 1}}},
            "pairs": [{"mu": [f"c(s={s:g})"], "nu": ["g"], "checks": CHECKS}],
        }
        fits = fitted_constants(run_suite(config_from_dict(doc).with_overrides(constants={})))
        out.extend((s, slot, c) for slot, c in sorted(fits.items()))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, nargs="+", default=[-0.02, -0.05, -0.1, -0.15, -0.2, -0.24])
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["s", "slot", "c_min"])
    for s, slot, c in sweep(args.s):
        w.writerow([f"{s:g}", slot, f"{c:.6g}"])
    if args.out:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
