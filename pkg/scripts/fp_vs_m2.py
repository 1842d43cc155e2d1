"""FP rate at the optimal k2 as the segment filter grows."""

import argparse

from _common import out_path, plot
from clbf.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--trials", type=int, default=100_000)
ap.add_argument("--m2", default="25:250:25")
ap.add_argument("--plot", action="store_true")
args = ap.parse_args()

out = out_path("fp_vs_m2.csv")
main(["sweep-m2", "--m2", args.m2, "--h", "5", "--r", "15", "--beta", "2", "--trials", str(args.trials), "--out", out])
if args.plot:
    plot(out, "m2", ["expected_fp", "sim_fp"], "m2 (bits)", "false-positive rate", logy=True)
