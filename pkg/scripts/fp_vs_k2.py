"""FP rate against k2 for m2=100, h=5, 15 segments: analytic bound and simulation."""

import argparse

from _common import out_path, plot
from clbf.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--trials", type=int, default=100_000)
ap.add_argument("--plot", action="store_true")
args = ap.parse_args()

out = out_path("fp_vs_k2.csv")
main(["fp-curve", "--m2", "100", "--h", "5", "--r", "15", "--beta", "2", "--k2", "1:40:1",
      "--trials", str(args.trials), "--out", out])
if args.plot:
    plot(out, "k2", ["analytic_fp", "sim_fp"], "k2", "false-positive rate")
