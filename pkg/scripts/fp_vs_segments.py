"""FP rate and the m2 needed for a target rate as the segment count grows."""

import argparse

from _common import out_path, plot
from clbf.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--trials", type=int, default=100_000)
ap.add_argument("--r", default="5:30:5")
ap.add_argument("--target", default="1e-4")
ap.add_argument("--plot", action="store_true")
args = ap.parse_args()

out = out_path("fp_vs_segments.csv")
main(["sweep-delta", "--r", args.r, "--m2", "100", "--h", "5", "--beta", "2", "--target", args.target,
      "--trials", str(args.trials), "--out", out])
if args.plot:
    plot(out, "r", ["expected_fp", "sim_fp"], "segments", "false-positive rate")
    plot(out, "r", ["required_m2"], "segments", "required m2 (bits)", name="required_m2_vs_segments.png")
