"""Provenance bits against hop count, CLBF versus per-hop encrypted coordinates."""

import argparse

from _common import out_path, plot
from clbf.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--h", default="1:10:1")
ap.add_argument("--plot", action="store_true")
args = ap.parse_args()

out = out_path("size_vs_baseline.csv")
main(["baseline", "--h", args.h, "--r", "10", "--beta", "1", "--target", "1e-4", "--out", out])
if args.plot:
    plot(out, "h", ["gps_avg_bits", "clbf_bits"], "hops", "provenance bits")
    plot(out, "h", ["gps_delay_units", "clbf_delay_units"], "hops", "processing units", name="delay_vs_baseline.png")
