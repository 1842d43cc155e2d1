"""Average sparsity and compressed size for 100, 125 and 150 bit segment filters."""

import argparse

from _common import out_path, read_rows
from clbf.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--trials", type=int, default=10_000)
ap.add_argument("--codec", default="auto")
args = ap.parse_args()

out = out_path("compression_table.csv")
main(["compress-bench", "--m2", "100,125,150", "--h", "5", "--k2", "8", "--codec", args.codec,
      "--trials", str(args.trials), "--out", out])
print(f"{'m2':>5} {'sparsity %':>11} {'bits':>8}")
for row in read_rows(out):
    print(f"{row['m2']:>5} {float(row['avg_sparsity_pct']):>11.2f} {float(row['avg_compressed_bits']):>8.2f}")
