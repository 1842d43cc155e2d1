"""Dictionary-timing failure probability over the broadcast period, for several packet rates."""

import argparse

from _common import out_path, plot
from clbf.cli import main

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--trials", type=int, default=1_000_000)
ap.add_argument("--model", choices=("uniform", "poisson"), default="uniform")
ap.add_argument("--plot", action="store_true")
args = ap.parse_args()

for lam in ("5", "1", "1/5", "1/10", "1/15"):
    tag = lam.replace("/", "over")
    out = out_path(f"pfail_{args.model}_lambda_{tag}.csv")
    main(["pfail", "--tau-b", "1:100:3", "--lambda", lam, "--model", args.model,
          "--trials", str(args.trials), "--out", out])
    if args.plot:
        plot(out, "tau_b_ms", ["p_fail", "closed_form"], "tau_b (ms)", "P_fail")
