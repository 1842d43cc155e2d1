"""Jammer in segment 8 of 10: single-RSU versus dual-RSU localisation."""

import argparse

from clbf.netsim.jammer import Topology, jammer_scenario

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--jam", type=int, default=8)
ap.add_argument("--seeds", type=int, default=20)
args = ap.parse_args()

single, dual = set(), set()
for seed in range(args.seeds):
    topo = Topology.spread(10, beta=1, n_nodes=24, seed=seed)
    single.add(jammer_scenario(topo, args.jam).text)
    dual.add(jammer_scenario(topo, args.jam, dual_rsu=True).text)
print(f"single RSU: {sorted(single)}")
print(f"dual RSU:   {sorted(dual)}")
