"""Command-line entry point: ``clbf <subcommand> [flags]``.

Each subcommand writes one CSV (``# config:`` comment line, then a header
row, one row per sweep point) and prints its headline numbers.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import analysis
from .core import bloom_size_for_rate, optimal_k1
from .segments import DomainError, privacy_bits
from .netsim.jammer import Topology, jammer_scenario
from .netsim.sim import (
    DEFAULT_SEED,
    ScenarioConfig,
    gps_baseline,
    simulate_compressed_flow,
    simulate_fp_curve,
)
from .netsim.timing import DictTimingConfig, dict_pfail, in_design_regime, pfail_closed_form

SUBCOMMANDS = (
    "optimize-k2",
    "fp-curve",
    "sweep-m2",
    "sweep-delta",
    "baseline",
    "compress-bench",
    "pfail",
    "jammer",
    "privacy",
)


class InfeasibleError(Exception):
    """Parameters parse but violate a domain invariant."""


# --------------------------------------------------------------------------
# argument types


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(Fraction(text))


def parse_sweep(text: str) -> list:
    """``lo:hi:step`` (inclusive), ``a,b,c`` or a single value.

    Integers stay integers; anything else becomes float.  Fractions such as
    ``1/5`` are accepted.
    """
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi, step = (_number(p) for p in parts)
            if step <= 0 or hi < lo:
                raise ValueError
            n = math.floor((hi - lo) / step + 1e-9) + 1
            if all(isinstance(v, int) for v in (lo, hi, step)):
                return [lo + i * step for i in range(n)]
            return [round(lo + i * step, 12) for i in range(n)]
        return [_number(p) for p in text.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, a,b,c or a number, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


# --------------------------------------------------------------------------
# output


@dataclass
class ExperimentSpec:
    subcommand: str
    params: dict
    sweep_var: str | None = None
    sweep_values: list = field(default_factory=list)
    out: str | None = None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(spec: ExperimentSpec, header: list[str], rows: list[list]) -> None:
    if spec.out is None:
        return
    items = dict(spec.params)
    if spec.sweep_var:
        items[spec.sweep_var] = ",".join(_fmt(v) for v in spec.sweep_values)
    config = " ".join(f"{k}={_fmt(v)}" for k, v in items.items())
    with open(spec.out, "w", newline="") as fh:
        fh.write(f"# config: subcommand={spec.subcommand} {config}\r\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _single(name: str, values: list):
    if len(values) != 1:
        raise InfeasibleError(f"--{name} takes a single value here; exactly one variable may be swept")
    return values[0]


# --------------------------------------------------------------------------
# subcommands


def cmd_optimize_k2(a) -> None:
    L = a.L or a.h
    res = analysis.optimize_k2(a.m2, L, a.beta, a.r, method=a.method)
    spec = ExperimentSpec("optimize-k2", dict(m2=a.m2, h=a.h, L=L, r=a.r, beta=a.beta, method=a.method), out=a.out)
    write_csv(spec, ["k2", "expected_fp"], [[k, v] for k, v in res.curve])
    print(f"k2*={res.k2} expected_fp={res.value:.6g}")


def _scenario(a, **over) -> ScenarioConfig:
    kw = dict(
        N=a.N or a.h + 1,
        h=a.h,
        r=a.r,
        beta=a.beta,
        m1=a.m1,
        m2=a.m2 if isinstance(a.m2, int) else 100,
        k2=1,
        trials=a.trials,
        master_seed=a.seed,
        mode=a.mode,
    )
    kw.update(over)
    return ScenarioConfig(**kw)


def cmd_fp_curve(a) -> None:
    ks = a.k2 if a.k2 else list(range(1, a.m2 + 1))
    if any(not isinstance(k, int) for k in ks):
        raise InfeasibleError("k2 values must be integers")
    cfg = _scenario(a)
    table = analysis.build_c_table(cfg.L, a.beta, a.r)
    curve = dict(analysis.fp_curve(a.m2, table, max(ks)))
    reps = simulate_fp_curve(cfg, ks)
    rows = []
    for rep in reps:
        lo, hi = rep.ci
        rows.append([rep.k2, curve[rep.k2], rep.fp_rate, rep.sigma, lo, hi, rep.avg_sparsity])
    spec = ExperimentSpec(
        "fp-curve",
        dict(m2=a.m2, h=a.h, r=a.r, beta=a.beta, trials=a.trials, seed=a.seed, mode=a.mode),
        "k2",
        ks,
        a.out,
    )
    write_csv(spec, ["k2", "analytic_fp", "sim_fp", "sim_sigma", "ci_low", "ci_high", "avg_sparsity"], rows)
    best_a = min(ks, key=lambda k: (curve[k], k))
    best_s = min(reps, key=lambda r: (r.fp_rate, r.k2))
    print(f"analytic k2*={best_a} expected_fp={curve[best_a]:.6g}")
    print(f"simulated k2*={best_s.k2} fp_rate={best_s.fp_rate:.6g} +/- {best_s.ci_half_width:.2g}")


def cmd_sweep_m2(a) -> None:
    rows = []
    table = analysis.build_c_table(a.L or a.h, a.beta, a.r)
    for m2 in a.m2:
        if not isinstance(m2, int) or m2 < 1:
            raise InfeasibleError("m2 values must be positive integers")
        opt = analysis.optimize_k2(m2, table.L, a.beta, a.r, table)
        rep = simulate_fp_curve(_scenario(a, m2=m2, k2=opt.k2), [opt.k2])[0]
        lo, hi = rep.ci
        rows.append([m2, opt.k2, opt.value, rep.fp_rate, rep.sigma, lo, hi])
        print(f"m2={m2} k2*={opt.k2} expected_fp={opt.value:.6g} fp_rate={rep.fp_rate:.6g} +/- {rep.ci_half_width:.2g}")
    spec = ExperimentSpec(
        "sweep-m2", dict(h=a.h, r=a.r, beta=a.beta, trials=a.trials, seed=a.seed, mode=a.mode), "m2", a.m2, a.out
    )
    write_csv(spec, ["m2", "k2_opt", "expected_fp", "sim_fp", "sim_sigma", "ci_low", "ci_high"], rows)


def cmd_sweep_delta(a) -> None:
    rows = []
    for r in a.r:
        if not isinstance(r, int) or r < 1:
            raise InfeasibleError("r values must be positive integers")
        table = analysis.build_c_table(a.L or a.h, a.beta, r)
        opt = analysis.optimize_k2(a.m2, table.L, a.beta, r, table)
        rep = simulate_fp_curve(_scenario(a, r=r, k2=opt.k2), [opt.k2])[0]
        need = analysis.required_m2(a.target, table.L, a.beta, r, table=table)
        rows.append([r, opt.k2, opt.value, rep.fp_rate, rep.sigma, need])
        print(f"r={r} k2*={opt.k2} expected_fp={opt.value:.6g} fp_rate={rep.fp_rate:.6g} required_m2={need}")
    spec = ExperimentSpec(
        "sweep-delta",
        dict(m2=a.m2, h=a.h, beta=a.beta, target=a.target, trials=a.trials, seed=a.seed, mode=a.mode),
        "r",
        a.r,
        a.out,
    )
    write_csv(spec, ["r", "k2_opt", "expected_fp", "sim_fp", "sim_sigma", "required_m2"], rows)


def clbf_sizing(h: int, r: int, beta: int, target: float) -> dict:
    """Filter sizes meeting ``target`` on both filters for an ``h``-hop path."""
    m1 = bloom_size_for_rate(h, target)
    k1 = optimal_k1(m1, h)
    table = analysis.build_c_table(h, beta, r)
    m2 = analysis.required_m2(target, h, beta, r, table=table)
    k2 = analysis.optimize_k2(m2, h, beta, r, table).k2
    return dict(m1=m1, k1=k1, m2=m2, k2=k2, bits=m1 + m2, delay_units=h * (k1 + k2 + 1))


def cmd_baseline(a) -> None:
    rows = []
    for h in a.h:
        if not isinstance(h, int) or h < 1:
            raise InfeasibleError("h values must be positive integers")
        gps = gps_baseline(h, a.payload)
        s = clbf_sizing(h, a.r, a.beta, a.target)
        rows.append(
            [h, gps.avg_provenance_bits, s["m1"], s["k1"], s["m2"], s["k2"], s["bits"],
             gps.end_to_end_delay_units, s["delay_units"]]
        )
        print(f"h={h} gps_bits={gps.avg_provenance_bits:g} clbf_bits={s['bits']}")
    spec = ExperimentSpec(
        "baseline", dict(r=a.r, beta=a.beta, target=a.target, payload=a.payload), "h", a.h, a.out
    )
    write_csv(
        spec,
        ["h", "gps_avg_bits", "clbf_m1", "clbf_k1", "clbf_m2", "clbf_k2", "clbf_bits",
         "gps_delay_units", "clbf_delay_units"],
        rows,
    )


def cmd_compress_bench(a) -> None:
    codec = None if a.codec == "none" else a.codec
    rows = []
    for m in a.m2:
        if not isinstance(m, int) or m < 1:
            raise InfeasibleError("m2 values must be positive integers")
        cfg = ScenarioConfig(
            N=a.h + 1, h=a.h, r=a.r, beta=1, m2=m, k2=a.k2, trials=a.trials, master_seed=a.seed
        )
        rep = simulate_compressed_flow(cfg, codec)
        if rep.extra["aborted"]:
            print(f"warning: {len(rep.extra['aborted'])} trials aborted: {rep.extra['aborted'][0][1]}", file=sys.stderr)
        rows.append([m, 100 * rep.avg_sparsity, rep.avg_provenance_bits, rep.end_to_end_delay_units])
        print(f"m2={m} sparsity={100 * rep.avg_sparsity:.2f}% compressed_bits={rep.avg_provenance_bits:.2f}")
    spec = ExperimentSpec(
        "compress-bench", dict(h=a.h, r=a.r, k2=a.k2, trials=a.trials, seed=a.seed, codec=a.codec), "m2", a.m2, a.out
    )
    write_csv(spec, ["m2", "avg_sparsity_pct", "avg_compressed_bits", "avg_cost_units"], rows)


def cmd_pfail(a) -> None:
    lam = _single("lambda", a.lam)
    rows = []
    worst = 0.0
    for tb in a.tau_b:
        cfg = DictTimingConfig(
            tau_b=tb / 1000, tau_t=a.tau_t / 1000, tau_d=a.tau_d / 1000, lambda_p=lam,
            arrival_model=a.model, trials=a.trials, seed=a.seed,
        )
        est = dict_pfail(cfg)
        regime = in_design_regime(cfg)
        if regime:
            worst = max(worst, est.p_fail)
        rows.append([tb, est.p_fail, est.sigma, pfail_closed_form(cfg), regime])
    spec = ExperimentSpec(
        "pfail",
        dict(lambda_p=lam, tau_t_ms=a.tau_t, tau_d_ms=a.tau_d, model=a.model, trials=a.trials, seed=a.seed),
        "tau_b_ms",
        a.tau_b,
        a.out,
    )
    write_csv(spec, ["tau_b_ms", "p_fail", "sigma", "closed_form", "in_regime"], rows)
    print(f"max P_fail={max(r[1] for r in rows):.6g} max in-regime P_fail={worst:.6g}")


def cmd_jammer(a) -> None:
    topo = Topology.spread(a.r, a.beta, a.nodes, a.seed)
    verdict = jammer_scenario(topo, a.jam, a.dual)
    spec = ExperimentSpec(
        "jammer", dict(r=a.r, beta=a.beta, nodes=a.nodes, seed=a.seed, dual=a.dual), out=a.out
    )
    write_csv(spec, ["jammed_segment", "mode", "verdict"], [[a.jam or 0, "dual" if a.dual else "single", verdict.text]])
    print(verdict.text)


def cmd_privacy(a) -> None:
    rows = []
    for M in a.M:
        if not isinstance(M, int):
            raise InfeasibleError("M values must be integers")
        p = privacy_bits(M, a.r, a.beta, a.hop_gap)
        rows.append([M, p.rsu_resolved, p.rsu_residual, p.eavesdropper])
        print(f"M={M} rsu_bits={p.rsu_resolved:.4g} residual_bits={p.rsu_residual:.4g} eavesdropper_bits={p.eavesdropper:.4g}")
    spec = ExperimentSpec("privacy", dict(r=a.r, beta=a.beta, hop_gap=a.hop_gap or "adjacent"), "M", a.M, a.out)
    write_csv(spec, ["M", "rsu_resolved_bits", "rsu_residual_bits", "eavesdropper_bits"], rows)


# --------------------------------------------------------------------------
# parser


def _add_sim_flags(p, trials: int = 100_000) -> None:
    p.add_argument("--trials", type=_positive_int, default=trials, help="Monte-Carlo trials per point")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="master seed")
    p.add_argument("--mode", choices=("fast", "protocol"), default="fast", help="simulation fidelity")
    p.add_argument("--N", type=_positive_int, default=0, help="node count (default h+1)")
    p.add_argument("--m1", type=_positive_int, default=256, help="edge filter bits (protocol mode)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clbf", description="CLBF spatial-provenance experiments.")
    sub = parser.add_subparsers(dest="cmd", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("optimize-k2", help="analytic scan of k2 for one filter size")
    p.add_argument("--m2", type=_positive_int, required=True, help="segment filter bits")
    p.add_argument("--h", type=_positive_int, required=True, help="hop count")
    p.add_argument("--r", type=_positive_int, default=15, help="number of segments")
    p.add_argument("--beta", type=_positive_int, default=2, help="radio range in segments")
    p.add_argument("--L", type=_positive_int, default=0, help="embedding nodes (default h)")
    p.add_argument("--method", choices=("scan", "descent"), default="scan")
    p.add_argument("--out", default="optimize-k2.csv", help="CSV output path")
    p.set_defaults(func=cmd_optimize_k2)

    p = sub.add_parser("fp-curve", help="analytic and simulated FP rate over k2")
    p.add_argument("--m2", type=_positive_int, required=True, help="segment filter bits")
    p.add_argument("--h", type=_positive_int, required=True, help="hop count")
    p.add_argument("--r", type=_positive_int, default=15, help="number of segments")
    p.add_argument("--beta", type=_positive_int, default=2, help="radio range in segments")
    p.add_argument("--k2", type=parse_sweep, default=None, help="k2 sweep lo:hi:step (default 1:m2:1)")
    _add_sim_flags(p)
    p.add_argument("--out", default="fp-curve.csv", help="CSV output path")
    p.set_defaults(func=cmd_fp_curve, L=0)

    p = sub.add_parser("sweep-m2", help="optimal k2 and FP rate over filter sizes")
    p.add_argument("--m2", type=parse_sweep, required=True, help="m2 sweep lo:hi:step")
    p.add_argument("--h", type=_positive_int, default=5, help="hop count")
    p.add_argument("--r", type=_positive_int, default=15, help="number of segments")
    p.add_argument("--beta", type=_positive_int, default=2, help="radio range in segments")
    _add_sim_flags(p)
    p.add_argument("--out", default="sweep-m2.csv", help="CSV output path")
    p.set_defaults(func=cmd_sweep_m2, L=0)

    p = sub.add_parser("sweep-delta", help="FP rate and required m2 over segment counts")
    p.add_argument("--r", type=parse_sweep, required=True, help="segment-count sweep lo:hi:step")
    p.add_argument("--m2", type=_positive_int, default=100, help="segment filter bits")
    p.add_argument("--h", type=_positive_int, default=5, help="hop count")
    p.add_argument("--beta", type=_positive_int, default=2, help="radio range in segments")
    p.add_argument("--target", type=float, default=1e-4, help="FP target for the required m2")
    _add_sim_flags(p)
    p.add_argument("--out", default="sweep-delta.csv", help="CSV output path")
    p.set_defaults(func=cmd_sweep_delta, L=0)

    p = sub.add_parser("baseline", help="CLBF size versus the per-hop encrypted-blob baseline")
    p.add_argument("--h", type=parse_sweep, required=True, help="hop-count sweep lo:hi:step")
    p.add_argument("--r", type=_positive_int, default=10, help="number of segments")
    p.add_argument("--beta", type=_positive_int, default=1, help="radio range in segments")
    p.add_argument("--target", type=float, default=1e-4, help="FP target for both filters")
    p.add_argument("--payload", type=int, default=0, help="payload bytes")
    p.add_argument("--out", default="baseline.csv", help="CSV output path")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("compress-bench", help="per-hop compressed forwarding of the segment filter")
    p.add_argument("--m2", type=parse_sweep, default=[100, 125, 150], help="filter sizes (default 100,125,150)")
    p.add_argument("--h", type=_positive_int, default=5, help="hop count")
    p.add_argument("--r", type=_positive_int, default=10, help="number of segments")
    p.add_argument("--k2", type=_positive_int, default=8, help="hashes per segment embedding")
    p.add_argument("--codec", choices=("auto", "rake", "zero-run", "raw", "none"), default="auto")
    p.add_argument("--trials", type=_positive_int, default=10_000, help="packets per point")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="master seed")
    p.add_argument("--out", default="compress-bench.csv", help="CSV output path")
    p.set_defaults(func=cmd_compress_bench)

    p = sub.add_parser("pfail", help="dictionary-timing failure probability over tau_b")
    p.add_argument("--tau-b", type=parse_sweep, required=True, help="broadcast period sweep in ms")
    p.add_argument("--lambda", dest="lam", type=parse_sweep, default=[1], help="packet rate per second (e.g. 1/5)")
    p.add_argument("--tau-t", type=float, default=3.0, help="transmission + propagation delay in ms")
    p.add_argument("--tau-d", type=float, default=2.0, help="dictionary processing delay in ms")
    p.add_argument("--model", choices=("uniform", "poisson"), default="uniform", help="packet arrival model")
    p.add_argument("--trials", type=_positive_int, default=1_000_000, help="samples per point")
    p.add_argument("--seed", type=_seed, default=7, help="sampling seed")
    p.add_argument("--out", default="pfail.csv", help="CSV output path")
    p.set_defaults(func=cmd_pfail)

    p = sub.add_parser("jammer", help="segment-level jammer localisation drill")
    p.add_argument("--r", type=_positive_int, default=10, help="number of segments")
    p.add_argument("--jam", type=_positive_int, default=None, help="jammed segment (omit for none)")
    p.add_argument("--dual", action="store_true", help="second RSU at the far end")
    p.add_argument("--beta", type=_positive_int, default=1, help="radio range in segments")
    p.add_argument("--nodes", type=_positive_int, default=23, help="vehicles on the road")
    p.add_argument("--seed", type=_seed, default=0, help="placement seed")
    p.add_argument("--out", default="jammer.csv", help="CSV output path")
    p.set_defaults(func=cmd_jammer)

    p = sub.add_parser("privacy", help="location uncertainty left to the RSU and observers")
    p.add_argument("--M", type=parse_sweep, required=True, help="fine-grained cell count (sweepable)")
    p.add_argument("--r", type=_positive_int, default=10, help="number of segments")
    p.add_argument("--beta", type=_positive_int, default=1, help="radio range in segments")
    p.add_argument("--hop-gap", type=_positive_int, default=None, help="observer hops from the vehicle")
    p.add_argument("--out", default="privacy.csv", help="CSV output path")
    p.set_defaults(func=cmd_privacy)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (DomainError, InfeasibleError, analysis.TableTooLargeError) as exc:
        print(f"clbf {args.cmd}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
