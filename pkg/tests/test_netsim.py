import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clbf import analysis
from clbf.netsim.sampling import SequenceSampler, draw_spatial_map
from clbf.netsim.sim import (
    ScenarioConfig,
    count_assignments,
    gps_baseline,
    simulate_compressed_flow,
    simulate_fp_curve,
    simulate_fp_rate,
    wilson_interval,
)
from clbf.recovery import surviving_segments
from clbf.segments import DomainError, count_valid_sequences, enumerate_valid_sequences, validate_sequence


def test_sampler_uniform_chi_square():
    seqs = enumerate_valid_sequences(2, 1, 3)
    rng = np.random.default_rng(0)
    draws = SequenceSampler(2, 1, 3).draw(100_000, rng)
    counts = Counter(map(tuple, draws.tolist()))
    assert set(counts) == set(seqs)
    expect = 100_000 / len(seqs)
    chi2 = sum((counts[s] - expect) ** 2 / expect for s in seqs)
    # 99% quantile, 4 degrees of freedom
    assert chi2 < 13.28


def test_sampler_single_node():
    rng = np.random.default_rng(1)
    draws = SequenceSampler(1, 1, 5).draw(20_000, rng)[:, 0]
    assert set(draws.tolist()) == {1, 2}
    assert abs(np.mean(draws == 1) - 0.5) < 0.02


@given(st.integers(1, 8), st.integers(1, 4), st.integers(1, 12), st.integers(0, 2**32))
def test_draws_are_valid(L, beta, r, seed):
    beta = min(beta, r)
    s = draw_spatial_map(L, beta, r, np.random.default_rng(seed))
    assert len(s) == L and validate_sequence(s, beta, r)


def test_sampler_total_matches_count():
    for L, beta, r in [(3, 2, 4), (5, 2, 15), (4, 1, 3)]:
        assert SequenceSampler(L, beta, r).total == count_valid_sequences(L, beta, r)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**32))
def test_count_assignments_matches_pruning(L, beta, r, seed):
    beta = min(beta, r)
    rng = np.random.default_rng(seed)
    mask = rng.random((20, L, r)) < 0.5
    got = count_assignments(mask, beta)
    for row, n in zip(mask, got):
        sets = [set(np.flatnonzero(row[t]) + 1) for t in range(L)]
        assert n == min(2, surviving_segments(sets, beta, r)[1])


def test_config_domain_checks():
    with pytest.raises(DomainError):
        ScenarioConfig(N=5, h=5)
    with pytest.raises(DomainError):
        ScenarioConfig(k2=0)
    with pytest.raises(DomainError):
        ScenarioConfig(placement="fixed", fixed_map=(1, 2))
    with pytest.raises(DomainError):
        ScenarioConfig(mode="protocol", L=6)
    cfg = ScenarioConfig(m1=100, h=5)
    assert cfg.k1 == 14 and cfg.L == 5


def test_config_text_roundtrip(tmp_path):
    cfg = ScenarioConfig(h=3, N=4, r=6, placement="fixed", fixed_map=(2, 3, 3), trials=10)
    path = tmp_path / "s.cfg"
    path.write_text("# scenario\n" + cfg.to_text())
    assert ScenarioConfig.from_file(path) == cfg
    with pytest.raises(DomainError):
        ScenarioConfig.from_text("nodes=3\n")
    with pytest.raises(DomainError):
        ScenarioConfig.from_text("h=three\n")


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0.03 < hi < 0.04
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


def test_deterministic_reports():
    cfg = ScenarioConfig(trials=3000, m2=40, k2=5)
    a = simulate_fp_rate(cfg)
    b = simulate_fp_rate(cfg)
    assert a == b
    c = simulate_fp_rate(cfg.replace(master_seed=cfg.master_seed + 1))
    assert c.seeds != a.seeds


def test_fast_sim_matches_analysis():
    cfg = ScenarioConfig(N=4, h=3, r=5, beta=1, m2=30, k2=1, trials=20_000)
    table = analysis.build_c_table(3, 1, 5)
    curve = dict(analysis.fp_curve(30, table, 8))
    for rep in simulate_fp_curve(cfg, [2, 4, 6]):
        # the bound sits at or below the truth; allow Monte-Carlo noise
        assert curve[rep.k2] <= rep.fp_rate + 3 * rep.sigma


def test_oversized_filter_rarely_fails():
    table = analysis.build_c_table(3, 1, 5)
    k2 = analysis.optimize_k2(512, 3, 1, 5, table).k2
    rep = simulate_fp_rate(ScenarioConfig(N=4, h=3, r=5, beta=1, m2=512, k2=k2, trials=10_000))
    assert rep.fp_rate < 1e-3


def test_saturated_filter_fails():
    # every bit lit makes every alternative pass; each sequence here has one
    cfg = ScenarioConfig(N=6, h=5, r=5, beta=2, m2=10, k2=10, trials=4000)
    full = analysis.pr_alpha(10, 10, 10, 5)
    assert full > 0.9
    assert min(analysis.build_c_table(5, 2, 5).c1) > 0
    rep = simulate_fp_rate(cfg)
    assert rep.fp_rate >= full - 3 * rep.sigma


def test_fixed_placement():
    cfg = ScenarioConfig(N=4, h=3, r=5, beta=1, placement="fixed", fixed_map=(1, 1, 1), m2=30, k2=3, trials=2000)
    rep = simulate_fp_rate(cfg)
    assert 0 <= rep.fp_rate <= 1


def test_fast_and_protocol_agree():
    base = dict(N=4, h=3, r=5, beta=1, m1=512, m2=24, k2=3, trials=4000)
    fast = simulate_fp_rate(ScenarioConfig(**base))
    proto = simulate_fp_rate(ScenarioConfig(**base, mode="protocol"))
    assert proto.extra["soundness_failures"] == 0
    se = math.sqrt(fast.sigma**2 + proto.sigma**2)
    assert abs(fast.fp_rate - proto.fp_rate) < 4 * se
    assert proto.end_to_end_delay_units == fast.end_to_end_delay_units


def test_ci_width_shrinks_with_trials():
    cfg = ScenarioConfig(N=4, h=3, r=5, beta=1, m2=24, k2=3, trials=1000)
    small = simulate_fp_rate(cfg).ci_half_width
    large = simulate_fp_rate(cfg.replace(trials=16_000)).ci_half_width
    assert large == pytest.approx(small / 4, rel=0.35)


def test_gps_baseline_examples():
    assert gps_baseline(4).avg_provenance_bits == 8 * 40
    assert gps_baseline(1).avg_provenance_bits == 8 * 16
    assert gps_baseline(3, payload_bytes=10).avg_packet_bits == 8 * (32 + 10)
    with pytest.raises(DomainError):
        gps_baseline(0)


def test_compressed_flow_sizes():
    cfg = ScenarioConfig(N=6, h=5, r=10, beta=1, m2=100, k2=8, trials=2000)
    rep = simulate_compressed_flow(cfg, "auto")
    assert rep.avg_sparsity == pytest.approx(0.2092, abs=0.01)
    assert rep.avg_provenance_bits == pytest.approx(76.92, rel=0.15)
    assert rep.extra["aborted"] == []
    plain = simulate_compressed_flow(cfg, None)
    assert plain.avg_provenance_bits == 100
    assert plain.avg_sparsity == pytest.approx(rep.avg_sparsity, abs=0.01)


def test_analytic_sparsity_of_flow():
    m, k2, h = 150, 8, 5
    expect = np.mean([1 - (1 - 1 / m) ** (k2 * t) for t in range(1, h + 1)])
    rep = simulate_compressed_flow(ScenarioConfig(N=6, h=h, r=10, beta=1, m2=m, k2=k2, trials=3000), "rake")
    assert rep.avg_sparsity == pytest.approx(expect, abs=0.005)
