import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clbf.netsim.jammer import Topology, jammer_scenario, unreachable_segments
from clbf.netsim.timing import (
    DictTimingConfig,
    boundary_crossing_rate,
    dict_pfail,
    in_design_regime,
    pfail_closed_form,
)
from clbf.segments import DomainError


def test_pfail_uniform_closed_form_zero_delays():
    cfg = DictTimingConfig(tau_b=0.05, lambda_p=1, trials=400_000)
    est = dict_pfail(cfg)
    assert pfail_closed_form(cfg) == pytest.approx(0.025)
    assert abs(est.p_fail - 0.025) <= 3 * est.sigma


@given(
    st.floats(0.001, 0.2),
    st.floats(0, 0.01),
    st.floats(0, 0.01),
    st.sampled_from([5, 1, 0.2, 0.1]),
    st.sampled_from(["uniform", "poisson"]),
)
def test_pfail_matches_closed_form(tb, tt, td, lam, model):
    cfg = DictTimingConfig(tb, tt, td, lam, model, trials=50_000, seed=3)
    exact = pfail_closed_form(cfg)
    est = dict_pfail(cfg)
    sd = math.sqrt(max(exact * (1 - exact), 1e-12) / cfg.trials)
    assert abs(est.p_fail - exact) <= 4 * sd + 1e-9


def test_pfail_small_tau_b_floor():
    cfg = DictTimingConfig(1e-6, 0.003, 0.002, 1 / 15, "uniform", trials=10)
    assert pfail_closed_form(cfg) < 0.001


def test_regime_predicate():
    assert in_design_regime(DictTimingConfig(0.005, 0.003, 0.002, 1))
    assert not in_design_regime(DictTimingConfig(0.1, 0.003, 0.002, 1))


def test_timing_domain():
    with pytest.raises(DomainError):
        DictTimingConfig(0, 0, 0, 1)
    with pytest.raises(DomainError):
        DictTimingConfig(1, 0, 0, 1, "bursty")


def test_boundary_crossing_hook():
    rate = boundary_crossing_rate(27.8, 0.01, 100.0, trials=200_000)
    assert rate == pytest.approx(27.8 * 0.01 / 100, abs=0.001)
    assert boundary_crossing_rate(10, 20, 100) == 1.0


@pytest.fixture
def road():
    return Topology.spread(10, beta=1, n_nodes=24, seed=1)


def test_jammer_single_and_dual(road):
    assert jammer_scenario(road, 8).text == "beyond A7"
    assert jammer_scenario(road, 8, dual_rsu=True).text == "A8"
    assert jammer_scenario(road, None).text == "none"
    assert jammer_scenario(road, None, dual_rsu=True).text == "none"


@pytest.mark.parametrize("jam", range(2, 10))
def test_dual_localises_every_interior_segment(road, jam):
    assert jammer_scenario(road, jam, dual_rsu=True).segments == (jam,)
    assert jammer_scenario(road, jam).last_reachable == jam - 1


def test_wider_radio_bridges_jammer():
    topo = Topology.spread(10, beta=2, n_nodes=20, seed=0)
    assert unreachable_segments(topo, 8, 1) == {8}
    assert jammer_scenario(topo, 8, dual_rsu=True).text == "A8"


def test_jammer_rejections(road):
    with pytest.raises(DomainError):
        jammer_scenario(road, 1)
    with pytest.raises(DomainError):
        jammer_scenario(road, 10, dual_rsu=True)
    with pytest.raises(DomainError):
        Topology(4, 1, (1, 2, 4))
