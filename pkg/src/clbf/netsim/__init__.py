"""Monte-Carlo harness: scenarios, timing, and the jammer drill."""

from .jammer import Topology, jammer_scenario
from .sampling import SequenceSampler, draw_spatial_map
from .sim import ScenarioConfig, SimReport, gps_baseline, simulate_compressed_flow, simulate_fp_curve, simulate_fp_rate
from .timing import DictTimingConfig, dict_pfail, pfail_closed_form

__all__ = [
    "DictTimingConfig",
    "ScenarioConfig",
    "SequenceSampler",
    "SimReport",
    "Topology",
    "dict_pfail",
    "draw_spatial_map",
    "gps_baseline",
    "jammer_scenario",
    "pfail_closed_form",
    "simulate_compressed_flow",
    "simulate_fp_curve",
    "simulate_fp_rate",
]
