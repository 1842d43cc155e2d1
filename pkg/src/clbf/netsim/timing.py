"""Segment-dictionary refresh timing and boundary-crossing error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..segments import DomainError

ARRIVAL_MODELS = ("uniform", "poisson")
# design regime: dictionary delays must be tiny next to the packet period
REGIME_RATIO = 100.0


@dataclass
class DictTimingConfig:
    tau_b: float  # broadcast period, seconds
    tau_t: float = 0.0  # transmission + propagation, seconds
    tau_d: float = 0.0  # decode/processing, seconds
    lambda_p: float = 1.0  # packets per second
    arrival_model: str = "uniform"
    trials: int = 1_000_000
    seed: int = 7

    def __post_init__(self):
        if self.tau_b <= 0 or self.lambda_p <= 0:
            raise DomainError("tau_b and lambda_p must be positive")
        if self.tau_t < 0 or self.tau_d < 0:
            raise DomainError("tau_t and tau_d must be non-negative")
        if self.arrival_model not in ARRIVAL_MODELS:
            raise DomainError(f"arrival_model must be one of {ARRIVAL_MODELS}")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")

    @property
    def tau_p(self) -> float:
        """Mean packet inter-arrival time."""
        return 1.0 / self.lambda_p


@dataclass
class PfailEstimate:
    p_fail: float
    sigma: float
    trials: int


def dict_pfail(cfg: DictTimingConfig) -> PfailEstimate:
    """Monte-Carlo ``Pr(tau_l + tau_t + tau_d > tau_a)``.

    ``tau_l`` (wait for the next dictionary broadcast) is uniform on
    ``[0, tau_b]``; ``tau_a`` (time to the next packet) is uniform on
    ``[0, tau_p]`` or exponential with rate ``lambda_p``.
    """
    rng = np.random.default_rng(cfg.seed)
    tau_l = rng.uniform(0.0, cfg.tau_b, cfg.trials)
    if cfg.arrival_model == "uniform":
        tau_a = rng.uniform(0.0, cfg.tau_p, cfg.trials)
    else:
        tau_a = rng.exponential(cfg.tau_p, cfg.trials)
    p = float(np.mean(tau_l + cfg.tau_t + cfg.tau_d > tau_a))
    return PfailEstimate(p, math.sqrt(p * (1 - p) / cfg.trials), cfg.trials)


def pfail_closed_form(cfg: DictTimingConfig) -> float:
    """Exact value of the quantity ``dict_pfail`` estimates."""
    c = cfg.tau_t + cfg.tau_d
    b = cfg.tau_b
    if cfg.arrival_model == "poisson":
        lam = cfg.lambda_p
        return 1.0 - math.exp(-lam * c) * (-math.expm1(-lam * b)) / (lam * b)
    # E[min(tau_l + c, tau_p)] / tau_p for tau_l ~ U(0, b)
    tp = cfg.tau_p
    lo, hi = c, c + b
    if hi <= tp:
        return (c + b / 2) / tp
    if lo >= tp:
        return 1.0
    below = ((tp**2 - lo**2) / 2) / b
    above = tp * (hi - tp) / b
    return (below + above) / tp


def in_design_regime(cfg: DictTimingConfig) -> bool:
    """Dictionary delays at most 1% of the mean packet period."""
    return cfg.tau_b + cfg.tau_t + cfg.tau_d <= cfg.tau_p / REGIME_RATIO


def boundary_crossing_rate(
    speed_mps: float,
    processing_s: float,
    segment_length_m: float,
    trials: int = 100_000,
    rng: np.random.Generator | None = None,
) -> float:
    """Fraction of embeddings whose node changes segment while processing.

    The node starts uniformly inside its segment and moves ``speed *
    processing`` meters toward the next one.  The exact value is
    ``min(1, speed * processing / segment_length)``.
    """
    if segment_length_m <= 0 or speed_mps < 0 or processing_s < 0:
        raise DomainError("need positive segment length and non-negative speed/time")
    rng = rng or np.random.default_rng(0)
    start = rng.uniform(0.0, segment_length_m, trials)
    return float(np.mean(start + speed_mps * processing_s >= segment_length_m))
