"""Model parameters shared by both simulation engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

WEEKS_PER_YEAR = 52.0

# Weeks of joblessness after which a worker counts as long-term unemployed
# (the BLS threshold).
LONG_TERM_WEEKS = 27.0


def long_term_threshold_steps(dt_weeks: float) -> int:
    """Smallest number of steps whose duration covers the long-term cutoff."""
    return max(1, math.ceil(LONG_TERM_WEEKS / dt_weeks - 1e-12))


@dataclass(frozen=True)
class ModelParams:
    """Per-step probabilities and bookkeeping constants.

    delta_u / delta_v are the spontaneous (state-independent) separation and
    vacancy-opening probabilities per employed worker per step.  gamma_u /
    gamma_v set how fast realized demand adjusts toward the target when they
    disagree.  tau_steps is the long-term unemployment threshold in steps;
    when omitted it is derived from dt_weeks.
    """

    delta_u: float
    delta_v: float
    gamma_u: float
    gamma_v: float
    dt_weeks: float = 6.75
    labor_force: int = 1_000_000
    tau_steps: int = field(default=0)

    def __post_init__(self):
        for name in ("delta_u", "delta_v", "gamma_u", "gamma_v"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.dt_weeks <= 0:
            raise ValueError("dt_weeks must be positive")
        if self.labor_force < 1:
            raise ValueError("labor_force must be at least 1")
        if self.tau_steps == 0:
            object.__setattr__(self, "tau_steps", long_term_threshold_steps(self.dt_weeks))
        if self.tau_steps < 1:
            raise ValueError("tau_steps must be at least 1")

    @property
    def steps_per_year(self) -> float:
        return WEEKS_PER_YEAR / self.dt_weeks

    @classmethod
    def calibrated(cls, labor_force: int = 1_000_000, **overrides) -> "ModelParams":
        """The shipped default profile fitted to the 2008-2018 US Beveridge curve."""
        base = dict(
            delta_u=0.016,
            delta_v=0.012,
            gamma_u=0.16,
            gamma_v=0.16,
            dt_weeks=6.75,
            labor_force=labor_force,
        )
        base.update(overrides)
        return cls(**base)


# Self-loop weight of the shipped default profile: probability that a worker
# changing jobs applies within her current occupation.
DEFAULT_SELF_LOOP = 0.55
