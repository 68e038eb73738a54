"""Exception hierarchy for laborflow."""

from __future__ import annotations


class LaborFlowError(Exception):
    """Base class for all model errors."""


# --- network construction ---

class DimensionMismatchError(LaborFlowError):
    """Array shapes or label counts disagree."""


class IsolatedOccupationError(LaborFlowError):
    """A transition-count row has no positive off-diagonal entry."""

    def __init__(self, indices, labels=None):
        self.indices = list(indices)
        self.labels = list(labels) if labels is not None else None
        shown = self.labels if self.labels is not None else self.indices
        super().__init__(f"isolated occupations (no off-diagonal transitions): {shown}")


class UnmappedOccupationError(LaborFlowError):
    """Occupations left without any mapped score."""

    def __init__(self, labels):
        self.labels = list(labels)
        super().__init__(f"occupations with no mapped score: {self.labels}")


class ScoreOutOfRangeError(LaborFlowError):
    """A score falls outside [0, 1]."""


# --- scenarios ---

class AllAutomatedError(LaborFlowError):
    """Post-shock demand undefined: every remaining work-hour is automated away."""


class NonPositiveSteepnessError(LaborFlowError):
    """Sigmoid steepness must be > 0."""


class AmplitudeOutOfRangeError(LaborFlowError):
    """Sine amplitude must lie in [0, 1)."""


class DuplicateCodeError(LaborFlowError):
    """Occupation codes for assortative reassignment must be unique."""


# --- engines ---

class HorizonExceedsPathError(LaborFlowError):
    """Requested more steps than the demand path defines."""


class NegativeStateComponentError(LaborFlowError):
    """A mean-field update drove a state component significantly below zero."""


class NoConvergenceError(LaborFlowError):
    """Fixed-point iteration hit the iteration cap."""

    def __init__(self, max_iter, residual):
        self.max_iter = max_iter
        self.residual = residual
        super().__init__(
            f"no steady state after {max_iter} iterations (last residual {residual:.3e})"
        )


# --- metrics ---

class EmptySeriesError(LaborFlowError):
    """Series has no time steps."""


class EmptyWindowError(LaborFlowError):
    """Averaging window contains no steps."""


class ZeroDenominatorAtStepError(LaborFlowError):
    """u + e vanished at a step inside the averaging window."""

    def __init__(self, step):
        self.step = step
        super().__init__(f"u + e is zero at step {step}")


class TooFewPointsError(LaborFlowError):
    """Curve geometry needs at least three points."""


class DegenerateCurveError(LaborFlowError):
    """Closed curve encloses no area at the chosen resolution."""


# --- calibration ---

class RInfeasibleError(LaborFlowError):
    """Self-loop weight implied by the mobility rate lies outside [0, 1]."""


class AllCellsDegenerateError(LaborFlowError):
    """Every grid cell produced a degenerate Beveridge curve."""


# --- configuration / CLI ---

class ConfigError(LaborFlowError):
    """Invalid or incomplete run configuration."""
