"""Target-labor-demand paths: constant, sigmoid automation shocks, sine cycles.

A DemandPath maps a step index to the vector of target demands d(i, t).
Paths are evaluators rather than precomputed tables, so horizons extend
freely; ``materialize`` turns one into a table for export.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    AllAutomatedError,
    AmplitudeOutOfRangeError,
    DimensionMismatchError,
    DuplicateCodeError,
    NonPositiveSteepnessError,
)
from .network import ScoreVector


@dataclass(frozen=True)
class ShockSpec:
    """Timing and scale of a sigmoid reallocation shock.

    steepness_per_year is converted to a per-step rate via steps_per_year;
    aggregate_scale multiplies the post-shock total demand (1.0 keeps the
    aggregate fixed).
    """

    start_step: float
    midpoint_step: float
    steepness_per_year: float
    steps_per_year: float
    aggregate_scale: float = 1.0
    scores: ScoreVector | None = None

    def __post_init__(self):
        if self.steepness_per_year <= 0:
            raise NonPositiveSteepnessError(f"steepness {self.steepness_per_year} must be > 0")
        if self.midpoint_step <= self.start_step:
            raise ValueError("midpoint_step must come after start_step")
        if self.steps_per_year <= 0:
            raise ValueError("steps_per_year must be positive")
        if self.aggregate_scale <= 0:
            raise ValueError("aggregate_scale must be positive")

    @property
    def steepness_per_step(self) -> float:
        return self.steepness_per_year / self.steps_per_year


class DemandPath:
    """Base evaluator; subclasses fill in _values(t)."""

    n: int
    horizon: int | None = None  # None = defined for every t >= 0
    meta: dict

    def at(self, t: int | float) -> np.ndarray:
        if t < 0:
            raise ValueError("demand paths start at t = 0")
        if self.horizon is not None and t > self.horizon:
            raise IndexError(f"t={t} beyond path horizon {self.horizon}")
        return self._values(t)

    def _values(self, t) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantPath(DemandPath):
    d0: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "d0", _demand_vector(self.d0))
        self.meta.setdefault("scenario", "constant")

    @property
    def n(self):
        return self.d0.size

    def _values(self, t):
        return self.d0


@dataclass(frozen=True)
class SigmoidShockPath(DemandPath):
    """Holds d0 until the shock starts, then follows a logistic ramp to d_post.

    For t >= start the value is d_post + (d0 - d_post) / (1 + exp(k (t - t0)))
    with k the per-step steepness: it leaves d0 (to within exp(-k (t0 - ts)))
    and converges to d_post.
    """

    d0: np.ndarray
    d_post: np.ndarray
    spec: ShockSpec
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d0 = _demand_vector(self.d0)
        d_post = _demand_vector(self.d_post)
        if d0.shape != d_post.shape:
            raise DimensionMismatchError("d0 and d_post must have the same length")
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "d_post", d_post)
        self.meta.setdefault("scenario", "sigmoid")

    @property
    def n(self):
        return self.d0.size

    def _values(self, t):
        if t < self.spec.start_step:
            return self.d0
        z = self.spec.steepness_per_step * (t - self.spec.midpoint_step)
        weight = 1.0 / (1.0 + np.exp(min(z, 700.0)))
        return self.d_post + (self.d0 - self.d_post) * weight


@dataclass(frozen=True)
class SinePath(DemandPath):
    """Business cycle: every occupation scales pro rata with a sine wave.

    ``phase_steps`` shifts where in the cycle t = 0 falls; the default 0
    starts at the baseline on the way up.
    """

    d0: np.ndarray
    amplitude: float
    period_steps: float
    phase_steps: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "d0", _demand_vector(self.d0))
        if not 0.0 <= self.amplitude < 1.0:
            raise AmplitudeOutOfRangeError(f"amplitude {self.amplitude} outside [0, 1)")
        if self.period_steps <= 0:
            raise ValueError("period must be positive")
        self.meta.setdefault("scenario", "sine")

    @property
    def n(self):
        return self.d0.size

    def _values(self, t):
        angle = 2.0 * np.pi * (t + self.phase_steps) / self.period_steps
        return self.d0 * (1.0 + self.amplitude * np.sin(angle))


@dataclass(frozen=True)
class TablePath(DemandPath):
    """Materialized demand table; row t is the demand vector at step t."""

    table: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=np.float64)
        if table.ndim != 2:
            raise DimensionMismatchError("table must be 2-D (steps x occupations)")
        if np.any(table < 0):
            raise ValueError("target demand must be non-negative")
        object.__setattr__(self, "table", table.copy())
        self.table.setflags(write=False)
        self.meta.setdefault("scenario", "table")

    @property
    def n(self):
        return self.table.shape[1]

    @property
    def horizon(self):
        return self.table.shape[0] - 1

    def _values(self, t):
        return self.table[int(t)]


def _demand_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1:
        raise DimensionMismatchError("demand must be a flat vector")
    if np.any(arr < 0):
        raise ValueError("target demand must be non-negative")
    arr.setflags(write=False)
    return arr


# --- operations ------------------------------------------------------------

def post_shock_demand(e0: np.ndarray, scores: ScoreVector, labor_force: float) -> np.ndarray:
    """Reallocate demand after automation removes a share of each occupation's hours.

    Each occupation keeps e0_i (1 - p_i) of its hours; the shorter work week
    spreads the remaining hours over the whole labor force, so
    d_i = e0_i (1 - p_i) L / sum_j e0_j (1 - p_j) and the total is exactly L.
    """
    e0 = np.asarray(e0, dtype=np.float64)
    p = scores.values
    if e0.shape != p.shape:
        raise DimensionMismatchError("employment and scores must align")
    kept = e0 * (1.0 - p)
    total = kept.sum()
    if total <= 0:
        raise AllAutomatedError("no work-hours left after automation")
    return kept * (labor_force / total)


def sigmoid_path(d0, d_post, spec: ShockSpec) -> SigmoidShockPath:
    return SigmoidShockPath(d0=d0, d_post=d_post, spec=spec)


def automation_shock_path(
    e0, scores: ScoreVector, labor_force: float, spec: ShockSpec
) -> SigmoidShockPath:
    """Sigmoid path from the pre-shock demand to the automation-reallocated one."""
    d_post = post_shock_demand(e0, scores, labor_force) * spec.aggregate_scale
    return SigmoidShockPath(d0=e0, d_post=d_post, spec=spec, meta={"scenario": "automation"})


def sine_path(
    d0, amplitude: float, period_years: float, steps_per_year: float,
    phase_years: float = 0.0,
) -> SinePath:
    if period_years <= 0 or steps_per_year <= 0:
        raise ValueError("period_years and steps_per_year must be positive")
    return SinePath(
        d0=d0,
        amplitude=amplitude,
        period_steps=period_years * steps_per_year,
        phase_steps=phase_years * steps_per_year,
    )


def shuffle_scores(scores: ScoreVector, seed: int) -> ScoreVector:
    """Surrogate shock: random permutation of levels across occupations."""
    rng = np.random.default_rng(seed)
    values = scores.values[rng.permutation(scores.n)]
    return ScoreVector(values=values, labels=scores.labels)


def assortative_scores(scores: ScoreVector, occupation_codes: Sequence) -> ScoreVector:
    """Surrogate shock: sorted levels assigned to occupations in code order."""
    codes = list(occupation_codes)
    if len(codes) != scores.n:
        raise DimensionMismatchError("one code per occupation required")
    if len(set(codes)) != len(codes):
        raise DuplicateCodeError("occupation codes must be unique")
    order = sorted(range(len(codes)), key=codes.__getitem__)
    values = np.empty(scores.n)
    values[order] = np.sort(scores.values)
    return ScoreVector(values=values, labels=scores.labels)


def scale_aggregate(path: DemandPath, factor: float) -> DemandPath:
    """Scale the post-shock target demand by ``factor``.

    Sigmoid paths keep their pre-shock segment and ramp toward the scaled
    target; paths without a shock segment are scaled wholesale.
    """
    if factor <= 0:
        raise ValueError("factor must be positive")
    if isinstance(path, SigmoidShockPath):
        return replace(path, d_post=path.d_post * factor)
    if isinstance(path, ConstantPath):
        return replace(path, d0=path.d0 * factor)
    if isinstance(path, SinePath):
        return replace(path, d0=path.d0 * factor)
    if isinstance(path, TablePath):
        return replace(path, table=path.table * factor)
    raise TypeError(f"cannot scale {type(path).__name__}")


def materialize(path: DemandPath, steps: int) -> np.ndarray:
    """Evaluate the path at t = 0..steps into a (steps + 1, n) table."""
    return np.vstack([path.at(t) for t in range(steps + 1)])


# --- CSV interfaces ---------------------------------------------------------

def write_demand_csv(path: DemandPath, steps: int, labels: Sequence[str], out_path) -> None:
    table = materialize(path, steps)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "occupation", "target_demand"])
        for t in range(table.shape[0]):
            for j, lab in enumerate(labels):
                writer.writerow([t, lab, f"{table[t, j]:.17g}"])


def read_demand_vector(path, labels: Sequence[str]) -> np.ndarray:
    """Load `occupation,demand` records aligned to the given labels."""
    values: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip().lower() != "occupation":
            raise ValueError(f"{path}: expected header 'occupation,demand'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values[row[0].strip()] = float(row[1])
            except (IndexError, ValueError):
                raise ValueError(f"{path}:{lineno}: malformed demand record {row}") from None
    missing = [lab for lab in labels if lab not in values]
    if missing:
        raise ValueError(f"{path}: no demand for occupations {missing}")
    return np.array([values[lab] for lab in labels])
