"""Labor-market state containers and time-series records.

Unemployment is stored as a per-occupation spell histogram: column b counts
workers unemployed for exactly b + 1 steps, except the last column, which
accumulates everyone past the truncation depth.  Totals are exact because the
overflow bin keeps the tail mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .params import ModelParams

# Spell histograms keep 10 * tau bins by default before overflowing.
SPELL_DEPTH_FACTOR = 10


def spell_bins_for(params: ModelParams) -> int:
    return SPELL_DEPTH_FACTOR * params.tau_steps + 1


def _as_counts(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return arr


@dataclass
class LaborState:
    """Integer per-occupation counts for the stochastic engine."""

    employed: np.ndarray
    spells: np.ndarray  # (n, bins) unemployment spell histogram
    vacancies: np.ndarray

    def __post_init__(self):
        self.employed = _as_counts(self.employed, "employed").astype(np.int64)
        self.vacancies = _as_counts(self.vacancies, "vacancies").astype(np.int64)
        self.spells = _as_counts(self.spells, "spells").astype(np.int64)
        n = self.employed.size
        if self.vacancies.size != n or self.spells.shape[0] != n:
            raise ValueError("state vectors must agree on the number of occupations")

    @classmethod
    def from_employment(cls, employed, vacancies=None, spell_bins: int = 41) -> "LaborState":
        e = np.asarray(employed, dtype=np.int64)
        v = np.zeros_like(e) if vacancies is None else np.asarray(vacancies, dtype=np.int64)
        return cls(employed=e, spells=np.zeros((e.size, spell_bins), dtype=np.int64), vacancies=v)

    @property
    def n(self) -> int:
        return self.employed.size

    @property
    def unemployed(self) -> np.ndarray:
        return self.spells.sum(axis=1)

    @property
    def demand(self) -> np.ndarray:
        """Realized demand: employment plus open vacancies."""
        return self.employed + self.vacancies

    @property
    def labor_force(self) -> int:
        return int(self.employed.sum() + self.spells.sum())

    def long_term_unemployed(self, tau_steps: int) -> np.ndarray:
        return self.spells[:, tau_steps - 1 :].sum(axis=1)

    def copy(self) -> "LaborState":
        return LaborState(self.employed.copy(), self.spells.copy(), self.vacancies.copy())


@dataclass
class MeanState:
    """Expected-value counterpart of LaborState (non-negative reals)."""

    employed: np.ndarray
    spells: np.ndarray
    vacancies: np.ndarray
    unemployed: np.ndarray | None = None  # tracked by its own balance, not the histogram

    def __post_init__(self):
        self.employed = _as_counts(self.employed, "employed").astype(np.float64)
        self.vacancies = _as_counts(self.vacancies, "vacancies").astype(np.float64)
        self.spells = _as_counts(self.spells, "spells").astype(np.float64)
        if self.unemployed is None:
            self.unemployed = self.spells.sum(axis=1)
        else:
            self.unemployed = np.asarray(self.unemployed, dtype=np.float64)

    @classmethod
    def from_employment(cls, employed, vacancies=None, spell_bins: int = 41) -> "MeanState":
        e = np.asarray(employed, dtype=np.float64)
        v = np.zeros_like(e) if vacancies is None else np.asarray(vacancies, dtype=np.float64)
        return cls(employed=e, spells=np.zeros((e.size, spell_bins)), vacancies=v)

    @property
    def n(self) -> int:
        return self.employed.size

    @property
    def demand(self) -> np.ndarray:
        return self.employed + self.vacancies

    @property
    def labor_force(self) -> float:
        return float(self.employed.sum() + self.unemployed.sum())

    def long_term_unemployed(self, tau_steps: int) -> np.ndarray:
        return self.spells[:, tau_steps - 1 :].sum(axis=1)

    def copy(self) -> "MeanState":
        return MeanState(
            self.employed.copy(), self.spells.copy(), self.vacancies.copy(), self.unemployed.copy()
        )


@dataclass
class SimulationSeries:
    """Per-step per-occupation trajectories from either engine.

    Row t of each array is the state after t steps (row 0 is the initial
    state).  ``u_lt`` counts spells of at least tau steps.
    """

    employed: np.ndarray
    unemployed: np.ndarray
    vacancies: np.ndarray
    u_lt: np.ndarray
    labels: tuple[str, ...]
    engine: str
    params: ModelParams
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return self.employed.shape[0] - 1

    @property
    def n(self) -> int:
        return self.employed.shape[1]

    # Aggregates (upper-case in the output schema).
    @property
    def E(self) -> np.ndarray:
        return self.employed.sum(axis=1)

    @property
    def U(self) -> np.ndarray:
        return self.unemployed.sum(axis=1)

    @property
    def V(self) -> np.ndarray:
        return self.vacancies.sum(axis=1)

    @property
    def U_lt(self) -> np.ndarray:
        return self.u_lt.sum(axis=1)


def largest_remainder_round(values: np.ndarray, target_total: int) -> np.ndarray:
    """Round non-negative reals to integers that sum exactly to target_total."""
    values = np.asarray(values, dtype=np.float64)
    floors = np.floor(values).astype(np.int64)
    shortfall = int(target_total) - int(floors.sum())
    if shortfall < 0:
        raise ValueError("target_total below the floor sum")
    if shortfall >= values.size:  # far-off target: spread whole units first
        floors += shortfall // values.size
        shortfall %= values.size
    if shortfall:
        order = np.argsort(-(values - floors), kind="stable")
        floors[order[:shortfall]] += 1
    return floors


def discretize_state(mean: MeanState, labor_force: int) -> LaborState:
    """Integerize a mean state, conserving the worker total exactly.

    Employment gets largest-remainder rounding toward its own rounded total;
    the unemployment spell histogram absorbs the remaining workers (also by
    largest remainder, flattened across occupations and bins); vacancies are
    rounded to nearest since nothing constrains their total.
    """
    e_total = int(round(mean.employed.sum()))
    e_total = min(e_total, int(labor_force))
    e = largest_remainder_round(mean.employed, e_total)
    u_total = int(labor_force) - e_total
    spells = largest_remainder_round(mean.spells.ravel(), u_total).reshape(mean.spells.shape)
    v = np.rint(mean.vacancies).astype(np.int64)
    return LaborState(employed=e, spells=spells, vacancies=v)


def build_series(
    frames: Sequence, labels, engine: str, params: ModelParams, seed=None, meta=None
) -> SimulationSeries:
    """Stack (e, u, v, u_lt) frames into a SimulationSeries."""
    e, u, v, ult = (np.vstack([f[k] for f in frames]) for k in range(4))
    return SimulationSeries(
        employed=e,
        unemployed=u,
        vacancies=v,
        u_lt=ult,
        labels=tuple(labels),
        engine=engine,
        params=params,
        seed=seed,
        meta=dict(meta or {}),
    )
