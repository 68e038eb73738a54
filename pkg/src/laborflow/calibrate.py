"""Parameter fitting against an empirical Beveridge curve, plus helpers.

The business-cycle fit runs the deterministic engine: the comparison is
between smooth closed curves, so a seedless engine keeps the grid search
cheap and exactly reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .errors import AllCellsDegenerateError, DegenerateCurveError, RInfeasibleError
from .meanfield import run_meanfield, solve_steady_state, steady_mean_state
from .metrics import BeveridgeCurve, curve_overlap, signed_area
from .network import Network
from .params import ModelParams
from .scenario import sine_path


def infer_r(annual_stay_fraction: float, unemployment_rate: float, steps_per_year: float) -> float:
    """Self-loop weight implied by the annual occupational mobility rate.

    A worker keeps her occupation through a step unless she is unemployed
    (probability u) and applies elsewhere (probability 1 - r), so staying
    put all year means x = ((1 - u) + u r)^y.  Solving for r:
    r = (x^(1/y) + u - 1) / u.
    """
    x, u, y = annual_stay_fraction, unemployment_rate, steps_per_year
    if not 0.0 < x <= 1.0:
        raise ValueError(f"annual stay fraction {x} outside (0, 1]")
    if not 0.0 < u < 1.0:
        raise ValueError(f"unemployment rate {u} outside (0, 1)")
    if y <= 0:
        raise ValueError("steps_per_year must be positive")
    r = (x ** (1.0 / y) + u - 1.0) / u
    if -1e-12 <= r < 0.0:
        r = 0.0
    if 1.0 < r <= 1.0 + 1e-12:
        r = 1.0
    if not 0.0 <= r <= 1.0:
        raise RInfeasibleError(
            f"stay fraction {x} and unemployment {u} imply self-loop {r:.6g} outside [0, 1]"
        )
    return r


def business_cycle_curve(
    network: Network,
    d0: np.ndarray,
    params: ModelParams,
    amplitude: float,
    cycle_years: float,
    warmup_cycles: int = 1,
    measure_cycles: int = 1,
    steady_tol: float = 1e-10,
) -> BeveridgeCurve:
    """Model Beveridge curve over the final cycle of a sine-wave demand run.

    The run starts at the steady state under d0 and discards ``warmup_cycles``
    full cycles so the transient approach to the limit cycle does not
    contaminate the geometry.
    """
    d0 = np.asarray(d0, dtype=np.float64)
    steady = solve_steady_state(network, d0, params, tol=steady_tol)
    initial = steady_mean_state(steady, network, params)
    path = sine_path(d0, amplitude, cycle_years, params.steps_per_year)
    cycle_steps = max(4, round(cycle_years * params.steps_per_year))
    total = cycle_steps * (warmup_cycles + measure_cycles)
    series = run_meanfield(initial, path, network, params, total)
    u = series.U[-cycle_steps:]
    e = series.E[-cycle_steps:]
    v = series.V[-cycle_steps:]
    points = np.column_stack([u / (u + e), v / (v + e)])
    return BeveridgeCurve(points=points)


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("axis count must be at least 1")
        if self.count > 1 and not self.lo < self.hi:
            raise ValueError(f"axis needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"axis bounds reversed: [{self.lo}, {self.hi}]")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


def _axis(spec) -> GridAxis:
    if isinstance(spec, GridAxis):
        return spec
    return GridAxis(*spec)


@dataclass(frozen=True)
class GridSpec:
    """Search box over amplitude, separation/opening rates, and step length."""

    a: GridAxis
    delta_u: GridAxis
    delta_v: GridAxis
    dt_weeks: GridAxis

    def __post_init__(self):
        for name in ("a", "delta_u", "delta_v", "dt_weeks"):
            object.__setattr__(self, name, _axis(getattr(self, name)))

    def cells(self) -> list[tuple[float, float, float, float]]:
        """All grid cells in lexicographic order."""
        return list(
            itertools.product(
                self.a.values(), self.delta_u.values(), self.delta_v.values(),
                self.dt_weeks.values(),
            )
        )


@dataclass(frozen=True)
class CalibrationResult:
    best_params: dict
    best_score: float
    table: list  # (a, delta_u, delta_v, dt_weeks, iou) rows, grid order


def _score_cell(cell, network, d0, reference, gamma, cycle_years, labor_force,
                grid_resolution, steady_tol):
    a, delta_u, delta_v, dt_weeks = cell
    params = ModelParams(
        delta_u=delta_u, delta_v=delta_v, gamma_u=gamma, gamma_v=gamma,
        dt_weeks=dt_weeks, labor_force=labor_force,
    )
    try:
        curve = business_cycle_curve(
            network, d0, params, a, cycle_years, steady_tol=steady_tol
        )
        return curve_overlap(curve, reference, grid_resolution)
    except DegenerateCurveError:
        return math.nan


def fit_beveridge(
    grid: GridSpec,
    reference: BeveridgeCurve,
    cycle_years: float,
    network: Network,
    d0: np.ndarray,
    gamma: float,
    grid_resolution: int = 512,
    steady_tol: float = 1e-10,
    n_jobs: int = 1,
) -> CalibrationResult:
    """Exhaustive search maximizing curve overlap with the reference.

    Cells evaluate independently (and in parallel when n_jobs > 1) and are
    reduced in grid order, ties broken toward smaller parameter values.
    """
    d0 = np.asarray(d0, dtype=np.float64)
    labor_force = max(1, int(round(d0.sum())))
    cells = grid.cells()
    if n_jobs == 1:
        scores = [
            _score_cell(cell, network, d0, reference, gamma, cycle_years,
                        labor_force, grid_resolution, steady_tol)
            for cell in cells
        ]
    else:
        scores = Parallel(n_jobs=n_jobs)(
            delayed(_score_cell)(cell, network, d0, reference, gamma, cycle_years,
                                 labor_force, grid_resolution, steady_tol)
            for cell in cells
        )
    table = [(a, du, dv, dt, iou) for (a, du, dv, dt), iou in zip(cells, scores)]
    best_idx = None
    best = -math.inf
    for idx, score in enumerate(scores):
        if not math.isnan(score) and score > best:
            best, best_idx = score, idx
    if best_idx is None:
        raise AllCellsDegenerateError("every grid cell produced a degenerate curve")
    a, du, dv, dt = cells[best_idx]
    return CalibrationResult(
        best_params={"a": a, "delta_u": du, "delta_v": dv, "dt_weeks": dt},
        best_score=best,
        table=table,
    )


def sweep_cyclicality(
    delta_u_values,
    delta_v_values,
    network: Network,
    d0: np.ndarray,
    amplitude: float,
    cycle_years: float,
    gamma: float,
    dt_weeks: float,
    steady_tol: float = 1e-10,
) -> list[tuple[float, float, float]]:
    """Signed Beveridge area for every (delta_u, delta_v) pair.

    Positive area means the business-cycle curve cycles counter-clockwise.
    """
    d0 = np.asarray(d0, dtype=np.float64)
    labor_force = max(1, int(round(d0.sum())))
    rows = []
    for delta_u in delta_u_values:
        for delta_v in delta_v_values:
            params = ModelParams(
                delta_u=delta_u, delta_v=delta_v, gamma_u=gamma, gamma_v=gamma,
                dt_weeks=dt_weeks, labor_force=labor_force,
            )
            curve = business_cycle_curve(
                network, d0, params, amplitude, cycle_years, steady_tol=steady_tol
            )
            rows.append((float(delta_u), float(delta_v), signed_area(curve)))
    return rows
