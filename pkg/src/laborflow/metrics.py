"""Rates and Beveridge-curve geometry.

Unemployment rate is U / (U + E); the vacancy rate uses V / (V + E), the
convention of the published vacancy-rate series the curves are compared
against.  Cycle direction is the sign of the shoelace area of the closed
(u, v) trajectory: positive means counter-clockwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DegenerateCurveError,
    EmptySeriesError,
    EmptyWindowError,
    TooFewPointsError,
    ZeroDenominatorAtStepError,
)
from .state import SimulationSeries


@dataclass(frozen=True)
class RateSeries:
    """Aggregate and per-occupation rates per step."""

    u_rate: np.ndarray
    v_rate: np.ndarray
    ltu_rate: np.ndarray
    u_rate_occ: np.ndarray
    v_rate_occ: np.ndarray
    ltu_rate_occ: np.ndarray


def rates_from_series(series: SimulationSeries) -> RateSeries:
    if series.employed.shape[0] == 0:
        raise EmptySeriesError("series has no steps")
    E, U, V, U_lt = series.E, series.U, series.V, series.U_lt
    workers = U + E
    if np.any(workers <= 0):
        raise EmptySeriesError("series has steps without any workers")
    jobs = V + E

    def ratio(num, den):
        return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)

    occ_workers = series.unemployed + series.employed
    occ_jobs = series.vacancies + series.employed
    return RateSeries(
        u_rate=U / workers,
        v_rate=ratio(V, jobs),
        ltu_rate=U_lt / workers,
        u_rate_occ=ratio(series.unemployed, occ_workers),
        v_rate_occ=ratio(series.vacancies, occ_jobs),
        ltu_rate_occ=ratio(series.u_lt, occ_workers),
    )


def window_average_rates(
    series: SimulationSeries, window: Iterable[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Per-occupation shock-window averages as ratios of sums.

    Summing numerators and denominators over the window before dividing lets
    every unemployed worker contribute equally, and keeps small occupations
    from blowing up the average through brief tiny denominators.
    """
    steps = np.fromiter(window, dtype=np.int64)
    if steps.size == 0:
        raise EmptyWindowError("empty averaging window")
    u = series.unemployed[steps]
    e = series.employed[steps]
    lt = series.u_lt[steps]
    workers = (u + e).sum(axis=0)
    if np.any(workers <= 0):
        raise EmptyWindowError("window covers occupations with no workers at all")
    return u.sum(axis=0) / workers, lt.sum(axis=0) / workers


def alternative_average_rates(
    series: SimulationSeries, window: Iterable[int]
) -> tuple[np.ndarray, np.ndarray]:
    """Mean-of-ratios variant: average the per-step rates over the window."""
    steps = np.fromiter(window, dtype=np.int64)
    if steps.size == 0:
        raise EmptyWindowError("empty averaging window")
    u = series.unemployed[steps]
    e = series.employed[steps]
    lt = series.u_lt[steps]
    workers = u + e
    bad = np.flatnonzero((workers <= 0).any(axis=1))
    if bad.size:
        raise ZeroDenominatorAtStepError(int(steps[bad[0]]))
    return (u / workers).mean(axis=0), (lt / workers).mean(axis=0)


@dataclass(frozen=True)
class BeveridgeCurve:
    """Ordered (unemployment rate, vacancy rate) trajectory."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("curve points must be an (m, 2) array")
        object.__setattr__(self, "points", pts.copy())
        self.points.setflags(write=False)

    @classmethod
    def from_series(cls, series: SimulationSeries) -> "BeveridgeCurve":
        rates = rates_from_series(series)
        return cls(points=np.column_stack([rates.u_rate, rates.v_rate]))

    @property
    def m(self) -> int:
        return self.points.shape[0]


def signed_area(curve: BeveridgeCurve) -> float:
    """Shoelace area of the closed trajectory; positive = counter-clockwise."""
    pts = curve.points
    if pts.shape[0] < 3:
        raise TooFewPointsError("need at least 3 points to enclose area")
    x, y = pts[:, 0], pts[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def cycle_direction(curve: BeveridgeCurve) -> str:
    area = signed_area(curve)
    if area > 0:
        return "counter-clockwise"
    if area < 0:
        return "clockwise"
    return "degenerate"


def _fill_mask(points: np.ndarray, x_centers: np.ndarray, y_centers: np.ndarray) -> np.ndarray:
    """Even-odd rasterization of the closed polygon onto cell centers.

    Scanline ray casting with a half-open vertical rule, so self-intersecting
    trajectories (which model Beveridge curves are) fill robustly.
    """
    closed = np.vstack([points, points[:1]])
    x1, y1 = closed[:-1, 0], closed[:-1, 1]
    x2, y2 = closed[1:, 0], closed[1:, 1]
    keep = y1 != y2  # horizontal edges never cross a scanline
    x1, y1, x2, y2 = x1[keep], y1[keep], x2[keep], y2[keep]
    mask = np.zeros((y_centers.size, x_centers.size), dtype=bool)
    if x1.size == 0:
        return mask
    slope = (x2 - x1) / (y2 - y1)
    for row, yc in enumerate(y_centers):
        crossing = (y1 <= yc) != (y2 <= yc)
        if not crossing.any():
            continue
        xs = np.sort(x1[crossing] + (yc - y1[crossing]) * slope[crossing])
        # parity of crossings strictly to the right of each center
        right = xs.size - np.searchsorted(xs, x_centers, side="right")
        mask[row] = (right % 2) == 1
    return mask


def curve_overlap(
    model: BeveridgeCurve, reference: BeveridgeCurve, grid_resolution: int = 2048
) -> float:
    """Intersection-over-union of the areas the two closed curves enclose.

    Both polygons are rasterized onto one grid spanning their joint bounding
    box; the grid error shrinks like 1 / grid_resolution.
    """
    if model.m < 3 or reference.m < 3:
        raise TooFewPointsError("need at least 3 points per curve")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    pts = np.vstack([model.points, reference.points])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    if np.any(hi - lo <= 0):
        raise DegenerateCurveError("joint bounding box has no area")
    xs = np.linspace(lo[0], hi[0], grid_resolution + 1)
    ys = np.linspace(lo[1], hi[1], grid_resolution + 1)
    x_centers = 0.5 * (xs[:-1] + xs[1:])
    y_centers = 0.5 * (ys[:-1] + ys[1:])
    mask_m = _fill_mask(model.points, x_centers, y_centers)
    mask_r = _fill_mask(reference.points, x_centers, y_centers)
    if not mask_m.any() or not mask_r.any():
        raise DegenerateCurveError("a curve encloses no area at this resolution")
    inter = np.logical_and(mask_m, mask_r).sum()
    union = np.logical_or(mask_m, mask_r).sum()
    return float(inter / union)


# --- CSV interfaces ---------------------------------------------------------

def write_curve(curve: BeveridgeCurve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "u_rate", "v_rate"])
        for t, (u, v) in enumerate(curve.points):
            writer.writerow([t, f"{u:.17g}", f"{v:.17g}"])


def read_curve(path) -> BeveridgeCurve:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            if row[0].strip().lower() == "t":
                continue
            try:
                rows.append((float(row[1]), float(row[2])))
            except (IndexError, ValueError):
                raise ValueError(f"{path}:{lineno}: malformed curve record {row}") from None
    if not rows:
        raise ValueError(f"{path}: no curve points found")
    return BeveridgeCurve(points=np.array(rows))
