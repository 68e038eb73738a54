"""Deterministic large-population engine.

Propagates expected employment, unemployment, and vacancies per occupation:

    e' = e - (du e + (1 - du) gu max(0, d - dT)) + hires_in
    u' = u + (du e + (1 - du) gu max(0, d - dT)) - hires_out
    v' = v + (dv e + (1 - dv) gv max(0, dT - d)) - hires_in

with realized demand d = e + v, target demand dT, and expected hires from
the urn matching model: occupation j fills v_j (1 - exp(-s_j / v_j)) of its
vacancies when it receives s_j applications in expectation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HorizonExceedsPathError, NegativeStateComponentError, NoConvergenceError
from .network import Network
from .params import ModelParams
from .scenario import DemandPath
from .state import MeanState, SimulationSeries, build_series, spell_bins_for

# Below this, (1 - exp(-x)) / x switches to its two-term series to dodge
# cancellation and division hazards.
_SERIES_CUTOFF = 1e-6


def _fill_fraction(x: np.ndarray) -> np.ndarray:
    """(1 - exp(-x)) / x, the per-application success factor; 1 at x = 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    out[small] = 1.0 - 0.5 * x[small]
    xs = x[~small]
    out[~small] = -np.expm1(-xs) / xs
    return out


def application_weights(u_bar: np.ndarray, v_bar: np.ndarray, network: Network) -> np.ndarray:
    """Row-stochastic routing matrix Q: share of i's applications sent to j.

    Q_ij = v_j A_ij / sum_k v_k A_ik; rows with no reachable vacancies are
    zero (those workers abstain this step).
    """
    w = network.adjacency * v_bar[None, :]
    totals = w.sum(axis=1, keepdims=True)
    np.divide(w, totals, out=w, where=totals > 0)
    w[totals[:, 0] == 0] = 0.0
    return w


def expected_applications(u_bar, v_bar, network: Network) -> np.ndarray:
    """Expected applications received per occupation."""
    u_bar = np.asarray(u_bar, dtype=np.float64)
    v_bar = np.asarray(v_bar, dtype=np.float64)
    return u_bar @ application_weights(u_bar, v_bar, network)


def expected_flows(u_bar, v_bar, network: Network) -> np.ndarray:
    """Expected hires F_ij of workers from occupation i into occupation j.

    F_ij = s_ij * fill(s_j / v_j) where s_ij = u_i Q_ij are the expected
    applications.  Columns with no vacancies are zero.
    """
    u_bar = np.asarray(u_bar, dtype=np.float64)
    v_bar = np.asarray(v_bar, dtype=np.float64)
    q = application_weights(u_bar, v_bar, network)
    s = u_bar @ q
    x = np.divide(s, v_bar, out=np.zeros_like(s), where=v_bar > 0)
    phi = _fill_fraction(x)
    phi[v_bar <= 0] = 0.0
    return (u_bar[:, None] * q) * phi[None, :]


@dataclass(frozen=True)
class StepFlows:
    """Expected motion during one deterministic step."""

    separations: np.ndarray
    openings: np.ndarray
    flows: np.ndarray  # (n, n) expected hires, origin x destination

    @property
    def hires_out(self) -> np.ndarray:
        return self.flows.sum(axis=1)

    @property
    def hires_in(self) -> np.ndarray:
        return self.flows.sum(axis=0)


def meanfield_step(
    state: MeanState,
    d_target: np.ndarray,
    network: Network,
    params: ModelParams,
    track_spells: bool = True,
) -> tuple[MeanState, StepFlows]:
    """Advance expected values by one step under the given target demand."""
    e, u, v = state.employed, state.unemployed, state.vacancies
    d = e + v
    gap_over = np.maximum(0.0, d - d_target)
    gap_under = np.maximum(0.0, d_target - d)
    separations = params.delta_u * e + (1.0 - params.delta_u) * params.gamma_u * gap_over
    openings = params.delta_v * e + (1.0 - params.delta_v) * params.gamma_v * gap_under

    flows = expected_flows(u, v, network)
    hires_out = flows.sum(axis=1)
    hires_in = flows.sum(axis=0)

    e_next = e - separations + hires_in
    u_next = u + separations - hires_out
    v_next = v + openings - hires_in
    _clamp_roundoff(e_next, u_next, v_next, scale=max(1.0, float(params.labor_force)))

    if track_spells:
        spells = ltu_step(state.spells, u, separations, hires_out)
    else:
        spells = state.spells
    next_state = MeanState(
        employed=e_next, spells=spells, vacancies=v_next, unemployed=u_next
    )
    return next_state, StepFlows(separations=separations, openings=openings, flows=flows)


def _clamp_roundoff(*arrays: np.ndarray, scale: float) -> None:
    floor = -1e-9 * scale
    for arr in arrays:
        low = arr.min() if arr.size else 0.0
        if low < floor:
            raise NegativeStateComponentError(
                f"state component reached {low:.6g}; the dynamics left the valid region"
            )
        np.maximum(arr, 0.0, out=arr)


def ltu_step(
    spells: np.ndarray, u_prev: np.ndarray, separations: np.ndarray, hires_out: np.ndarray
) -> np.ndarray:
    """Advance the expected spell histogram one step.

    Every unemployed worker of occupation i exits this step with probability
    hires_out_i / u_i; survivors shift one bin up (the last bin accumulates),
    and this step's separations enter at spell one.
    """
    hire_prob = np.divide(hires_out, u_prev, out=np.zeros_like(u_prev), where=u_prev > 0)
    survive = np.clip(1.0 - hire_prob, 0.0, 1.0)
    kept = spells * survive[:, None]
    out = np.empty_like(spells)
    out[:, 0] = separations
    out[:, 1:-1] = kept[:, :-2]
    out[:, -1] = kept[:, -2] + kept[:, -1]
    return out


@dataclass(frozen=True)
class SteadyState:
    """Fixed point of the deterministic dynamics under constant target demand."""

    e_star: np.ndarray
    u_star: np.ndarray
    v_star: np.ndarray
    residual: float
    iterations: int

    @property
    def d_star(self) -> np.ndarray:
        """Realized demand at the fixed point (employment plus vacancies)."""
        return self.e_star + self.v_star

    @property
    def unemployment_rate(self) -> float:
        total = self.e_star.sum() + self.u_star.sum()
        return float(self.u_star.sum() / total)

    @property
    def vacancy_rate(self) -> float:
        return float(self.v_star.sum() / (self.e_star.sum() + self.v_star.sum()))


def solve_steady_state(
    network: Network,
    d_target: np.ndarray,
    params: ModelParams,
    tol: float = 1e-10,
    max_iter: int = 10**6,
    damping: float = 1.0,
) -> SteadyState:
    """Iterate the dynamics under constant target demand to a fixed point.

    Starts from full employment at the target (e = dT, u = v = 0) and stops
    when the max-norm step change, measured relative to the worker total,
    drops below ``tol``.  ``damping`` < 1 averages each update with the
    previous state (x <- (1 - damping) x + damping step(x)).
    """
    d_target = np.asarray(d_target, dtype=np.float64)
    if np.any(d_target < 0):
        raise ValueError("target demand must be non-negative")
    total = d_target.sum()
    scale = max(total, 1.0)
    state = MeanState(
        employed=d_target.copy(),
        spells=np.zeros((d_target.size, 2)),
        vacancies=np.zeros_like(d_target),
        unemployed=np.zeros_like(d_target),
    )
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        nxt, _ = meanfield_step(state, d_target, network, params, track_spells=False)
        if damping != 1.0:
            for name in ("employed", "unemployed", "vacancies"):
                blended = (1.0 - damping) * getattr(state, name) + damping * getattr(nxt, name)
                setattr(nxt, name, blended)
        residual = max(
            np.abs(nxt.employed - state.employed).max(),
            np.abs(nxt.unemployed - state.unemployed).max(),
            np.abs(nxt.vacancies - state.vacancies).max(),
        ) / scale
        state = nxt
        if residual < tol:
            return SteadyState(
                e_star=state.employed,
                u_star=state.unemployed,
                v_star=state.vacancies,
                residual=float(residual),
                iterations=iteration,
            )
    raise NoConvergenceError(max_iter, float(residual))


def steady_mean_state(
    steady: SteadyState, network: Network, params: ModelParams, spell_bins: int | None = None
) -> MeanState:
    """Mean state at the fixed point, with the geometric spell histogram.

    At the steady state a worker unemployed in occupation i is hired with a
    constant per-step probability h_i, so spells are geometric; the overflow
    bin gets the closed-form tail so the histogram sums exactly to u*.
    """
    bins = spell_bins if spell_bins is not None else spell_bins_for(params)
    u, v = steady.u_star, steady.v_star
    hires_out = expected_flows(u, v, network).sum(axis=1)
    h = np.divide(hires_out, u, out=np.zeros_like(u), where=u > 0)
    survive = 1.0 - h
    spells = np.zeros((u.size, bins))
    mass = u * h  # equals the steady-state separations when u is stationary
    remaining = u.copy()
    for b in range(bins - 1):
        spells[:, b] = mass
        remaining = remaining - mass
        mass = mass * survive
    spells[:, -1] = np.maximum(remaining, 0.0)
    # occupations with no hiring at all: park everyone in the overflow bin
    dead = (h == 0) & (u > 0)
    if np.any(dead):
        spells[dead] = 0.0
        spells[dead, -1] = u[dead]
    return MeanState(employed=steady.e_star.copy(), spells=spells, vacancies=v.copy(),
                     unemployed=u.copy())


def run_meanfield(
    initial: MeanState,
    path: DemandPath,
    network: Network,
    params: ModelParams,
    steps: int,
) -> SimulationSeries:
    """Deterministic trajectory; same inputs give bit-identical outputs."""
    if initial.n != network.n:
        raise ValueError("state and network disagree on the number of occupations")
    if path.horizon is not None and steps > path.horizon:
        raise HorizonExceedsPathError(f"{steps} steps but path ends at {path.horizon}")
    tau = params.tau_steps
    state = initial.copy()
    frames = [_frame(state, tau)]
    for t in range(1, steps + 1):
        state, _ = meanfield_step(state, path.at(t - 1), network, params)
        frames.append(_frame(state, tau))
    return build_series(frames, network.labels, "meanfield", params, meta=dict(path.meta))


def _frame(state: MeanState, tau: int):
    return (
        state.employed.copy(),
        state.unemployed.copy(),
        state.vacancies.copy(),
        state.long_term_unemployed(tau),
    )
