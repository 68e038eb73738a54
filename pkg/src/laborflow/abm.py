"""Exact stochastic engine.

One step runs four ordered phases:

1. draw separations Bin(e_i, pi_u) and openings Bin(e_i, pi_v), with the
   adjustment probabilities evaluated on the realized demand e + v of the
   current state;
2. every worker already unemployed at the start of the step (workers
   separated in phase 1 must wait until next step) sends exactly one
   application, picking occupation j with probability proportional to
   v_j A_ij over the start-of-step vacancy stock, and abstaining when no
   reachable occupation has vacancies;
3. within each occupation the applications land uniformly on that
   occupation's vacancies (urns); every vacancy with at least one applicant
   hires exactly one of them uniformly at random;
4. bookkeeping: hired workers leave unemployment (sampled from the spell
   histogram without replacement), surviving spells lengthen by one step,
   phase-1 separations enter at spell one, vacancies lose the filled urns
   and gain the phase-1 openings, which start accepting applications next
   step.

A worker therefore never flips employed -> unemployed -> employed within a
single step, and a vacancy is never opened and filled in the same step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonExceedsPathError
from .network import Network
from .params import ModelParams
from .rng import (
    PHASE_APPLICATIONS,
    PHASE_DRAWS,
    PHASE_MATCHING,
    PHASE_SPELLS,
    StreamFactory,
)
from .scenario import DemandPath
from .state import LaborState, SimulationSeries, build_series


def adjustment_probabilities(
    employed: np.ndarray,
    demand: np.ndarray,
    d_target: np.ndarray,
    params: ModelParams,
) -> tuple[np.ndarray, np.ndarray]:
    """State-dependent separation / opening probabilities, capped at 1.

    alpha_u reacts to excess realized demand, alpha_v to shortfall, each at
    its own speed and normalized per employed worker; at most one of the two
    is nonzero per occupation.  Occupations without employed workers get 0
    (they draw no binomial trials; the rescue rule keeps them alive).
    """
    employed = np.asarray(employed, dtype=np.float64)
    over = np.maximum(0.0, demand - d_target)
    under = np.maximum(0.0, d_target - demand)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha_u = np.where(employed > 0, params.gamma_u * over / employed, 0.0)
        alpha_v = np.where(employed > 0, params.gamma_v * under / employed, 0.0)
    return np.minimum(alpha_u, 1.0), np.minimum(alpha_v, 1.0)


def combined_probabilities(
    alpha_u: np.ndarray, alpha_v: np.ndarray, params: ModelParams
) -> tuple[np.ndarray, np.ndarray]:
    """Merge spontaneous and state-dependent probabilities.

    The cross terms keep a worker from being counted as separated twice
    (and likewise for openings): pi = delta + alpha - delta * alpha.
    """
    pi_u = params.delta_u + alpha_u - params.delta_u * alpha_u
    pi_v = params.delta_v + alpha_v - params.delta_v * alpha_v
    return pi_u, pi_v


def rescue_rule(state: LaborState, d_target: np.ndarray) -> LaborState:
    """Reopen dead occupations: e = v = 0 with positive target gets one vacancy.

    Without this an occupation that ever empties out could never re-employ
    anyone, because openings are drawn per employed worker.
    """
    dead = (state.employed == 0) & (state.vacancies == 0) & (np.asarray(d_target) > 0)
    if not np.any(dead):
        return state
    vacancies = state.vacancies.copy()
    vacancies[dead] = 1
    return LaborState(employed=state.employed, spells=state.spells, vacancies=vacancies)


def match_applicants(
    applications: np.ndarray, n_vacancies: int, rng: np.random.Generator
) -> np.ndarray:
    """Urn matching for one occupation.

    ``applications[i]`` applicants from origin i each land in one of
    ``n_vacancies`` urns uniformly; every non-empty urn hires one of its
    applicants uniformly.  Returns hires per origin.
    """
    applications = np.asarray(applications, dtype=np.int64)
    total = int(applications.sum())
    if total == 0 or n_vacancies == 0:
        return np.zeros_like(applications)
    urns = rng.integers(0, n_vacancies, size=total)
    # A uniform shuffle makes "first applicant seen per urn" a uniform pick
    # within every urn.
    order = rng.permutation(total)
    _, first = np.unique(urns[order], return_index=True)
    winners = order[first]
    origins = np.repeat(np.arange(applications.size), applications)
    return np.bincount(origins[winners], minlength=applications.size)


@dataclass
class StepRecord:
    """Realized motion during one stochastic step."""

    separations: np.ndarray
    openings: np.ndarray
    applications: np.ndarray  # (n, n) origin x destination
    hires: np.ndarray  # (n, n) origin x destination
    rescued: np.ndarray = field(default=None)

    @property
    def hires_out(self) -> np.ndarray:
        return self.hires.sum(axis=1)

    @property
    def hires_in(self) -> np.ndarray:
        return self.hires.sum(axis=0)


def stochastic_step(
    state: LaborState,
    d_target: np.ndarray,
    network: Network,
    params: ModelParams,
    streams: StreamFactory,
    step_index: int,
) -> tuple[LaborState, StepRecord]:
    """One exact simulation step (see the module docstring for the phases)."""
    n = state.n
    d_target = np.asarray(d_target, dtype=np.float64)
    rescued = (state.employed == 0) & (state.vacancies == 0) & (d_target > 0)
    state = rescue_rule(state, d_target)
    e = state.employed
    v0 = state.vacancies  # applications and urns both use this stock
    u = state.unemployed

    alpha_u, alpha_v = adjustment_probabilities(e, e + v0, d_target, params)
    pi_u, pi_v = combined_probabilities(alpha_u, alpha_v, params)

    separations = np.zeros(n, dtype=np.int64)
    openings = np.zeros(n, dtype=np.int64)
    for i in np.flatnonzero(e > 0):
        rng = streams.stream(step_index, PHASE_DRAWS, i)
        separations[i] = rng.binomial(int(e[i]), pi_u[i])
        openings[i] = rng.binomial(int(e[i]), pi_v[i])

    weights = network.adjacency * v0[None, :].astype(np.float64)
    row_totals = weights.sum(axis=1)
    applications = np.zeros((n, n), dtype=np.int64)
    for i in np.flatnonzero((u > 0) & (row_totals > 0)):
        rng = streams.stream(step_index, PHASE_APPLICATIONS, i)
        applications[i] = rng.multinomial(int(u[i]), weights[i] / row_totals[i])

    hires = np.zeros((n, n), dtype=np.int64)
    received = applications.sum(axis=0)
    for j in np.flatnonzero(received > 0):
        rng = streams.stream(step_index, PHASE_MATCHING, j)
        hires[:, j] = match_applicants(applications[:, j], int(v0[j]), rng)
    hires_out = hires.sum(axis=1)
    hires_in = hires.sum(axis=0)

    # Hired workers are exchangeable within an occupation, so the spell bins
    # they vacate follow a multivariate hypergeometric draw.
    spells = state.spells
    new_spells = np.zeros_like(spells)
    new_spells[:, 0] = separations
    for i in range(n):
        row = spells[i]
        if hires_out[i] > 0:
            rng = streams.stream(step_index, PHASE_SPELLS, i)
            taken = rng.multivariate_hypergeometric(row, int(hires_out[i]))
            row = row - taken
        new_spells[i, 1:-1] += row[:-2]
        new_spells[i, -1] += row[-2] + row[-1]

    next_state = LaborState(
        employed=e - separations + hires_in,
        spells=new_spells,
        vacancies=v0 + openings - hires_in,
    )
    record = StepRecord(
        separations=separations,
        openings=openings,
        applications=applications,
        hires=hires,
        rescued=rescued,
    )
    return next_state, record


def run_simulation(
    initial: LaborState,
    path: DemandPath,
    network: Network,
    params: ModelParams,
    steps: int,
    seed: int,
    trace: bool = False,
) -> SimulationSeries:
    """Seeded stochastic trajectory; the same seed reproduces it bit-exactly."""
    if initial.n != network.n:
        raise ValueError("state and network disagree on the number of occupations")
    if initial.labor_force != params.labor_force:
        raise ValueError(
            f"initial state holds {initial.labor_force} workers, "
            f"params.labor_force says {params.labor_force}"
        )
    if path.horizon is not None and steps > path.horizon:
        raise HorizonExceedsPathError(f"{steps} steps but path ends at {path.horizon}")
    streams = StreamFactory(seed)
    tau = params.tau_steps
    state = initial.copy()
    frames = [_frame(state, tau)]
    records = [] if trace else None
    for t in range(1, steps + 1):
        state, record = stochastic_step(state, path.at(t - 1), network, params, streams, t)
        frames.append(_frame(state, tau))
        if trace:
            records.append(record)
    series = build_series(
        frames, network.labels, "abm", params, seed=seed, meta=dict(path.meta)
    )
    if trace:
        series.meta["records"] = records
    return series


def _frame(state: LaborState, tau: int):
    return (
        state.employed.copy(),
        state.unemployed,
        state.vacancies.copy(),
        state.long_term_unemployed(tau),
    )
