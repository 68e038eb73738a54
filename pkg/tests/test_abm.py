"""Stochastic engine: probabilities, urn matching, step mechanics, reproducibility."""

import math

import numpy as np
import pytest

from laborflow import (
    ConstantPath,
    LaborState,
    ModelParams,
    adjustment_probabilities,
    combined_probabilities,
    complete_network,
    match_applicants,
    rescue_rule,
    run_simulation,
    solve_steady_state,
    stochastic_step,
)
from laborflow.errors import HorizonExceedsPathError
from laborflow.rng import StreamFactory
from laborflow.scenario import TablePath


def params(**kw):
    defaults = dict(delta_u=0.016, delta_v=0.012, gamma_u=0.16, gamma_v=0.16,
                    dt_weeks=6.75, labor_force=1000)
    defaults.update(kw)
    return ModelParams(**defaults)


def state_of(e, u, v, bins=9):
    e = np.asarray(e, dtype=np.int64)
    spells = np.zeros((e.size, bins), dtype=np.int64)
    spells[:, 0] = u
    return LaborState(employed=e, spells=spells, vacancies=np.asarray(v, dtype=np.int64))


class TestAdjustmentProbabilities:
    def test_balanced_demand_no_adjustment(self):
        au, av = adjustment_probabilities(
            np.array([100.0]), np.array([50.0]), np.array([50.0]), params()
        )
        assert au[0] == 0.0 and av[0] == 0.0

    def test_linear_in_gap(self):
        au, av = adjustment_probabilities(
            np.array([100.0]), np.array([60.0]), np.array([50.0]), params(gamma_u=0.16)
        )
        assert au[0] == pytest.approx(0.016)
        assert av[0] == 0.0

    def test_clipped_at_one(self):
        au, _ = adjustment_probabilities(
            np.array([1.0]), np.array([6.0]), np.array([1.0]), params(gamma_u=1.0)
        )
        assert au[0] == 1.0

    def test_at_most_one_side_active(self):
        rng = np.random.default_rng(0)
        e = rng.integers(1, 100, 50).astype(float)
        d = rng.uniform(0, 200, 50)
        dt = rng.uniform(0, 200, 50)
        au, av = adjustment_probabilities(e, d, dt, params())
        assert np.all((au == 0) | (av == 0))


class TestCombinedProbabilities:
    def test_spontaneous_only(self):
        pu, pv = combined_probabilities(np.zeros(1), np.zeros(1), params())
        assert pu[0] == 0.016 and pv[0] == 0.012

    def test_cross_term(self):
        pu, _ = combined_probabilities(np.array([0.016]), np.zeros(1), params())
        assert pu[0] == pytest.approx(0.031744)

    def test_certain_separation(self):
        pu, _ = combined_probabilities(np.ones(1), np.zeros(1), params())
        assert pu[0] == 1.0


class TestRescueRule:
    def test_dead_occupation_gets_vacancy(self):
        state = rescue_rule(state_of([0, 5], [0, 0], [0, 0]), np.array([10.0, 10.0]))
        assert state.vacancies[0] == 1
        assert state.vacancies[1] == 0  # employed workers present, no rescue

    def test_zero_target_stays_dead(self):
        state = rescue_rule(state_of([0], [0], [0]), np.array([0.0]))
        assert state.vacancies[0] == 0

    def test_existing_vacancy_not_duplicated(self):
        state = rescue_rule(state_of([0], [3], [2]), np.array([10.0]))
        assert state.vacancies[0] == 2


class TestMatchApplicants:
    def test_empirical_mean_matches_urn_formula(self):
        # oracle: expected nonempty urns out of v with s balls is v(1-(1-1/v)^s)
        rng = np.random.default_rng(2024)
        for s, v in ((7, 5), (40, 25)):
            exact = v * (1.0 - (1.0 - 1.0 / v) ** s)
            hires = np.array(
                [match_applicants(np.array([s]), v, rng)[0] for _ in range(4000)]
            )
            se = hires.std(ddof=1) / math.sqrt(hires.size)
            assert abs(hires.mean() - exact) < 3.0 * se

    def test_never_exceeds_urns_or_balls(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            apps = rng.integers(0, 30, size=3)
            v = int(rng.integers(0, 10))
            hires = match_applicants(apps, v, rng)
            assert hires.sum() <= min(apps.sum(), v)
            assert np.all(hires <= apps)

    def test_single_vacancy_hires_one(self):
        rng = np.random.default_rng(3)
        hires = match_applicants(np.array([10, 10]), 1, rng)
        assert hires.sum() == 1

    def test_no_vacancies(self):
        rng = np.random.default_rng(4)
        assert match_applicants(np.array([5]), 0, rng).sum() == 0

    def test_origin_shares_proportional(self):
        # with many urns, each origin's hire share tracks its application share
        rng = np.random.default_rng(5)
        totals = np.zeros(2)
        for _ in range(600):
            totals += match_applicants(np.array([30, 10]), 1000, rng)
        assert totals[0] / totals.sum() == pytest.approx(0.75, abs=0.02)

    def test_contested_urn_winner_uniform_among_applicants(self):
        # one urn, applications (2, 1): origin 0 must win with probability 2/3
        rng = np.random.default_rng(6)
        trials = 20000
        wins = sum(match_applicants(np.array([2, 1]), 1, rng)[0] for _ in range(trials))
        se = math.sqrt((2 / 3) * (1 / 3) / trials)
        assert abs(wins / trials - 2 / 3) < 3.0 * se


class TestStochasticStep:
    def test_no_unemployed_means_no_hires(self):
        net = complete_network(3)
        state = state_of([100, 100, 100], [0, 0, 0], [5, 5, 5])
        nxt, record = stochastic_step(
            state, np.full(3, 105.0), net, params(labor_force=300),
            StreamFactory(1), step_index=1
        )
        assert record.hires.sum() == 0
        np.testing.assert_array_equal(
            nxt.vacancies, state.vacancies + record.openings
        )

    def test_worker_conservation_exact(self):
        net = complete_network(4)
        state = state_of([50, 80, 20, 100], [5, 3, 7, 2], [4, 4, 4, 4])
        L = state.labor_force
        for t in range(1, 30):
            state, _ = stochastic_step(
                state, np.array([60.0, 70.0, 30.0, 90.0]), net,
                params(labor_force=L), StreamFactory(9), t
            )
            assert state.labor_force == L

    def test_vacancy_accounting_identity(self):
        net = complete_network(3)
        state = state_of([200, 150, 100], [20, 10, 30], [15, 10, 5])
        p = params(labor_force=state.labor_force)
        for t in range(1, 20):
            before = rescue_rule(state, np.full(3, 160.0)).vacancies.copy()
            state, rec = stochastic_step(state, np.full(3, 160.0), net, p,
                                         StreamFactory(33), t)
            np.testing.assert_array_equal(
                state.vacancies, before + rec.openings - rec.hires_in
            )
            assert np.all(rec.hires_in <= before)  # no over-hiring

    def test_newly_separated_wait_one_step(self):
        # all workers separate this step; nobody may be rehired within it
        net = complete_network(2)
        state = state_of([10, 10], [0, 0], [8, 8])
        nxt, record = stochastic_step(
            state, np.zeros(2), net,
            params(delta_u=1.0, delta_v=0.0, gamma_u=0.0, gamma_v=0.0, labor_force=20),
            StreamFactory(7), 1,
        )
        assert record.separations.sum() == 20
        assert record.hires.sum() == 0
        assert nxt.unemployed.sum() == 20

    def test_new_vacancies_wait_one_step(self):
        # vacancies only open this step, so this step's applicants must abstain
        net = complete_network(2)
        state = state_of([10, 10], [5, 5], [0, 0])
        nxt, record = stochastic_step(
            state, np.full(2, 100.0), net,
            params(delta_u=0.0, delta_v=1.0, gamma_u=0.0, gamma_v=0.0, labor_force=30),
            StreamFactory(7), 1,
        )
        assert record.openings.sum() == 20
        assert record.applications.sum() == 0
        assert record.hires.sum() == 0

    def test_one_step_hires_match_exact_urn_expectation(self):
        # single occupation: every unemployed worker applies there, so the
        # expected hires are exactly v (1 - (1 - 1/v)^u), no approximation
        u, v, trials = 40, 25, 5000
        net = complete_network(1)
        p = ModelParams(0.0, 0.0, 0.0, 0.0, labor_force=u)
        spells = np.zeros((1, 9), dtype=np.int64)
        spells[0, 0] = u
        exact = v * (1.0 - (1.0 - 1.0 / v) ** u)
        hires = np.empty(trials)
        for seed in range(trials):
            state = LaborState(employed=np.zeros(1, dtype=np.int64),
                               spells=spells.copy(),
                               vacancies=np.array([v], dtype=np.int64))
            _, record = stochastic_step(state, np.array([0.0]), net, p,
                                        StreamFactory(seed), 1)
            hires[seed] = record.hires.sum()
        se = hires.std(ddof=1) / math.sqrt(trials)
        assert abs(hires.mean() - exact) < 3.0 * se

    def test_spell_histogram_consistency(self):
        net = complete_network(3)
        state = state_of([300, 300, 300], [30, 20, 10], [25, 25, 25])
        p = params(labor_force=state.labor_force)
        for t in range(1, 25):
            state, rec = stochastic_step(state, np.full(3, 330.0), net, p,
                                         StreamFactory(17), t)
            np.testing.assert_array_equal(state.spells.sum(axis=1), state.unemployed)
            np.testing.assert_array_equal(state.spells[:, 0], rec.separations)


class TestRunSimulation:
    def setup_net(self, n=4, per_occ=2500):
        net = complete_network(n)
        d0 = np.full(n, float(per_occ))
        p = params(labor_force=n * per_occ)
        state = state_of([per_occ] * n, [0] * n, [0] * n, bins=41)
        return net, d0, p, state

    def test_zero_steps_echoes_initial(self):
        net, d0, p, state = self.setup_net()
        series = run_simulation(state, ConstantPath(d0=d0), net, p, 0, seed=5)
        assert series.steps == 0
        np.testing.assert_array_equal(series.employed[0], state.employed)

    def test_same_seed_bit_identical(self):
        net, d0, p, state = self.setup_net()
        a = run_simulation(state, ConstantPath(d0=d0), net, p, 40, seed=123)
        b = run_simulation(state, ConstantPath(d0=d0), net, p, 40, seed=123)
        c = run_simulation(state, ConstantPath(d0=d0), net, p, 40, seed=124)
        np.testing.assert_array_equal(a.unemployed, b.unemployed)
        np.testing.assert_array_equal(a.vacancies, b.vacancies)
        assert not np.array_equal(a.unemployed, c.unemployed)

    def test_frozen_when_all_rates_zero(self):
        net, d0, p, state = self.setup_net()
        frozen = ModelParams(0.0, 0.0, 0.0, 0.0, labor_force=p.labor_force)
        series = run_simulation(state, ConstantPath(d0=d0), net, frozen, 20, seed=1)
        assert np.ptp(series.employed, axis=0).max() == 0
        assert series.V.max() == 0

    def test_horizon_enforced(self):
        net, d0, p, state = self.setup_net()
        path = TablePath(table=np.tile(d0, (11, 1)))  # defines t = 0..10
        run_simulation(state, path, net, p, 10, seed=2)
        with pytest.raises(HorizonExceedsPathError):
            run_simulation(state, path, net, p, 11, seed=2)

    def test_labor_force_mismatch_rejected(self):
        net, d0, p, state = self.setup_net()
        bad = ModelParams(0.016, 0.012, 0.16, 0.16, labor_force=p.labor_force + 1)
        with pytest.raises(ValueError, match="labor_force"):
            run_simulation(state, ConstantPath(d0=d0), net, bad, 5, seed=3)

    def test_ltu_bounded_by_unemployment(self):
        net, d0, p, state = self.setup_net()
        series = run_simulation(state, ConstantPath(d0=d0), net, p, 60, seed=11)
        assert np.all(series.U_lt <= series.U)


class TestRealizedDemandFluctuation:
    def test_time_average_below_target_near_fixed_point(self):
        """With delta_u > delta_v, realized demand settles below target.

        The long-run time average of e + v per occupation should sit at the
        deterministic fixed point d* (checked by batch means, since the
        series is autocorrelated), and below the target demand.
        """
        n, per_occ = 4, 25000
        net = complete_network(n)
        d0 = np.full(n, float(per_occ))
        p = params(labor_force=n * per_occ)
        steady = solve_steady_state(net, d0, p)

        state = state_of([per_occ] * n, [0] * n, [0] * n, bins=41)
        burn, batches, batch_len = 300, 16, 100
        streams_seed = 77
        series = run_simulation(
            state, ConstantPath(d0=d0), net, p, burn + batches * batch_len,
            seed=streams_seed,
        )
        demand = series.employed + series.vacancies  # (T+1, n)
        window = demand[burn + 1 :, 0]
        means = window.reshape(batches, batch_len).mean(axis=1)
        se = means.std(ddof=1) / math.sqrt(batches)
        d_star = steady.d_star[0]
        assert means.mean() < per_occ
        assert abs(means.mean() - d_star) < 3.0 * se
