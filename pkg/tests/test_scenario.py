"""Demand paths and surrogate shocks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laborflow import (
    ConstantPath,
    ScoreVector,
    ShockSpec,
    assortative_scores,
    materialize,
    post_shock_demand,
    scale_aggregate,
    shuffle_scores,
    sigmoid_path,
    sine_path,
)
from laborflow.errors import (
    AllAutomatedError,
    AmplitudeOutOfRangeError,
    DuplicateCodeError,
    NonPositiveSteepnessError,
)

STEPS_PER_YEAR = 52 / 6.75


def spec(start=0.0, midpoint_years=15.0, k=0.79, scale=1.0):
    return ShockSpec(
        start_step=start,
        midpoint_step=start + midpoint_years * STEPS_PER_YEAR,
        steepness_per_year=k,
        steps_per_year=STEPS_PER_YEAR,
        aggregate_scale=scale,
    )


class TestPostShockDemand:
    def test_zero_scores_identity(self):
        e0 = np.array([30.0, 70.0])
        d = post_shock_demand(e0, ScoreVector(values=[0.0, 0.0]), labor_force=100.0)
        np.testing.assert_allclose(d, e0)

    def test_full_automation_reallocates_everything(self):
        d = post_shock_demand(
            np.array([50.0, 50.0]), ScoreVector(values=[1.0, 0.0]), labor_force=100.0
        )
        np.testing.assert_allclose(d, [0.0, 100.0])

    def test_hand_computed_reallocation(self):
        # kept hours (30, 40); shares over 70 scaled to L=100
        d = post_shock_demand(
            np.array([60.0, 40.0]), ScoreVector(values=[0.5, 0.0]), labor_force=100.0
        )
        np.testing.assert_allclose(d, [3000 / 70, 4000 / 70])

    def test_all_automated_error(self):
        with pytest.raises(AllAutomatedError):
            post_shock_demand(np.array([10.0, 5.0]), ScoreVector(values=[1.0, 1.0]), 15.0)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(1.0, 1e5), min_size=1, max_size=8),
        st.lists(st.floats(0.0, 0.99), min_size=1, max_size=8),
    )
    def test_total_is_labor_force(self, e0, p):
        n = min(len(e0), len(p))
        d = post_shock_demand(
            np.array(e0[:n]), ScoreVector(values=p[:n]), labor_force=12345.0
        )
        assert d.sum() == pytest.approx(12345.0, rel=1e-9)


class TestSigmoidPath:
    def test_midpoint_is_average(self):
        s = spec()
        path = sigmoid_path([100.0, 50.0], [60.0, 90.0], s)
        np.testing.assert_allclose(path.at(s.midpoint_step), [80.0, 70.0])

    def test_holds_initial_before_start(self):
        s = spec(start=10.0)
        path = sigmoid_path([100.0], [0.0], s)
        np.testing.assert_array_equal(path.at(3), [100.0])

    def test_converges_within_stated_tolerance(self):
        s = spec()
        d0, d_post = np.array([1000.0]), np.array([200.0])
        path = sigmoid_path(d0, d_post, s)
        gap = abs(d_post[0] - d0[0])
        end = s.start_step + 30 * STEPS_PER_YEAR
        assert abs(path.at(s.start_step)[0] - d0[0]) <= 1e-4 * gap
        assert abs(path.at(end)[0] - d_post[0]) <= 1e-4 * gap

    def test_flat_when_targets_match(self):
        path = sigmoid_path([70.0], [70.0], spec())
        for t in (0, 50, 500):
            np.testing.assert_array_equal(path.at(t), [70.0])

    def test_componentwise_monotone(self):
        path = sigmoid_path([100.0, 10.0], [20.0, 90.0], spec())
        table = materialize(path, 400)
        diffs = np.diff(table, axis=0)
        assert np.all(diffs[:, 0] <= 1e-12)
        assert np.all(diffs[:, 1] >= -1e-12)

    def test_steepness_validated(self):
        with pytest.raises(NonPositiveSteepnessError):
            spec(k=0.0)

    def test_automation_shock_conserves_aggregate(self):
        from laborflow import automation_shock_path

        e0 = np.array([400.0, 250.0, 350.0])
        scores = ScoreVector(values=[0.7, 0.2, 0.05])
        path = automation_shock_path(e0, scores, labor_force=1000.0, spec=spec())
        totals = materialize(path, 300).sum(axis=1)
        np.testing.assert_allclose(totals, 1000.0, rtol=1e-9)


class TestSinePath:
    def test_starts_at_baseline(self):
        path = sine_path([100.0, 40.0], 0.065, 14.6, STEPS_PER_YEAR)
        np.testing.assert_allclose(path.at(0), [100.0, 40.0])

    def test_quarter_period_peak(self):
        path = sine_path([100.0], 0.1, 10.0, 1.0)  # period = 10 steps
        np.testing.assert_allclose(path.at(2.5), [110.0])

    def test_periodicity(self):
        period_steps = 14.6 * STEPS_PER_YEAR
        path = sine_path([80.0, 123.0], 0.065, 14.6, STEPS_PER_YEAR)
        for t in (0.0, 5.0, 33.0):
            np.testing.assert_allclose(
                path.at(t), path.at(t + period_steps), rtol=1e-9
            )

    def test_amplitude_validated(self):
        with pytest.raises(AmplitudeOutOfRangeError):
            sine_path([1.0], 1.0, 10.0, 1.0)

    def test_phase_offset_shifts_cycle(self):
        base = sine_path([100.0], 0.1, 10.0, 1.0)
        shifted = sine_path([100.0], 0.1, 10.0, 1.0, phase_years=2.5)
        np.testing.assert_allclose(shifted.at(0), base.at(2.5))


class TestSurrogateShocks:
    def test_shuffle_preserves_multiset(self):
        sv = ScoreVector(values=[0.1, 0.5, 0.9, 0.3])
        out = shuffle_scores(sv, seed=3)
        np.testing.assert_array_equal(np.sort(out.values), np.sort(sv.values))

    def test_shuffle_single_element(self):
        out = shuffle_scores(ScoreVector(values=[0.4]), seed=0)
        np.testing.assert_array_equal(out.values, [0.4])

    def test_shuffle_seed_reproducible(self):
        sv = ScoreVector(values=np.linspace(0, 1, 20))
        a = shuffle_scores(sv, seed=42)
        b = shuffle_scores(sv, seed=42)
        c = shuffle_scores(sv, seed=43)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_assortative_by_code(self):
        sv = ScoreVector(values=[0.9, 0.1, 0.5])
        out = assortative_scores(sv, occupation_codes=[30, 10, 20])
        # code 10 -> lowest score, code 20 -> middle, code 30 -> highest
        np.testing.assert_allclose(out.values, [0.9, 0.1, 0.5])

    def test_assortative_sorted_input_fixed_point(self):
        sv = ScoreVector(values=[0.1, 0.5, 0.9])
        out = assortative_scores(sv, occupation_codes=[1, 2, 3])
        np.testing.assert_array_equal(out.values, sv.values)

    def test_assortative_preserves_multiset(self):
        sv = ScoreVector(values=[0.7, 0.2, 0.4, 0.9])
        out = assortative_scores(sv, occupation_codes=["d", "a", "c", "b"])
        np.testing.assert_array_equal(np.sort(out.values), np.sort(sv.values))

    def test_duplicate_codes_rejected(self):
        with pytest.raises(DuplicateCodeError):
            assortative_scores(ScoreVector(values=[0.1, 0.2]), occupation_codes=[1, 1])


class TestScaleAggregate:
    def test_identity_factor(self):
        path = sigmoid_path([100.0, 50.0], [50.0, 100.0], spec())
        same = scale_aggregate(path, 1.0)
        for t in (0, 50, 200):
            np.testing.assert_array_equal(same.at(t), path.at(t))

    @pytest.mark.parametrize("factor", [1.05, 0.95])
    def test_post_shock_aggregate_scaled(self, factor):
        s = spec()
        labor = 150.0
        path = sigmoid_path([100.0, 50.0], [50.0, 100.0], s)
        scaled = scale_aggregate(path, factor)
        far = s.start_step + 60 * STEPS_PER_YEAR
        assert scaled.at(far).sum() == pytest.approx(factor * labor, rel=1e-4)
        # pre-shock segment untouched
        s2 = spec(start=20.0)
        path2 = scale_aggregate(sigmoid_path([100.0, 50.0], [50.0, 100.0], s2), factor)
        np.testing.assert_array_equal(path2.at(0), [100.0, 50.0])

    def test_constant_path_scaled_wholesale(self):
        path = ConstantPath(d0=np.array([10.0, 20.0]))
        np.testing.assert_allclose(scale_aggregate(path, 1.05).at(7), [10.5, 21.0])
