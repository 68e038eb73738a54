"""Rates and Beveridge-curve geometry."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laborflow import (
    BeveridgeCurve,
    ModelParams,
    SimulationSeries,
    alternative_average_rates,
    curve_overlap,
    cycle_direction,
    rates_from_series,
    signed_area,
    window_average_rates,
)
from laborflow.errors import (
    DegenerateCurveError,
    EmptyWindowError,
    TooFewPointsError,
    ZeroDenominatorAtStepError,
)
from laborflow.metrics import read_curve, write_curve


def series_from(e_rows, u_rows, v_rows, lt_rows=None):
    e = np.asarray(e_rows, dtype=float)
    u = np.asarray(u_rows, dtype=float)
    v = np.asarray(v_rows, dtype=float)
    lt = np.zeros_like(u) if lt_rows is None else np.asarray(lt_rows, dtype=float)
    labels = tuple(f"o{i}" for i in range(e.shape[1]))
    params = ModelParams(0.016, 0.012, 0.16, 0.16, labor_force=max(1, int((e + u)[0].sum())))
    return SimulationSeries(employed=e, unemployed=u, vacancies=v, u_lt=lt,
                            labels=labels, engine="test", params=params)


def square(side=1.0, center=(0.5, 0.5), ccw=True, repeat=1):
    cx, cy = center
    h = side / 2.0
    pts = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)]
    if not ccw:
        pts = pts[::-1]
    return BeveridgeCurve(points=np.array(pts * repeat))


class TestRates:
    def test_aggregate_rates(self):
        s = series_from([[95.0]], [[5.0]], [[0.0]])
        rates = rates_from_series(s)
        assert rates.u_rate[0] == pytest.approx(0.05)
        assert rates.v_rate[0] == 0.0

    def test_ltu_rate_bounded(self):
        s = series_from([[90.0], [80.0]], [[10.0], [20.0]], [[1.0], [2.0]],
                        [[4.0], [15.0]])
        rates = rates_from_series(s)
        assert np.all(rates.ltu_rate <= rates.u_rate + 1e-12)


class TestWindowAverages:
    def test_constant_state(self):
        s = series_from([[90.0]] * 3, [[10.0]] * 3, [[0.0]] * 3)
        u_avg, _ = window_average_rates(s, range(3))
        u_alt, _ = alternative_average_rates(s, range(3))
        assert u_avg[0] == pytest.approx(0.1)
        assert u_alt[0] == pytest.approx(0.1)

    def test_ratio_of_sums(self):
        s = series_from([[100.0], [90.0]], [[0.0], [10.0]], [[0.0], [0.0]])
        u_avg, _ = window_average_rates(s, [0, 1])
        assert u_avg[0] == pytest.approx(10.0 / 200.0)

    def test_measures_differ_when_denominator_varies(self):
        # (u, e) = (10, 90) then (10, 40): mean of ratios 0.15, ratio of sums 2/15
        s = series_from([[90.0], [40.0]], [[10.0], [10.0]], [[0.0], [0.0]])
        u_avg, _ = window_average_rates(s, [0, 1])
        u_alt, _ = alternative_average_rates(s, [0, 1])
        assert u_avg[0] == pytest.approx(20.0 / 150.0)
        assert u_alt[0] == pytest.approx(0.15)
        assert u_alt[0] != pytest.approx(u_avg[0])

    def test_equal_when_workforce_constant(self):
        s = series_from([[90.0], [70.0]], [[10.0], [30.0]], [[0.0], [0.0]])
        u_avg, _ = window_average_rates(s, [0, 1])
        u_alt, _ = alternative_average_rates(s, [0, 1])
        assert u_avg[0] == pytest.approx(u_alt[0])

    def test_empty_window(self):
        s = series_from([[90.0]], [[10.0]], [[0.0]])
        with pytest.raises(EmptyWindowError):
            window_average_rates(s, [])

    def test_zero_denominator_step_reported(self):
        s = series_from([[90.0], [0.0]], [[10.0], [0.0]], [[0.0], [0.0]])
        with pytest.raises(ZeroDenominatorAtStepError) as err:
            alternative_average_rates(s, [0, 1])
        assert err.value.step == 1


class TestSignedArea:
    def test_unit_square_ccw(self):
        assert signed_area(square()) == pytest.approx(1.0)

    def test_unit_square_cw(self):
        assert signed_area(square(ccw=False)) == pytest.approx(-1.0)

    def test_collinear_zero(self):
        curve = BeveridgeCurve(points=np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
        assert signed_area(curve) == pytest.approx(0.0)

    def test_too_few_points(self):
        with pytest.raises(TooFewPointsError):
            signed_area(BeveridgeCurve(points=np.array([[0.0, 0.0], [1.0, 0.0]])))

    def test_direction_labels(self):
        assert cycle_direction(square()) == "counter-clockwise"
        assert cycle_direction(square(ccw=False)) == "clockwise"

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=3, max_size=12))
    def test_reversal_negates(self, pts):
        curve = BeveridgeCurve(points=np.array(pts))
        reversed_curve = BeveridgeCurve(points=np.array(pts[::-1]))
        assert signed_area(curve) == pytest.approx(-signed_area(reversed_curve), abs=1e-12)


class TestCurveOverlap:
    def test_identical_curves(self):
        assert curve_overlap(square(), square()) == 1.0

    def test_disjoint_curves(self):
        a = square(center=(0.5, 0.5))
        b = square(center=(5.0, 5.0))
        assert curve_overlap(a, b) == 0.0

    def test_concentric_squares(self):
        inner = square(side=1.0, center=(0.0, 0.0))
        outer = square(side=2.0, center=(0.0, 0.0))
        # analytic: intersection 1, union 4
        assert curve_overlap(inner, outer, 2048) == pytest.approx(0.25, abs=0.01)

    def test_symmetric(self):
        a = square(side=1.0, center=(0.3, 0.3))
        b = square(side=1.4, center=(0.8, 0.8))
        assert curve_overlap(a, b, 512) == pytest.approx(curve_overlap(b, a, 512), abs=1e-12)

    def test_affine_rescaling_invariant(self):
        a = square(side=1.0, center=(0.3, 0.3))
        b = square(side=1.4, center=(0.8, 0.8))
        scale = np.array([3.0, 0.25])
        shift = np.array([1.0, -2.0])
        a2 = BeveridgeCurve(points=a.points * scale + shift)
        b2 = BeveridgeCurve(points=b.points * scale + shift)
        assert curve_overlap(a, b, 512) == pytest.approx(curve_overlap(a2, b2, 512), abs=1e-9)

    def test_self_intersecting_even_odd(self):
        # figure-eight: even-odd fill keeps both lobes
        bow = BeveridgeCurve(points=np.array(
            [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]
        ))
        ref = square(side=1.0, center=(0.5, 0.5))
        iou = curve_overlap(bow, ref, 1024)
        assert iou == pytest.approx(0.5, abs=0.01)  # two triangles of area 1/4

    def test_degenerate_curve(self):
        flat = BeveridgeCurve(points=np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
        with pytest.raises(DegenerateCurveError):
            curve_overlap(flat, flat)

    def test_too_few_points(self):
        with pytest.raises(TooFewPointsError):
            curve_overlap(BeveridgeCurve(points=np.zeros((2, 2))), square())


class TestCurveCsv:
    def test_round_trip(self, tmp_path):
        curve = square(side=0.04, center=(0.05, 0.03))
        path = tmp_path / "curve.csv"
        write_curve(curve, path)
        loaded = read_curve(path)
        np.testing.assert_array_equal(loaded.points, curve.points)
