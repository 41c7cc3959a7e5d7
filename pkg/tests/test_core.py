import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimprofiles.core import PointCloud, ScaleSchedule, Subspace, fit_slope
from dimprofiles.errors import InvalidInputError


class TestFitSlope:
    def test_exact_line(self):
        pairs = [(k, 0.5 * k) for k in range(1, 8)]
        for mode in ("least_squares", "limsup", "liminf"):
            fit = fit_slope(pairs, mode)
            assert fit.slope == pytest.approx(0.5, abs=1e-12)
            assert fit.max_residual == pytest.approx(0.0, abs=1e-12)
            assert fit.scale_count == 7
            assert fit.mode == mode

    def test_limsup_hand_enumerated(self):
        # secants from (1,1): (2,1) -> 0, (3,3) -> 1; tail keeps both, max = 1
        fit = fit_slope([(1, 1), (2, 1), (3, 3)], "limsup")
        assert fit.slope == pytest.approx(1.0)

    def test_liminf_hand_enumerated(self):
        fit = fit_slope([(1, 1), (2, 1), (3, 3)], "liminf")
        assert fit.slope == pytest.approx(0.0)

    def test_constant_data(self):
        pairs = [(k, 0.0) for k in range(1, 6)]
        for mode in ("least_squares", "limsup", "liminf"):
            assert fit_slope(pairs, mode).slope == pytest.approx(0.0)

    def test_rejects_short_input(self):
        with pytest.raises(InvalidInputError):
            fit_slope([(1, 1), (2, 2)], "least_squares")

    def test_rejects_non_increasing_x(self):
        with pytest.raises(InvalidInputError):
            fit_slope([(1, 1), (1, 2), (3, 3)], "least_squares")

    def test_rejects_unknown_mode(self):
        with pytest.raises(InvalidInputError):
            fit_slope([(1, 1), (2, 2), (3, 3)], "secant")

    @settings(max_examples=100, deadline=None)
    @given(
        slope=st.floats(-5, 5),
        intercept=st.floats(-10, 10),
        count=st.integers(4, 12),
    )
    def test_appending_on_line_point_is_invariant(self, slope, intercept, count):
        xs = list(range(1, count + 1))
        pairs = [(x, slope * x + intercept) for x in xs]
        base = fit_slope(pairs, "least_squares")
        extended = fit_slope(pairs + [(count + 1, slope * (count + 1) + intercept)],
                             "least_squares")
        assert extended.slope == pytest.approx(base.slope, abs=1e-9)
        assert abs(extended.max_residual - base.max_residual) < 1e-9

    def test_liminf_le_limsup(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(3, 10))
            pairs = list(zip(range(1, n + 1), np.cumsum(rng.random(n))))
            lo = fit_slope(pairs, "liminf").slope
            hi = fit_slope(pairs, "limsup").slope
            assert lo <= hi + 1e-12


class TestScaleSchedule:
    def test_default(self):
        assert ScaleSchedule.default().exponents == tuple(range(8, 41, 2))

    def test_scales(self):
        sched = ScaleSchedule([1, 2, 3])
        assert sched.scales == (0.5, 0.25, 0.125)
        assert len(sched) == 3

    def test_parse_range(self):
        assert ScaleSchedule.parse("8:40:2").exponents == tuple(range(8, 41, 2))
        assert ScaleSchedule.parse("3:5").exponents == (3, 4, 5)

    def test_parse_comma_list(self):
        assert ScaleSchedule.parse("4,8,16").exponents == (4, 8, 16)

    def test_rejects_short(self):
        with pytest.raises(InvalidInputError):
            ScaleSchedule([4, 8])

    def test_rejects_non_increasing(self):
        with pytest.raises(InvalidInputError):
            ScaleSchedule([4, 8, 8])

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInputError):
            ScaleSchedule([0, 1, 2])


class TestPointCloud:
    def test_valid_cloud(self):
        pts = np.array([[0.0], [0.25], [0.75]])
        F = PointCloud(1, pts, 2)
        assert len(F) == 3
        assert F.diameter == pytest.approx(0.75)

    def test_rejects_non_dyadic(self):
        with pytest.raises(InvalidInputError):
            PointCloud(1, np.array([[0.1]]), 4)

    def test_rejects_duplicates(self):
        with pytest.raises(InvalidInputError):
            PointCloud(1, np.array([[0.25], [0.25]]), 2)

    def test_rejects_outside_unit_box(self):
        with pytest.raises(InvalidInputError):
            PointCloud(1, np.array([[1.5]]), 1)

    def test_unit_box_flag_allows_out_of_range(self):
        F = PointCloud(1, np.array([[-0.25], [1.5]]), 2, unit_box=False)
        assert len(F) == 2

    def test_rejects_wrong_shape(self):
        with pytest.raises(InvalidInputError):
            PointCloud(2, np.array([[0.0], [0.5]]), 1)


class TestSubspace:
    def test_accepts_orthonormal_frame(self):
        V = Subspace(2, 1, np.array([[1.0, 0.0]]))
        assert V.dim == 1

    def test_rejects_non_orthonormal(self):
        with pytest.raises(InvalidInputError):
            Subspace(2, 1, np.array([[1.0, 1.0]]))

    def test_rejects_non_orthogonal_rows(self):
        bad = np.array([[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(InvalidInputError):
            Subspace(2, 2, bad)
