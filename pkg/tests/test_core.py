import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusetrack.core import (
    Frame,
    TimedPoint,
    Trajectory,
    cartesian_to_polar,
    polar_to_cartesian,
    validate_trajectory,
    wrap_angle,
)
from fusetrack.errors import (
    EmptyTrajectoryError,
    MixedFramesError,
    NonMonotoneTimeError,
)


def polar(t, r, theta):
    return TimedPoint(t, (r, theta), Frame.POLAR)


def cart(t, x, y):
    return TimedPoint(t, (x, y), Frame.CARTESIAN)


class TestConversions:
    def test_axis_aligned(self):
        p = polar_to_cartesian(polar(0.0, 1.0, 0.0))
        assert p.coords == (1.0, 0.0)
        assert p.frame is Frame.CARTESIAN

    def test_origin_degeneracy(self):
        p = polar_to_cartesian(polar(0.0, 0.0, 2.0))
        assert p.coords == (0.0, 0.0)

    def test_3_4_5_triangle(self):
        # angle of a 3-4-5 triangle: atan2(4, 3)
        p = polar_to_cartesian(polar(1.5, 5.0, math.atan2(4.0, 3.0)))
        assert p.coords[0] == pytest.approx(3.0, abs=1e-12)
        assert p.coords[1] == pytest.approx(4.0, abs=1e-12)
        assert p.t == 1.5

    def test_cartesian_to_polar_345(self):
        p = cartesian_to_polar(cart(0.0, 3.0, 4.0))
        assert p.coords[0] == pytest.approx(5.0)
        assert p.coords[1] == pytest.approx(math.atan2(4.0, 3.0))

    def test_cartesian_to_polar_unit(self):
        assert cartesian_to_polar(cart(0.0, 1.0, 0.0)).coords == (1.0, 0.0)

    def test_origin_convention(self):
        assert cartesian_to_polar(cart(0.0, 0.0, 0.0)).coords == (0.0, 0.0)

    def test_wrong_frame_rejected(self):
        with pytest.raises(ValueError):
            polar_to_cartesian(cart(0.0, 1.0, 1.0))
        with pytest.raises(ValueError):
            cartesian_to_polar(polar(0.0, 1.0, 1.0))

    @given(
        r=st.floats(min_value=1e-6, max_value=1e4),
        theta=st.floats(min_value=-math.pi + 1e-12, max_value=math.pi),
    )
    @settings(max_examples=300)
    def test_round_trip(self, r, theta):
        back = cartesian_to_polar(polar_to_cartesian(polar(0.0, r, theta)))
        r2, theta2 = back.coords
        assert abs(r2 - r) <= 1e-12 * max(r, 1.0)
        # angle error scaled back to a positional error
        assert abs(wrap_angle(theta2 - theta)) * r <= 1e-8

    @given(
        x=st.floats(min_value=-1e4, max_value=1e4),
        y=st.floats(min_value=-1e4, max_value=1e4),
    )
    @settings(max_examples=300)
    def test_polar_output_satisfies_invariants(self, x, y):
        p = cartesian_to_polar(cart(0.0, x, y))
        r, theta = p.coords
        assert r >= 0.0
        assert -math.pi < theta <= math.pi


class TestTimedPointInvariants:
    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            polar(0.0, -1.0, 0.0)

    def test_theta_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            polar(0.0, 1.0, -math.pi)
        with pytest.raises(ValueError):
            polar(0.0, 1.0, 3.5)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            cart(math.nan, 0.0, 0.0)
        with pytest.raises(ValueError):
            cart(0.0, math.inf, 0.0)


class TestValidateTrajectory:
    def test_ok(self):
        traj = Trajectory("a", [cart(0.0, 0, 0), cart(1.0, 1, 0), cart(2.0, 2, 0)])
        validate_trajectory(traj)

    def test_non_monotone(self):
        traj = Trajectory("a", [cart(0.0, 0, 0), cart(0.0, 1, 0)])
        with pytest.raises(NonMonotoneTimeError):
            validate_trajectory(traj)

    def test_empty(self):
        with pytest.raises(EmptyTrajectoryError):
            validate_trajectory(Trajectory("a", []))

    def test_mixed_frames(self):
        traj = Trajectory("a", [cart(0.0, 1, 0), polar(1.0, 1.0, 0.0)])
        with pytest.raises(MixedFramesError):
            validate_trajectory(traj)


def test_trajectory_xy_converts_polar():
    traj = Trajectory("p", [polar(0.0, 5.0, math.atan2(4.0, 3.0))])
    xy = traj.xy()
    assert xy[0] == pytest.approx([3.0, 4.0])


def test_from_arrays_round_trip():
    t = np.array([0.0, 0.5, 1.0])
    xy = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]])
    traj = Trajectory.from_arrays("x", t, xy)
    assert np.array_equal(traj.times(), t)
    assert np.array_equal(traj.xy(), xy)
