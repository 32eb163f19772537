import math

import pytest
from hypothesis import given, strategies as st

from camnav.geometry import PixelPoint, Pose2D, WorldPoint, angle_diff, wrap_angle

finite_angles = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


def brute_force_wrap(angle: float) -> float:
    """Independent oracle: repeated +/-2pi reduction."""
    while angle > math.pi:
        angle -= math.tau
    while angle <= -math.pi:
        angle += math.tau
    return angle


def test_wrap_identity():
    assert wrap_angle(0.0) == 0.0


def test_wrap_three_pi():
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)


def test_wrap_negative_three_and_a_half_pi():
    # oracle: -3.5*pi + 2*pi + 2*pi = 0.5*pi
    assert brute_force_wrap(-3.5 * math.pi) == pytest.approx(0.5 * math.pi)
    assert wrap_angle(-3.5 * math.pi) == pytest.approx(0.5 * math.pi)


def test_wrap_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            wrap_angle(bad)


def test_wrap_tie_break_positive_pi():
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(math.pi) == pytest.approx(math.pi)


@given(finite_angles)
def test_wrap_idempotent(angle):
    once = wrap_angle(angle)
    assert wrap_angle(once) == pytest.approx(once)


@given(finite_angles)
def test_wrap_range_and_congruence(angle):
    wrapped = wrap_angle(angle)
    assert -math.pi < wrapped <= math.pi
    # congruent modulo 2*pi (tolerance scales with the reduction size)
    assert math.remainder(wrapped - angle, math.tau) == pytest.approx(
        0.0, abs=1e-9 * max(1.0, abs(angle))
    )


def test_angle_diff_equal():
    assert angle_diff(math.pi / 2, math.pi / 2) == 0.0


def test_angle_diff_same_direction():
    assert angle_diff(math.pi, -math.pi) == pytest.approx(0.0)


def test_angle_diff_small():
    assert angle_diff(0.1, -0.1) == pytest.approx(0.2)


@given(finite_angles, finite_angles)
def test_angle_diff_bounded(a, b):
    assert abs(angle_diff(a, b)) <= math.pi


@given(
    st.floats(min_value=-100, max_value=100, allow_nan=False),
    st.floats(min_value=-100, max_value=100, allow_nan=False),
)
def test_angle_diff_antisymmetric_away_from_pi(a, b):
    d = angle_diff(a, b)
    if abs(abs(d) - math.pi) > 1e-9:
        assert angle_diff(b, a) == pytest.approx(-d, abs=1e-9)


def test_angle_diff_pi_tie_breaks_positive():
    assert angle_diff(math.pi, 0.0) == pytest.approx(math.pi)
    assert angle_diff(0.0, math.pi) == pytest.approx(math.pi)


def test_pose_normalizes_theta():
    pose = Pose2D(1.0, 2.0, 3 * math.pi)
    assert pose.theta == pytest.approx(math.pi)


def test_pose_rejects_non_finite():
    with pytest.raises(ValueError):
        Pose2D(math.nan, 0.0, 0.0)
    with pytest.raises(ValueError):
        Pose2D(0.0, 0.0, math.inf)


def test_world_point_rejects_non_finite():
    with pytest.raises(ValueError):
        WorldPoint(math.inf, 0.0)


def test_pixel_point_fractional_ok():
    p = PixelPoint(1.5, -2.25)
    assert p.u == 1.5 and p.v == -2.25


def test_world_point_distance():
    assert WorldPoint(0.0, 0.0).distance_to(WorldPoint(3.0, 4.0)) == pytest.approx(5.0)
