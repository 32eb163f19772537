import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from camnav.geometry import PixelPoint, Pose2D, WorldPoint
from camnav.vision import (
    BACKGROUND,
    GREEN,
    ORANGE,
    CameraModel,
    DegenerateOrientationError,
    MarkerColor,
    MarkerLayout,
    MarkerNotDetectedError,
    MarkerPixelSet,
    SyntheticFrame,
    centroid,
    estimate_pose,
    frame_from_text,
    frame_to_text,
    image_pose,
    marker_world_centers,
    project,
    render_markers,
    segment_color,
    unproject,
    world_pose,
)

CAM = CameraModel(scale=200.0, origin_x=1.0, origin_y=2.0)


def make_set(points, color=MarkerColor.GREEN):
    return MarkerPixelSet(coords=np.array(points, dtype=float), color=color)


class TestProjection:
    def test_origin_maps_to_pixel_origin(self):
        p = project(CAM, WorldPoint(1.0, 2.0))
        assert (p.u, p.v) == (0.0, 0.0)

    def test_forward_example(self):
        p = project(CAM, WorldPoint(1.5, 2.25))
        assert (p.u, p.v) == pytest.approx((100.0, 50.0))

    def test_negative_side(self):
        p = project(CAM, WorldPoint(0.5, 2.0))
        assert (p.u, p.v) == pytest.approx((-100.0, 0.0))

    def test_unproject_origin(self):
        w = unproject(CAM, PixelPoint(0.0, 0.0))
        assert (w.x, w.y) == pytest.approx((1.0, 2.0))

    def test_unproject_example(self):
        w = unproject(CAM, PixelPoint(100.0, 50.0))
        assert (w.x, w.y) == pytest.approx((1.5, 2.25))

    def test_round_trip_100_random_points(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            w = WorldPoint(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)))
            back = unproject(CAM, project(CAM, w))
            assert abs(back.x - w.x) < 1e-9
            assert abs(back.y - w.y) < 1e-9

    def test_camera_validation(self):
        with pytest.raises(ValueError):
            CameraModel(scale=-1.0, origin_x=0.0, origin_y=0.0)
        with pytest.raises(ValueError):
            CameraModel(scale=100.0, origin_x=0.0, origin_y=0.0, image_width=0)


class TestCentroid:
    def test_single_point(self):
        assert centroid(make_set([(10, 20)])) == PixelPoint(10.0, 20.0)

    def test_three_points(self):
        # oracle: sums 36/72 over 3 points
        c = centroid(make_set([(10, 20), (12, 24), (14, 28)]))
        assert (c.u, c.v) == pytest.approx((12.0, 24.0))

    def test_empty_raises(self):
        empty = MarkerPixelSet(coords=np.empty((0, 2)), color=MarkerColor.ORANGE)
        with pytest.raises(MarkerNotDetectedError):
            centroid(empty)

    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=0, max_value=640),
                st.floats(min_value=0, max_value=480),
            ),
            min_size=1,
            max_size=30,
        ),
        st.tuples(
            st.floats(min_value=-50, max_value=50),
            st.floats(min_value=-50, max_value=50),
        ),
    )
    def test_translation_equivariance(self, points, offset):
        base = centroid(make_set(points))
        shifted = centroid(make_set([(u + offset[0], v + offset[1]) for u, v in points]))
        assert shifted.u == pytest.approx(base.u + offset[0], abs=1e-6)
        assert shifted.v == pytest.approx(base.v + offset[1], abs=1e-6)


class TestImagePose:
    # The heading is the tail-to-nose direction measured counterclockwise
    # from the +u axis, matching the world heading convention, so a
    # vertical centroid pair reads pi/2 and a horizontal one reads 0.
    def test_vertical_pair(self):
        pose = image_pose(PixelPoint(100, 100), PixelPoint(100, 140))
        assert (pose.position.u, pose.position.v) == pytest.approx((100.0, 120.0))
        assert pose.azimuth == pytest.approx(math.pi / 2)

    def test_horizontal_pair(self):
        pose = image_pose(PixelPoint(100, 100), PixelPoint(140, 100))
        assert (pose.position.u, pose.position.v) == pytest.approx((120.0, 100.0))
        assert pose.azimuth == pytest.approx(0.0)

    def test_coincident_raises(self):
        with pytest.raises(DegenerateOrientationError):
            image_pose(PixelPoint(0, 0), PixelPoint(0, 0))

    @given(
        st.floats(min_value=-200, max_value=200),
        st.floats(min_value=-200, max_value=200),
    )
    def test_translation_invariance(self, du, dv):
        g, o = PixelPoint(10.0, 20.0), PixelPoint(40.0, 50.0)
        base = image_pose(g, o).azimuth
        moved = image_pose(
            PixelPoint(g.u + du, g.v + dv), PixelPoint(o.u + du, o.v + dv)
        ).azimuth
        assert moved == pytest.approx(base, abs=1e-9)


class TestWorldPose:
    def test_origin_case(self):
        pose = world_pose(CAM, image_pose(PixelPoint(-10, 0), PixelPoint(10, 0)))
        assert (pose.x, pose.y) == pytest.approx((1.0, 2.0))

    def test_unproject_example_passthrough(self):
        from camnav.vision import ImagePose

        pose = world_pose(CAM, ImagePose(PixelPoint(100, 50), -1.0))
        assert (pose.x, pose.y, pose.theta) == pytest.approx((1.5, 2.25, -1.0))

    def test_theta_passthrough_50_random(self):
        rng = np.random.default_rng(7)
        from camnav.vision import ImagePose

        for _ in range(50):
            cam = CameraModel(
                scale=float(rng.uniform(50, 400)),
                origin_x=float(rng.uniform(-3, 3)),
                origin_y=float(rng.uniform(-3, 3)),
            )
            azimuth = float(rng.uniform(-math.pi + 1e-9, math.pi))
            img = ImagePose(
                PixelPoint(float(rng.uniform(0, 640)), float(rng.uniform(0, 480))),
                azimuth,
            )
            assert world_pose(cam, img).theta == azimuth


class TestRender:
    # Camera placed so that the robot at the world origin projects to the
    # center of the frame; discs then land at center +/- offset*scale.
    CAM_CENTERED = CameraModel(scale=200.0, origin_x=-320 / 200.0, origin_y=-240 / 200.0)
    LAYOUT = MarkerLayout(green_offset=(-0.05, 0.0), orange_offset=(0.05, 0.0))

    def test_disc_centers_by_hand_projection(self):
        frame = render_markers(self.CAM_CENTERED, Pose2D(0, 0, 0), self.LAYOUT)
        green_c = centroid(segment_color(frame, MarkerColor.GREEN))
        orange_c = centroid(segment_color(frame, MarkerColor.ORANGE))
        # hand projection: center (320,240); offsets +/-0.05 m * 200 px/m = 10 px
        assert (green_c.u, green_c.v) == pytest.approx((310.0, 240.0), abs=0.5)
        assert (orange_c.u, orange_c.v) == pytest.approx((330.0, 240.0), abs=0.5)

    def test_determinism_same_seed(self):
        a = render_markers(self.CAM_CENTERED, Pose2D(0.3, -0.2, 1.0), self.LAYOUT, 2.0, seed=9)
        b = render_markers(self.CAM_CENTERED, Pose2D(0.3, -0.2, 1.0), self.LAYOUT, 2.0, seed=9)
        assert np.array_equal(a.labels, b.labels)

    def test_robot_outside_view_renders_empty(self):
        frame = render_markers(self.CAM_CENTERED, Pose2D(50.0, 50.0, 0.0), self.LAYOUT)
        assert not frame.labels.any()
        with pytest.raises(MarkerNotDetectedError):
            segment_color(frame, MarkerColor.GREEN)

    def test_noiseless_segmentation_centroid_within_half_pixel(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pose = Pose2D(
                float(rng.uniform(-0.5, 0.5)),
                float(rng.uniform(-0.5, 0.5)),
                float(rng.uniform(-math.pi + 1e-6, math.pi)),
            )
            frame = render_markers(self.CAM_CENTERED, pose, self.LAYOUT)
            green_w, orange_w = marker_world_centers(pose, self.LAYOUT)
            for color, world in (
                (MarkerColor.GREEN, green_w),
                (MarkerColor.ORANGE, orange_w),
            ):
                c = centroid(segment_color(frame, color))
                expected = project(self.CAM_CENTERED, world)
                assert math.hypot(c.u - expected.u, c.v - expected.v) < 0.5


class TestSegment:
    def test_single_pixel(self):
        labels = np.zeros((10, 10), dtype=np.uint8)
        labels[7, 5] = GREEN
        frame = SyntheticFrame(10, 10, labels)
        found = segment_color(frame, MarkerColor.GREEN)
        assert len(found) == 1
        assert found.pixels[0] == PixelPoint(5.0, 7.0)

    def test_missing_color_raises(self):
        labels = np.zeros((4, 4), dtype=np.uint8)
        labels[0, 0] = GREEN
        frame = SyntheticFrame(4, 4, labels)
        with pytest.raises(MarkerNotDetectedError):
            segment_color(frame, MarkerColor.ORANGE)


class TestPipeline:
    def test_full_pipeline_recovers_pose(self):
        # noiseless render -> segment -> centroid -> image pose -> world pose
        cam = CameraModel(scale=160.0, origin_x=-2.0, origin_y=-1.5)
        layout = MarkerLayout()
        rng = np.random.default_rng(11)
        for _ in range(50):
            pose = Pose2D(
                float(rng.uniform(-1.5, 1.5)),
                float(rng.uniform(-1.0, 1.0)),
                float(rng.uniform(-math.pi + 1e-6, math.pi)),
            )
            est = estimate_pose(cam, render_markers(cam, pose, layout))
            assert math.hypot(est.x - pose.x, est.y - pose.y) < 1.5 / cam.scale
            assert abs(math.remainder(est.theta - pose.theta, math.tau)) < 0.05

    def test_rotating_by_pi_flips_azimuth(self):
        cam = TestRender.CAM_CENTERED
        layout = MarkerLayout()
        a = estimate_pose(cam, render_markers(cam, Pose2D(0, 0, 0.4), layout))
        b = estimate_pose(cam, render_markers(cam, Pose2D(0, 0, 0.4 + math.pi), layout))
        assert abs(math.remainder(b.theta - a.theta - math.pi, math.tau)) < 0.05


class TestFrameText:
    def test_round_trip(self):
        frame = render_markers(TestRender.CAM_CENTERED, Pose2D(0, 0, 0.7), MarkerLayout())
        again = frame_from_text(frame_to_text(frame))
        assert again.width == frame.width and again.height == frame.height
        assert np.array_equal(again.labels, frame.labels)

    def test_format_shape(self):
        labels = np.zeros((2, 3), dtype=np.uint8)
        labels[0, 1] = GREEN
        labels[1, 2] = ORANGE
        text = frame_to_text(SyntheticFrame(3, 2, labels))
        assert text == "3 2\n.g.\n..o\n"

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError):
            frame_from_text("nonsense\n..\n")

    def test_unknown_char_rejected(self):
        with pytest.raises(ValueError):
            frame_from_text("2 1\n.x\n")


def test_marker_layout_validation():
    with pytest.raises(ValueError):
        MarkerLayout(green_offset=(0.1, 0.0), orange_offset=(0.1, 0.0))
    with pytest.raises(ValueError):
        MarkerLayout(disc_radius=0.0)
