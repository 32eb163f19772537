"""Positioning-side control logic: goal steering and trajectory tracking.

Goal steering is the two-step scheme: rotate in place until the heading
points at the goal, then drive forward, stopping inside the 0.1 m
acceptance radius. The tracker is a proportional regulator on the cross
track deviation of a reference point on the chassis nose; when the
deviation exceeds a threshold it falls back to a pure rotation toward the
track.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .controller import MotorCommand
from .geometry import Pose2D, WorldPoint, angle_diff


class TrackError(Exception):
    """Invalid track geometry."""


class NavPhase(enum.Enum):
    ALIGNING = "aligning"
    ADVANCING = "advancing"
    DONE = "done"


@dataclass(frozen=True)
class GoalSteerConfig:
    accept_radius: float = 0.1
    align_tolerance: float = 0.087
    turn_speed: float = 10.0
    forward_speed: float = 10.0

    def __post_init__(self) -> None:
        for name in ("accept_radius", "align_tolerance", "turn_speed", "forward_speed"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.align_tolerance >= math.pi / 2:
            raise ValueError("align_tolerance must be below pi/2")


@dataclass(frozen=True)
class TrackerConfig:
    """Tracker gains. control_offset is how far ahead of the axle (meters,
    body frame) the deviation reference point sits; it matches the nose
    marker and is what damps the deviation loop."""

    theta_d: float = 0.15
    v_m: float = 0.5
    kp_t: float = 70.0
    end_radius: float = 0.1
    control_offset: float = 0.08

    def __post_init__(self) -> None:
        for name in ("theta_d", "v_m", "kp_t", "end_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Track:
    """Sampled target trajectory; consecutive points must be distinct."""

    points: tuple[WorldPoint, ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise TrackError(f"track needs at least 2 points, got {len(self.points)}")
        for i in range(len(self.points) - 1):
            if (
                self.points[i].x == self.points[i + 1].x
                and self.points[i].y == self.points[i + 1].y
            ):
                raise TrackError(f"consecutive track points {i} and {i + 1} coincide")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def end(self) -> WorldPoint:
        return self.points[-1]


def bearing(origin: Pose2D | WorldPoint, target: WorldPoint) -> float:
    """World-frame direction angle from origin toward target."""
    return math.atan2(target.y - origin.y, target.x - origin.x)


def steer_step(
    pose: Pose2D, goal: WorldPoint, phase: NavPhase, cfg: GoalSteerConfig
) -> tuple[MotorCommand, NavPhase]:
    """One steering decision at the camera rate.

    Returns the wire command to send and the next phase. Advancing falls
    back to aligning if the bearing error drifts past twice the alignment
    tolerance.
    """
    distance = math.hypot(goal.x - pose.x, goal.y - pose.y)
    if distance < cfg.accept_radius:
        return MotorCommand.stop(), NavPhase.DONE
    if phase is NavPhase.DONE:
        return MotorCommand.stop(), NavPhase.DONE

    error = angle_diff(bearing(pose, goal), pose.theta)
    if phase is NavPhase.ADVANCING and abs(error) <= 2.0 * cfg.align_tolerance:
        return MotorCommand.forward(cfg.forward_speed), NavPhase.ADVANCING
    if abs(error) > cfg.align_tolerance:
        direction = 1 if error >= 0 else -1
        return MotorCommand.turn(direction, cfg.turn_speed), NavPhase.ALIGNING
    return MotorCommand.forward(cfg.forward_speed), NavPhase.ADVANCING


def nearest_track_point(
    pose_xy: WorldPoint, track: Track
) -> tuple[int, float, int]:
    """Nearest track sample to a point: (index, distance, side).

    Side is +1 when the point lies to the left of the track's direction of
    travel (or exactly on it), -1 to the right; the proportional term in
    the tracker then steers back toward the track.
    """
    points = track.points
    best_i = 0
    best_d2 = math.inf
    for i, p in enumerate(points):
        d2 = (p.x - pose_xy.x) ** 2 + (p.y - pose_xy.y) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best_i = i
    nearest = points[best_i]
    if best_i < len(points) - 1:
        tangent = (points[best_i + 1].x - nearest.x, points[best_i + 1].y - nearest.y)
    else:
        tangent = (nearest.x - points[best_i - 1].x, nearest.y - points[best_i - 1].y)
    cross = tangent[0] * (pose_xy.y - nearest.y) - tangent[1] * (pose_xy.x - nearest.x)
    delta = 1 if cross >= 0.0 else -1
    return best_i, math.sqrt(best_d2), delta


def tracker_speeds(
    delta_d: float, delta: int, cfg: TrackerConfig
) -> tuple[float, float]:
    """Wheel speeds for a given deviation and side.

    Proportional mode: u_right = v_m - delta*Kp*dev, u_left mirrored, so
    the speeds always sum to 2*v_m. Past the deviation threshold the
    speeds become an on-the-spot rotation back toward the track.
    """
    if delta_d > cfg.theta_d:
        return -delta * cfg.v_m, delta * cfg.v_m
    correction = delta * cfg.kp_t * delta_d
    return cfg.v_m - correction, cfg.v_m + correction


def control_point(pose: Pose2D, cfg: TrackerConfig) -> WorldPoint:
    """World position of the tracker's deviation reference point."""
    return WorldPoint(
        pose.x + cfg.control_offset * math.cos(pose.theta),
        pose.y + cfg.control_offset * math.sin(pose.theta),
    )


def tracker_step(pose: Pose2D, track: Track, cfg: TrackerConfig) -> MotorCommand:
    """One tracker decision at the camera rate."""
    if math.hypot(track.end.x - pose.x, track.end.y - pose.y) < cfg.end_radius:
        return MotorCommand.stop()
    ref = control_point(pose, cfg)
    _, delta_d, delta = nearest_track_point(ref, track)
    u_right, u_left = tracker_speeds(delta_d, delta, cfg)
    return MotorCommand.speed(u_right, u_left)


class SineKind(enum.Enum):
    HALF = "half"
    THREE_QUARTER = "three-quarter"
    FULL = "full"


_SINE_PERIODS = {
    SineKind.HALF: 0.5,
    SineKind.THREE_QUARTER: 0.75,
    SineKind.FULL: 1.0,
}


def gen_sine_track(
    kind: SineKind, amplitude: float, span: float, samples: int
) -> Track:
    """Sample a sine arc: y = A*sin(2*pi*p*x/span) for x uniform on [0, span]."""
    if samples < 2:
        raise TrackError(f"need at least 2 samples, got {samples}")
    if amplitude <= 0 or span <= 0:
        raise TrackError("amplitude and span must be positive")
    periods = _SINE_PERIODS[kind]
    points = []
    for k in range(samples):
        x = span * k / (samples - 1)
        points.append(WorldPoint(x, amplitude * math.sin(math.tau * periods * x / span)))
    return Track(points=tuple(points))


def load_track(text: str) -> Track:
    """Parse the track file format: one `X Y` pair per line, `#` comments."""
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected 'X Y', got {raw!r}")
        points.append(WorldPoint(float(fields[0]), float(fields[1])))
    return Track(points=tuple(points))


def dump_track(track: Track) -> str:
    return "".join(f"{p.x:.6g} {p.y:.6g}\n" for p in track.points)
