"""Planar geometry primitives shared by every other module.

Conventions: world x/y in meters, headings in radians measured
counterclockwise from the +X axis and always normalized to (-pi, pi].
Pixel coordinates are (u, v) with u horizontal and v vertical; centroids
make them fractional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def wrap_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi].

    Exactly -pi maps to +pi so the representation is unique.
    Raises ValueError on non-finite input.
    """
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle!r}")
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


def angle_diff(a: float, b: float) -> float:
    """Smallest signed rotation taking heading b onto heading a.

    Result lies in (-pi, pi]; positive means counterclockwise.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("angles must be finite")
    return wrap_angle(a - b)


@dataclass(frozen=True)
class Pose2D:
    """Robot state: position in meters, heading in radians.

    The heading is normalized to (-pi, pi] at construction.
    """

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose coordinates must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def position(self) -> "WorldPoint":
        return WorldPoint(self.x, self.y)


@dataclass(frozen=True)
class WorldPoint:
    """A point on the floor plane, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("world coordinates must be finite")

    def distance_to(self, other: "WorldPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class PixelPoint:
    """An image-plane point in pixels; fractional values are fine."""

    u: float
    v: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError("pixel coordinates must be finite")
