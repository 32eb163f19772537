"""Simulated overhead camera: marker rendering, segmentation, and pose recovery.

The camera looks straight down, so world-to-image is a pure scale and
offset: (u, v) = scale * (X - origin_x, Y - origin_y). Heading is carried
unchanged between the image plane and the world because the image plane is
parallel to the floor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PixelPoint, Pose2D, WorldPoint, wrap_angle


class MarkerNotDetectedError(Exception):
    """No pixels of the requested marker color were found."""


class DegenerateOrientationError(Exception):
    """Marker centroids coincide; heading is undefined."""


class MarkerColor(enum.Enum):
    GREEN = "green"
    ORANGE = "orange"


# Frame label values, also used as the serialized characters' index.
BACKGROUND = 0
GREEN = 1
ORANGE = 2

_LABEL_CHARS = ".go"
_COLOR_LABELS = {MarkerColor.GREEN: GREEN, MarkerColor.ORANGE: ORANGE}


@dataclass(frozen=True)
class CameraModel:
    """Pinhole parameters reduced to the identifiable quantities.

    scale is pixels-per-meter (focal length over mounting height);
    (origin_x, origin_y) is the world point that maps to pixel (0, 0).
    """

    scale: float
    origin_x: float
    origin_y: float
    image_width: int = 640
    image_height: int = 480

    def __post_init__(self) -> None:
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("scale must be positive and finite")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")


@dataclass(frozen=True)
class MarkerLayout:
    """Body-frame placement of the two colored discs on the chassis.

    Offsets are (x, y) meters in the robot frame (+x forward). The default
    puts orange at the nose and green at the tail, 0.16 m apart, which both
    fits the 0.3 m chassis and gives the heading estimate a wide baseline.
    """

    green_offset: tuple[float, float] = (-0.08, 0.0)
    orange_offset: tuple[float, float] = (0.08, 0.0)
    disc_radius: float = 0.02

    def __post_init__(self) -> None:
        if self.green_offset == self.orange_offset:
            raise ValueError("marker offsets must be distinct")
        if self.disc_radius <= 0:
            raise ValueError("disc_radius must be positive")


@dataclass(frozen=True)
class MarkerPixelSet:
    """Pixel coordinates segmented for one marker color.

    Coordinates are held as an (n, 2) float array of (u, v) rows for cheap
    centroid math; `pixels` materializes them as PixelPoint values.
    """

    coords: np.ndarray
    color: MarkerColor

    @property
    def pixels(self) -> list[PixelPoint]:
        return [PixelPoint(float(u), float(v)) for u, v in self.coords]

    def __len__(self) -> int:
        return int(self.coords.shape[0])


@dataclass(frozen=True)
class ImagePose:
    """Robot position and heading on the image plane."""

    position: PixelPoint
    azimuth: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuth", wrap_angle(self.azimuth))


@dataclass
class SyntheticFrame:
    """A rendered camera frame of categorical color labels.

    labels is a (height, width) uint8 array holding BACKGROUND, GREEN or
    ORANGE; row v, column u.
    """

    width: int
    height: int
    labels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.labels.shape != (self.height, self.width):
            raise ValueError(
                f"label grid shape {self.labels.shape} does not match "
                f"{self.height}x{self.width}"
            )


def project(camera: CameraModel, world: WorldPoint) -> PixelPoint:
    """Map a world point to image coordinates."""
    return PixelPoint(
        camera.scale * (world.x - camera.origin_x),
        camera.scale * (world.y - camera.origin_y),
    )


def unproject(camera: CameraModel, pixel: PixelPoint) -> WorldPoint:
    """Map image coordinates back to the world plane; exact inverse of project."""
    return WorldPoint(
        pixel.u / camera.scale + camera.origin_x,
        pixel.v / camera.scale + camera.origin_y,
    )


def centroid(markers: MarkerPixelSet) -> PixelPoint:
    """Arithmetic mean of all segmented pixel coordinates."""
    if len(markers) == 0:
        raise MarkerNotDetectedError(f"no {markers.color.value} pixels to average")
    mean = markers.coords.mean(axis=0)
    return PixelPoint(float(mean[0]), float(mean[1]))


def image_pose(green_c: PixelPoint, orange_c: PixelPoint) -> ImagePose:
    """Robot image-plane pose from the two marker centroids.

    Position is the midpoint of the centroids; heading is the direction of
    the green-to-orange (tail-to-nose) vector, full-quadrant so the robot
    may face any way.
    """
    du = orange_c.u - green_c.u
    dv = orange_c.v - green_c.v
    if du == 0.0 and dv == 0.0:
        raise DegenerateOrientationError("marker centroids coincide")
    position = PixelPoint((green_c.u + orange_c.u) / 2.0, (green_c.v + orange_c.v) / 2.0)
    return ImagePose(position=position, azimuth=wrap_angle(math.atan2(dv, du)))


def world_pose(camera: CameraModel, img: ImagePose) -> Pose2D:
    """Convert an image-plane pose to world coordinates.

    The heading passes through unchanged: the image plane is parallel to
    the floor, so angles are preserved.
    """
    position = unproject(camera, img.position)
    return Pose2D(position.x, position.y, img.azimuth)


def marker_world_centers(
    robot: Pose2D, layout: MarkerLayout
) -> tuple[WorldPoint, WorldPoint]:
    """World positions of the (green, orange) disc centers for a robot pose."""
    cos_t, sin_t = math.cos(robot.theta), math.sin(robot.theta)

    def body_to_world(offset: tuple[float, float]) -> WorldPoint:
        bx, by = offset
        return WorldPoint(
            robot.x + bx * cos_t - by * sin_t,
            robot.y + bx * sin_t + by * cos_t,
        )

    return body_to_world(layout.green_offset), body_to_world(layout.orange_offset)


def _rasterize_disc(labels: np.ndarray, cu: float, cv: float, radius: float, value: int) -> None:
    """Label every pixel whose integer-lattice center is within radius (inclusive)."""
    height, width = labels.shape
    u_lo = max(0, int(math.ceil(cu - radius)))
    u_hi = min(width - 1, int(math.floor(cu + radius)))
    v_lo = max(0, int(math.ceil(cv - radius)))
    v_hi = min(height - 1, int(math.floor(cv + radius)))
    if u_lo > u_hi or v_lo > v_hi:
        return
    us = np.arange(u_lo, u_hi + 1, dtype=np.float64)
    vs = np.arange(v_lo, v_hi + 1, dtype=np.float64)
    mask = (us[None, :] - cu) ** 2 + (vs[:, None] - cv) ** 2 <= radius * radius
    labels[v_lo : v_hi + 1, u_lo : u_hi + 1][mask] = value


def render_markers(
    camera: CameraModel,
    robot: Pose2D,
    layout: MarkerLayout,
    pixel_noise_std: float = 0.0,
    seed: int | np.random.Generator = 0,
) -> SyntheticFrame:
    """Render both marker discs into a fresh frame.

    Each disc center gets an independent Gaussian jitter of the given
    standard deviation (pixels); the jitter stream is driven entirely by
    `seed`, which may also be an existing Generator so a caller can keep
    one deterministic stream across frames. Discs that fall partly or
    fully outside the frame are clipped.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    labels = np.zeros((camera.image_height, camera.image_width), dtype=np.uint8)
    radius_px = layout.disc_radius * camera.scale
    green_w, orange_w = marker_world_centers(robot, layout)
    for world, value in ((green_w, GREEN), (orange_w, ORANGE)):
        center = project(camera, world)
        jitter = rng.normal(0.0, pixel_noise_std, size=2) if pixel_noise_std > 0 else (0.0, 0.0)
        _rasterize_disc(labels, center.u + jitter[0], center.v + jitter[1], radius_px, value)
    return SyntheticFrame(width=camera.image_width, height=camera.image_height, labels=labels)


def _labeled_pixels(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices and label values of all non-background pixels.

    Frames are almost entirely background, so scan them eight bytes at a
    time through a uint64 view instead of materializing a boolean mask.
    """
    flat = np.ascontiguousarray(labels).reshape(-1)
    n_words = flat.size // 8
    hits = []
    if n_words:
        words = flat[: n_words * 8].view(np.uint64)
        word_idx = np.flatnonzero(words)
        if word_idx.size:
            candidates = (word_idx[:, None] * 8 + np.arange(8)).reshape(-1)
            hits.append(candidates[flat[candidates] != 0])
    tail = np.flatnonzero(flat[n_words * 8 :])
    if tail.size:
        hits.append(tail + n_words * 8)
    if not hits:
        return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.uint8)
    idx = np.concatenate(hits) if len(hits) > 1 else hits[0]
    return idx, flat[idx]


def _coords_from_flat(idx: np.ndarray, width: int) -> np.ndarray:
    vs, us = np.divmod(idx, width)
    return np.stack([us, vs], axis=1).astype(np.float64)


def segment_color(frame: SyntheticFrame, color: MarkerColor) -> MarkerPixelSet:
    """Collect every pixel labeled with the requested color."""
    idx, values = _labeled_pixels(frame.labels)
    sel = idx[values == _COLOR_LABELS[color]]
    if sel.size == 0:
        raise MarkerNotDetectedError(f"no {color.value} pixels in frame")
    return MarkerPixelSet(coords=_coords_from_flat(sel, frame.width), color=color)


def frame_to_text(frame: SyntheticFrame) -> str:
    """Serialize a frame to the portable text format used for golden tests.

    First line is `<width> <height>`; each following line is one pixel row
    of label characters ('.', 'g', 'o').
    """
    lut = np.frombuffer(_LABEL_CHARS.encode(), dtype=np.uint8)
    rows = lut[frame.labels]
    body = "\n".join(row.tobytes().decode() for row in rows)
    return f"{frame.width} {frame.height}\n{body}\n"


def frame_from_text(text: str) -> SyntheticFrame:
    """Parse the textual frame format produced by frame_to_text."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty frame text")
    try:
        width, height = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad frame header {lines[0]!r}") from exc
    if len(lines) != height + 1:
        raise ValueError(f"expected {height} pixel rows, got {len(lines) - 1}")
    labels = np.zeros((height, width), dtype=np.uint8)
    for v, line in enumerate(lines[1:]):
        if len(line) != width:
            raise ValueError(f"row {v} has {len(line)} columns, expected {width}")
        row = np.frombuffer(line.encode(), dtype=np.uint8)
        for value, char in enumerate(_LABEL_CHARS):
            labels[v][row == ord(char)] = value
        unknown = ~np.isin(row, np.frombuffer(_LABEL_CHARS.encode(), dtype=np.uint8))
        if unknown.any():
            raise ValueError(f"row {v} contains unknown label characters")
    return SyntheticFrame(width=width, height=height, labels=labels)


def estimate_pose(camera: CameraModel, frame: SyntheticFrame) -> Pose2D:
    """Full vision pipeline: segment both markers and recover the world pose.

    Equivalent to segment_color + centroid per color followed by
    image_pose/world_pose, sharing one frame scan.
    """
    idx, values = _labeled_pixels(frame.labels)
    centroids = {}
    for color, label in _COLOR_LABELS.items():
        sel = idx[values == label]
        if sel.size == 0:
            raise MarkerNotDetectedError(f"no {color.value} pixels in frame")
        mean = _coords_from_flat(sel, frame.width).mean(axis=0)
        centroids[color] = PixelPoint(float(mean[0]), float(mean[1]))
    return world_pose(
        camera, image_pose(centroids[MarkerColor.GREEN], centroids[MarkerColor.ORANGE])
    )
