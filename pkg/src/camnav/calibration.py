"""Camera parameter estimation from world/pixel point correspondences.

The measurement model u = s*(X - Cx), v = s*(Y - Cy) is bilinear in the
unknowns, but substituting a = s*Cx, b = s*Cy makes it linear:

    u_i = s*X_i - a
    v_i = s*Y_i - b

so a single least-squares solve over (s, a, b) handles any number of
points >= 2 and absorbs pixel noise. Cx, Cy are recovered by dividing out
the fitted scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import PixelPoint, WorldPoint
from .vision import CameraModel


class CalibrationError(Exception):
    """Base class for calibration failures."""


class TooFewPointsError(CalibrationError):
    """Fewer than two usable correspondences."""


class DegenerateGeometryError(CalibrationError):
    """The world points do not constrain the parameters (singular system)."""


class NegativeScaleError(CalibrationError):
    """The fitted pixels-per-meter scale came out non-positive."""


@dataclass(frozen=True)
class CalibrationSet:
    """World/pixel correspondence pairs gathered from known floor positions."""

    pairs: tuple[tuple[WorldPoint, PixelPoint], ...]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class CalibrationResult:
    """Fitted camera parameters plus the residual RMS in pixels."""

    scale: float
    origin_x: float
    origin_y: float
    residual_rms: float

    def camera(self, image_width: int = 640, image_height: int = 480) -> CameraModel:
        return CameraModel(
            scale=self.scale,
            origin_x=self.origin_x,
            origin_y=self.origin_y,
            image_width=image_width,
            image_height=image_height,
        )


_PIVOT_RTOL = 1e-12


def _solve3(m: list[list[float]], rhs: list[float]) -> list[float]:
    """Gaussian elimination with partial pivoting for a 3x3 system.

    Raises DegenerateGeometryError when a pivot is singular relative to the
    largest matrix entry.
    """
    a = [row[:] + [r] for row, r in zip(m, rhs)]
    scale_ref = max(abs(v) for row in m for v in row)
    if scale_ref == 0.0:
        raise DegenerateGeometryError("zero normal matrix")
    for col in range(3):
        pivot_row = max(range(col, 3), key=lambda r: abs(a[r][col]))
        if abs(a[pivot_row][col]) <= _PIVOT_RTOL * scale_ref:
            raise DegenerateGeometryError("normal matrix is singular")
        a[col], a[pivot_row] = a[pivot_row], a[col]
        for r in range(col + 1, 3):
            factor = a[r][col] / a[col][col]
            for c in range(col, 4):
                a[r][c] -= factor * a[col][c]
    x = [0.0, 0.0, 0.0]
    for row in range(2, -1, -1):
        acc = a[row][3] - sum(a[row][c] * x[c] for c in range(row + 1, 3))
        x[row] = acc / a[row][row]
    return x


def calibrate(cal_set: CalibrationSet) -> CalibrationResult:
    """Fit (scale, origin) to the correspondences by linear least squares."""
    pairs = cal_set.pairs
    if len(pairs) < 2:
        raise TooFewPointsError(f"need at least 2 pairs, got {len(pairs)}")
    worlds = {(w.x, w.y) for w, _ in pairs}
    if len(worlds) < 2:
        raise TooFewPointsError("world points must not all coincide")

    # Normal equations for rows [X, -1, 0] -> u and [Y, 0, -1] -> v over
    # unknowns (s, a, b).
    sxx = sum(w.x * w.x + w.y * w.y for w, _ in pairs)
    sx = sum(w.x for w, _ in pairs)
    sy = sum(w.y for w, _ in pairs)
    n = float(len(pairs))
    rhs0 = sum(w.x * p.u + w.y * p.v for w, p in pairs)
    rhs1 = -sum(p.u for _, p in pairs)
    rhs2 = -sum(p.v for _, p in pairs)
    normal = [
        [sxx, -sx, -sy],
        [-sx, n, 0.0],
        [-sy, 0.0, n],
    ]
    s, a, b = _solve3(normal, [rhs0, rhs1, rhs2])
    if s <= 0.0:
        raise NegativeScaleError(f"fitted scale {s!r} is not positive")

    sq_sum = 0.0
    for w, p in pairs:
        sq_sum += (s * w.x - a - p.u) ** 2 + (s * w.y - b - p.v) ** 2
    rms = math.sqrt(sq_sum / (2.0 * len(pairs)))
    return CalibrationResult(scale=s, origin_x=a / s, origin_y=b / s, residual_rms=rms)


def load_pairs(text: str) -> CalibrationSet:
    """Parse the calibration file format: `X Y u v` per line, `#` comments."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"line {lineno}: expected 'X Y u v', got {raw!r}")
        try:
            x, y, u, v = (float(f) for f in fields)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-numeric field in {raw!r}") from exc
        pairs.append((WorldPoint(x, y), PixelPoint(u, v)))
    return CalibrationSet(pairs=tuple(pairs))
