"""Random homographies and their dense optical-flow fields.

Conventions used throughout the package:

* pixel centers sit at (col + 0.5, row + 0.5)
* flow is stored as an (H, W, 2) float64 array with (u, v) = (+right, +down)
* homographies are 3x3 row-major matrices normalized so m[2][2] == 1
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DET_EPS = 1e-8
DENOM_EPS = 1e-8
MAX_RESAMPLE = 16


class DegenerateTransformError(ValueError):
    """Raised when a homography is (near-)singular on the canvas."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval low {self.lo} > high {self.hi}")

    def sample(self, rng: np.random.Generator) -> float:
        if self.lo == self.hi:
            return self.lo
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class MotionRanges:
    """Sampling ranges for the four motion factors of a homography.

    ``translation`` is a fraction of the relevant canvas dimension;
    ``rotation`` is in degrees; ``perspective`` bounds the two projective
    entries of the matrix and must stay within +-0.01 to keep the
    transform non-degenerate on the canvas.
    """

    scale: Interval = Interval(0.85, 1.15)
    rotation: Interval = Interval(-12.0, 12.0)
    translation: Interval = Interval(-0.06, 0.06)
    perspective: Interval = Interval(-0.0005, 0.0005)

    def __post_init__(self):
        if max(abs(self.perspective.lo), abs(self.perspective.hi)) > 0.01:
            raise ValueError("perspective magnitude must be <= 0.01")

    def halved(self) -> "MotionRanges":
        """Gentler ranges (used for the background layer)."""

        def half(iv: Interval, center: float) -> Interval:
            return Interval(center + (iv.lo - center) / 2, center + (iv.hi - center) / 2)

        return MotionRanges(
            scale=half(self.scale, 1.0),
            rotation=half(self.rotation, 0.0),
            translation=half(self.translation, 0.0),
            perspective=half(self.perspective, 0.0),
        )

    @staticmethod
    def identity() -> "MotionRanges":
        return MotionRanges(Interval(1, 1), Interval(0, 0), Interval(0, 0), Interval(0, 0))


def normalize_homography(m: np.ndarray) -> np.ndarray:
    """Scale a 3x3 matrix so m[2][2] == 1, validating invertibility."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"expected 3x3 matrix, got {m.shape}")
    if abs(m[2, 2]) < DENOM_EPS:
        raise DegenerateTransformError("m[2][2] is (near) zero")
    m = m / m[2, 2]
    if abs(np.linalg.det(m)) <= DET_EPS:
        raise DegenerateTransformError("homography is (near) singular")
    return m


def _compose(scale, rot_deg, tx, ty, p1, p2, cx, cy) -> np.ndarray:
    """translate . rotate . scale . perspective, anchored at (cx, cy)."""
    th = np.deg2rad(rot_deg)
    c, s = np.cos(th), np.sin(th)
    T = np.array([[1, 0, tx], [0, 1, ty], [0, 0, 1]], dtype=np.float64)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)
    S = np.array([[scale, 0, 0], [0, scale, 0], [0, 0, 1]], dtype=np.float64)
    P = np.array([[1, 0, 0], [0, 1, 0], [p1, p2, 1]], dtype=np.float64)
    C = np.array([[1, 0, cx], [0, 1, cy], [0, 0, 1]], dtype=np.float64)
    Ci = np.array([[1, 0, -cx], [0, 1, -cy], [0, 0, 1]], dtype=np.float64)
    return C @ T @ R @ S @ P @ Ci


def sample_homography(
    rng: np.random.Generator, ranges: MotionRanges, width: int, height: int
) -> np.ndarray:
    """Sample a random homography with motion anchored at the canvas center.

    Translation fractions are converted to pixels of the respective
    dimension.  Deterministic given the generator state; resamples up to
    MAX_RESAMPLE times if the composition degenerates.
    """
    cx, cy = width / 2.0, height / 2.0
    last_err = None
    for _ in range(MAX_RESAMPLE):
        scale = ranges.scale.sample(rng)
        rot = ranges.rotation.sample(rng)
        tx = ranges.translation.sample(rng) * width
        ty = ranges.translation.sample(rng) * height
        p1 = ranges.perspective.sample(rng)
        p2 = ranges.perspective.sample(rng)
        try:
            return normalize_homography(_compose(scale, rot, tx, ty, p1, p2, cx, cy))
        except DegenerateTransformError as err:
            last_err = err
    raise DegenerateTransformError(f"no valid homography in {MAX_RESAMPLE} draws: {last_err}")


def pixel_centers(width: int, height: int) -> np.ndarray:
    """(H, W, 2) array of pixel-center coordinates (x, y)."""
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx, gy], axis=-1)


def homography_to_flow(h: np.ndarray, width: int, height: int) -> np.ndarray:
    """Dense flow of a homography: f(p) = H(x(p)) - x(p) at every pixel center."""
    if width < 1 or height < 1:
        raise ValueError("canvas must be at least 1x1")
    h = normalize_homography(h)
    pts = pixel_centers(width, height)
    x, y = pts[..., 0], pts[..., 1]
    w = h[2, 0] * x + h[2, 1] * y + h[2, 2]
    if np.any(np.abs(w) < DENOM_EPS):
        raise DegenerateTransformError("projective denominator vanishes on canvas")
    u = (h[0, 0] * x + h[0, 1] * y + h[0, 2]) / w - x
    v = (h[1, 0] * x + h[1, 1] * y + h[1, 2]) / w - y
    return np.stack([u, v], axis=-1)


def double_flow(f12: np.ndarray) -> np.ndarray:
    """The linear-motion constraint: frame-1-to-3 flow is exactly 2x f12."""
    return np.asarray(f12, dtype=np.float64) * 2.0
