"""Random convex polygon masks and the magnitude-adaptive Gaussian blur.

Masks are (H, W) float64 arrays with values in [0, 1]; they are exactly
binary until a blur is applied.  Polygons are (N, 2) float64 arrays of
(x, y) canvas coordinates in counter-clockwise order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from animsynth.geometry import Interval

MAX_RESAMPLE = 16


class PolygonError(ValueError):
    pass


@dataclass(frozen=True)
class MaskParams:
    sides: tuple[int, int] = (3, 12)
    radius: Interval = Interval(0.05, 0.25)  # fraction of min canvas dimension
    hole_probability: float = 0.3
    hole_scale: Interval = Interval(0.2, 0.5)

    def __post_init__(self):
        if self.sides[0] < 3 or self.sides[0] > self.sides[1]:
            raise ValueError(f"invalid sides interval {self.sides}")
        if not (0 < self.radius.lo and self.radius.hi <= 0.5):
            raise ValueError("radius must lie in (0, 0.5]")
        if not 0 <= self.hole_probability <= 1:
            raise ValueError("hole_probability must be in [0, 1]")


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; hull with positive consecutive-edge cross."""
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]
    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                a, b = out[-1] - out[-2], p - out[-2]
                if a[0] * b[1] - a[1] * b[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out
    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def polygon_is_convex_ccw(vertices: np.ndarray) -> bool:
    """Consecutive-edge cross products all >= 0 (CCW in coordinate sense)."""
    v = np.asarray(vertices, dtype=np.float64)
    if len(v) < 3:
        return False
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool(np.all(cross >= 0) and np.any(cross > 0))


def sample_convex_polygon(
    rng: np.random.Generator,
    params: MaskParams,
    width: int,
    height: int,
    center: tuple[float, float] | None = None,
    radius_px: float | None = None,
) -> np.ndarray:
    """Random convex polygon: sorted random angles around a random center,
    random radii, then the convex hull of the resulting points.

    ``center``/``radius_px`` override the random placement (used when
    nesting a hole polygon inside an outer one).
    """
    rmin = min(width, height)
    for _ in range(MAX_RESAMPLE):
        n = int(rng.integers(params.sides[0], params.sides[1] + 1))
        if center is None:
            r_hi = params.radius.hi * rmin
            cx = rng.uniform(r_hi, width - r_hi) if width > 2 * r_hi else width / 2
            cy = rng.uniform(r_hi, height - r_hi) if height > 2 * r_hi else height / 2
        else:
            cx, cy = center
        angles = np.sort(rng.uniform(0.0, 2 * np.pi, size=n))
        if radius_px is None:
            radii = rng.uniform(params.radius.lo, params.radius.hi, size=n) * rmin
        else:
            radii = rng.uniform(0.6, 1.0, size=n) * radius_px
        pts = np.stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)], axis=-1)
        hull = _convex_hull(pts)
        if len(hull) >= 3 and polygon_is_convex_ccw(hull):
            return hull
    raise PolygonError(f"degenerate polygon after {MAX_RESAMPLE} attempts")


def rasterize_polygon(vertices: np.ndarray, width: int, height: int) -> np.ndarray:
    """Binary coverage mask: 1 where the pixel center is inside the polygon.

    Boundary handling follows a half-open rule: a center exactly on an
    edge counts as inside only for top/left edges, so abutting polygons
    tile without double coverage.
    """
    v = np.asarray(vertices, dtype=np.float64)
    if not polygon_is_convex_ccw(v):
        raise PolygonError("polygon must be convex with CCW winding")
    pts_x = np.arange(width, dtype=np.float64) + 0.5
    pts_y = np.arange(height, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(pts_x, pts_y)
    inside = np.ones((height, width), dtype=bool)
    nv = len(v)
    for i in range(nv):
        ax, ay = v[i]
        bx, by = v[(i + 1) % nv]
        # Positive-cross winding keeps the interior on the coordinate-left
        # of each edge, so the edge function is > 0 strictly inside.
        # Half-open: centers on a top edge (dy==0, dx>0) or a left edge
        # (dy<0) still count as covered.
        e = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        top_left = (by < ay) or (by == ay and bx > ax)
        inside &= (e > 0) | ((e == 0) & top_left)
        if not inside.any():
            break
    return inside.astype(np.float64)


def punch_hole(mask: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Zero out the hole polygon's pixels (same rasterization rule)."""
    h, w = mask.shape
    hole_mask = rasterize_polygon(hole, w, h)
    out = mask.copy()
    out[hole_mask > 0] = 0.0
    return out


def blur_sigma(mask: np.ndarray, flow: np.ndarray, alpha: float) -> float:
    """Adaptive blur strength from the mean flow magnitude over the mask.

    sigma = ln(sum(M * |F|) / (sum(M) * alpha)), clamped below at zero.
    An empty mask needs no blur and returns 0.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if mask.shape != flow.shape[:2]:
        raise ValueError("mask and flow dimensions differ")
    support = float(mask.sum())
    if support == 0.0:
        return 0.0
    mag = np.sqrt(flow[..., 0] ** 2 + flow[..., 1] ** 2)
    delta = np.log(float((mask * mag).sum()) / (support * alpha))
    return max(delta, 0.0)


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(image: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with kernel radius ceil(3*sigma), reflect padding.

    Works on (H, W) or (H, W, C) arrays; sigma == 0 returns a copy.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    img = np.asarray(image, dtype=np.float64)
    if sigma == 0.0:
        return img.copy()
    k = gaussian_kernel(sigma)
    out = correlate1d(img, k, axis=0, mode="reflect")
    out = correlate1d(out, k, axis=1, mode="reflect")
    return out
