"""Forward warping by average splatting, plus bilinear backward warping.

Images are (H, W) or (H, W, C) float64 arrays; flow is (H, W, 2) with
(u, v) in pixels.  Forward warping scatters each source pixel onto the
four integer pixels surrounding its displaced position with bilinear
weights, accumulates value*weight and weight, and divides.  Target
pixels that accumulate less than HOLE_EPS weight are holes and output 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HOLE_EPS = 1e-6


@dataclass
class WarpResult:
    image: np.ndarray   # same shape as source, holes filled with 0
    weight: np.ndarray  # (H, W) accumulated splat weight
    holes: np.ndarray   # (H, W) bool, True where weight < HOLE_EPS


def _check_dims(src: np.ndarray, flow: np.ndarray) -> None:
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    if src.shape[:2] != flow.shape[:2]:
        raise ValueError(f"image {src.shape[:2]} and flow {flow.shape[:2]} dimensions differ")


def forward_warp_average(src: np.ndarray, flow: np.ndarray) -> WarpResult:
    """Average-mode splatting of ``src`` along ``flow``.

    Each source pixel center lands at center + flow; its value and a unit
    weight are distributed bilinearly over the 4 neighboring pixels.
    Contributions falling outside the canvas are discarded.
    """
    src = np.asarray(src, dtype=np.float64)
    flow = np.asarray(flow, dtype=np.float64)
    _check_dims(src, flow)
    h, w = src.shape[:2]
    squeeze = src.ndim == 2
    vals = src.reshape(h, w, -1)
    nc = vals.shape[2]

    # displaced positions, expressed on the integer pixel grid:
    # center (col+0.5, row+0.5) + flow, minus the 0.5 center offset
    cols, rows = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    tx = (cols + flow[..., 0]).ravel()
    ty = (rows + flow[..., 1]).ravel()

    x0 = np.floor(tx)
    y0 = np.floor(ty)
    fx = tx - x0
    fy = ty - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    flat_vals = vals.reshape(h * w, nc)
    # out-of-canvas contributions are routed to a discard bin at h*w
    dump = h * w
    idx_parts = []
    wgt_parts = []
    for dx, dy, wgt in (
        (0, 0, (1 - fx) * (1 - fy)),
        (1, 0, fx * (1 - fy)),
        (0, 1, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        xi = x0 + dx
        yi = y0 + dy
        idx = yi * w + xi
        idx[(xi < 0) | (xi >= w) | (yi < 0) | (yi >= h)] = dump
        idx_parts.append(idx)
        wgt_parts.append(wgt)
    idx = np.concatenate(idx_parts)
    wgt = np.concatenate(wgt_parts)
    acc_w = np.bincount(idx, weights=wgt, minlength=dump + 1)[:dump]
    acc_v = np.empty((dump, nc), dtype=np.float64)
    for c in range(nc):
        val4 = np.tile(flat_vals[:, c], 4)
        acc_v[:, c] = np.bincount(idx, weights=wgt * val4, minlength=dump + 1)[:dump]

    holes = acc_w < HOLE_EPS
    out = np.zeros_like(acc_v)
    np.divide(acc_v, acc_w[:, None], out=out, where=~holes[:, None])
    image = out.reshape(h, w, nc)
    if squeeze:
        image = image[..., 0]
    return WarpResult(image=image, weight=acc_w.reshape(h, w), holes=holes.reshape(h, w))


def backward_warp_bilinear(src: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """Bilinear gather: output(p) = src sampled at p + flow(p).

    Out-of-bounds samples clamp to the edge pixel.
    """
    src = np.asarray(src, dtype=np.float64)
    flow = np.asarray(flow, dtype=np.float64)
    _check_dims(src, flow)
    h, w = src.shape[:2]
    squeeze = src.ndim == 2
    vals = src.reshape(h, w, -1)

    cols, rows = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    sx = cols + flow[..., 0]
    sy = rows + flow[..., 1]

    x0f = np.floor(sx)
    y0f = np.floor(sy)
    fx = (sx - x0f)[..., None]
    fy = (sy - y0f)[..., None]
    # clamp both taps independently so off-canvas samples stick to the edge
    x0 = np.clip(x0f.astype(np.int64), 0, w - 1)
    y0 = np.clip(y0f.astype(np.int64), 0, h - 1)
    x1 = np.clip(x0f.astype(np.int64) + 1, 0, w - 1)
    y1 = np.clip(y0f.astype(np.int64) + 1, 0, h - 1)

    out = (
        vals[y0, x0] * (1 - fx) * (1 - fy)
        + vals[y0, x1] * fx * (1 - fy)
        + vals[y1, x0] * (1 - fx) * fy
        + vals[y1, x1] * fx * fy
    )
    if squeeze:
        out = out[..., 0]
    return out
