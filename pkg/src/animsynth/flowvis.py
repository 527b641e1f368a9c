"""Optical-flow visualization with the standard Middlebury color wheel."""

from __future__ import annotations

import numpy as np

# steps between the wheel's anchor hues
_RY, _YG, _GC, _CB, _BM, _MR = 15, 6, 4, 11, 13, 6


def color_wheel() -> np.ndarray:
    """(55, 3) RGB wheel in [0, 1], red at angle 0, advancing clockwise."""
    total = _RY + _YG + _GC + _CB + _BM + _MR
    wheel = np.zeros((total, 3))
    i = 0
    for span, ch_full, ch_ramp, down in (
        (_RY, 0, 1, False),
        (_YG, 1, 0, True),
        (_GC, 1, 2, False),
        (_CB, 2, 1, True),
        (_BM, 2, 0, False),
        (_MR, 0, 2, True),
    ):
        ramp = np.arange(span) / span
        wheel[i:i + span, ch_full] = 1.0
        wheel[i:i + span, ch_ramp] = 1.0 - ramp if down else ramp
        i += span
    return wheel


def flow_to_rgb(flow: np.ndarray, max_magnitude: float | None = None) -> np.ndarray:
    """Map an (H, W, 2) flow field to an (H, W, 3) RGB image in [0, 1].

    Hue encodes direction, saturation magnitude; magnitudes are
    normalized by ``max_magnitude`` (default: the field's own maximum).
    Zero flow renders white.
    """
    flow = np.asarray(flow, dtype=np.float64)
    u, v = flow[..., 0], flow[..., 1]
    mag = np.sqrt(u * u + v * v)
    if max_magnitude is None:
        max_magnitude = float(mag.max())
    norm = mag / max_magnitude if max_magnitude > 0 else mag

    wheel = color_wheel()
    n = len(wheel)
    angle = np.arctan2(-v, -u) / np.pi  # in [-1, 1]
    fk = (angle + 1.0) / 2.0 * (n - 1)
    k0 = np.floor(fk).astype(np.int64) % n
    k1 = (k0 + 1) % n
    f = (fk - np.floor(fk))[..., None]
    col = (1 - f) * wheel[k0] + f * wheel[k1]
    # desaturate toward white for small magnitudes
    return 1.0 - norm[..., None] * (1.0 - col)
