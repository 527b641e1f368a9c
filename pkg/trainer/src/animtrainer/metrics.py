"""PSNR on [0, 1] float images, matching the dataset toolchain's definition."""

from __future__ import annotations

import math

import numpy as np


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB with peak value 1.0.

    The mean squared error uses a single dot product so results agree
    bit-for-bit with the generator's metrics module; identical inputs
    return float('inf').
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    flat = (a - b).ravel()
    mse = float(flat @ flat) / flat.size
    if mse == 0.0:
        return float("inf")
    return -10.0 * math.log10(mse)
