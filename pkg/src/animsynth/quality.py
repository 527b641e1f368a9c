"""Reference PSNR and SSIM on [0, 1] float images."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


def psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Peak signal-to-noise ratio in dB, peak value 1.0.

    ``mask`` restricts the evaluated pixels; identical inputs yield
    float('inf').
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    if mask is not None:
        sel = np.asarray(mask, dtype=bool)
        if sel.shape != a.shape[:2]:
            raise ValueError("mask dimensions differ from images")
        if not sel.any():
            raise ValueError("empty evaluation mask")
        diff = diff[sel] if a.ndim == 2 else diff[sel, :]
    flat = diff.ravel()
    mse = float(flat @ flat) / flat.size
    if mse == 0.0:
        return float("inf")
    return -10.0 * math.log10(mse)


def _ssim_window_kernel() -> np.ndarray:
    r = SSIM_WINDOW // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / SSIM_SIGMA) ** 2)
    return k / k.sum()


def _local_mean(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    out = correlate1d(img, k, axis=0, mode="reflect")
    out = correlate1d(out, k, axis=1, mode="reflect")
    r = SSIM_WINDOW // 2
    return out[r:-r, r:-r]  # keep valid window positions only


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Classic single-scale SSIM with an 11x11 Gaussian window, sigma 1.5.

    Multi-channel inputs are scored per channel and averaged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}px on each side")
    if a.ndim == 3:
        return float(np.mean([ssim(a[..., c], b[..., c]) for c in range(a.shape[2])]))

    k = _ssim_window_kernel()
    mu_a = _local_mean(a, k)
    mu_b = _local_mean(b, k)
    var_a = _local_mean(a * a, k) - mu_a * mu_a
    var_b = _local_mean(b * b, k) - mu_b * mu_b
    cov = _local_mean(a * b, k) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))
