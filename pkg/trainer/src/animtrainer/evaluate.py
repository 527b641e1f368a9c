"""Holdout evaluation: model vs the repeat-first-frame baseline."""

from __future__ import annotations

import os

import numpy as np
import torch

from animtrainer.data import load_triplets
from animtrainer.metrics import psnr
from animtrainer.model import ToyInterpolator


def _predict(model: ToyInterpolator, i1: np.ndarray, i3: np.ndarray) -> np.ndarray:
    to_tensor = lambda a: torch.from_numpy(a.transpose(2, 0, 1)[None]).float()
    with torch.no_grad():
        out = model(to_tensor(i1), to_tensor(i3))
    return out[0].numpy().transpose(1, 2, 0).astype(np.float64)


def eval_baseline(
    manifest_path: str | os.PathLike,
    holdout_ids: list[int],
    model: ToyInterpolator | None = None,
) -> dict:
    """PSNR table over the holdout entries.

    Each row reports the repeat-first-frame baseline PSNR(I1, I2) and,
    when a model is given, PSNR(model(I1, I3), I2).  Identical frames
    produce the float('inf') sentinel.
    """
    if not holdout_ids:
        raise ValueError("holdout is empty")
    triplets = load_triplets(manifest_path, entry_ids=set(holdout_ids))
    if model is not None:
        model.eval()
    rows = []
    for t in sorted(triplets, key=lambda t: t.entry_id):
        row = {"id": t.entry_id, "baseline_db": psnr(t.i1, t.i2)}
        if model is not None:
            row["model_db"] = psnr(_predict(model, t.i1, t.i3), t.i2)
        rows.append(row)
    table = {"rows": rows, "mean_baseline_db": float(np.mean([r["baseline_db"] for r in rows]))}
    if model is not None:
        table["mean_model_db"] = float(np.mean([r["model_db"] for r in rows]))
    return table
