"""Training loop for the toy interpolator."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from animtrainer.data import Triplet, load_triplets, split_holdout
from animtrainer.model import ToyInterpolator

MIN_TRAIN_TRIPLETS = 256


@dataclass
class TrainRun:
    manifest_path: str
    out_dir: str
    steps: int = 1500
    crop_size: int = 128
    batch_size: int = 4
    learning_rate: float = 1e-3
    seed: int = 0
    holdout_count: int = 32
    log_every: int = 100

    def __post_init__(self):
        if self.steps <= 0:
            raise ValueError("steps must be positive")
        if self.crop_size < 16:
            raise ValueError("crop_size must be at least 16")
        if self.holdout_count <= 0:
            raise ValueError("holdout_count must be positive")


@dataclass
class TrainResult:
    model: ToyInterpolator
    losses: list[tuple[int, float]]
    checkpoint_path: Path
    log_path: Path
    train_ids: list[int] = field(default_factory=list)
    holdout_ids: list[int] = field(default_factory=list)


def _random_crop(rng: np.random.Generator, t: Triplet, size: int):
    h, w = t.i1.shape[:2]
    if h < size or w < size:
        raise ValueError(f"entry {t.entry_id}: frames {w}x{h} smaller than crop {size}")
    y = int(rng.integers(0, h - size + 1))
    x = int(rng.integers(0, w - size + 1))
    box = (slice(y, y + size), slice(x, x + size))
    return t.i1[box], t.i2[box], t.i3[box]


def _batch(rng: np.random.Generator, triplets: list[Triplet], run: TrainRun):
    picks = rng.integers(0, len(triplets), size=run.batch_size)
    crops = [_random_crop(rng, triplets[i], run.crop_size) for i in picks]
    stacks = [
        torch.from_numpy(np.stack([c[j] for c in crops]).transpose(0, 3, 1, 2)).float()
        for j in range(3)
    ]
    return stacks  # [i1, i2, i3] as (B, 3, S, S)


def train_toy(run: TrainRun) -> TrainResult:
    """Train the toy interpolator; returns the model, loss log and file paths.

    Deterministic for a given seed up to framework tolerance (single
    process, seeded torch and numpy generators).
    """
    train_ids, holdout_ids = split_holdout(
        run.manifest_path, run.holdout_count, run.seed
    )
    triplets = load_triplets(run.manifest_path, seed=run.seed, entry_ids=set(train_ids))
    if len(triplets) < MIN_TRAIN_TRIPLETS:
        raise ValueError(
            f"need at least {MIN_TRAIN_TRIPLETS} training triplets, got {len(triplets)}"
        )

    torch.manual_seed(run.seed)
    rng = np.random.default_rng(run.seed)
    model = ToyInterpolator()
    optimizer = torch.optim.Adam(model.parameters(), lr=run.learning_rate)

    losses: list[tuple[int, float]] = []
    model.train()
    for step in range(1, run.steps + 1):
        i1, i2, i3 = _batch(rng, triplets, run)
        optimizer.zero_grad()
        pred = model(i1, i3)
        loss = (pred - i2).abs().mean()
        value = float(loss.detach())
        if not math.isfinite(value):
            raise RuntimeError(
                f"non-finite loss {value} at step {step} "
                f"(lr={run.learning_rate}, batch={run.batch_size})"
            )
        loss.backward()
        optimizer.step()
        if step == 1 or step % run.log_every == 0 or step == run.steps:
            losses.append((step, value))

    out_dir = Path(run.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint_path = out_dir / "checkpoint.pt"
    torch.save(model.state_dict(), checkpoint_path)
    log_path = out_dir / "train_log.json"
    log_path.write_text(json.dumps({
        "steps": run.steps,
        "crop_size": run.crop_size,
        "batch_size": run.batch_size,
        "learning_rate": run.learning_rate,
        "seed": run.seed,
        "train_entries": len(triplets),
        "holdout_ids": holdout_ids,
        "losses": [{"step": s, "l1": v} for s, v in losses],
    }, indent=2))
    return TrainResult(
        model=model,
        losses=losses,
        checkpoint_path=checkpoint_path,
        log_path=log_path,
        train_ids=train_ids,
        holdout_ids=holdout_ids,
    )


def load_checkpoint(path: str | os.PathLike) -> ToyInterpolator:
    model = ToyInterpolator()
    model.load_state_dict(torch.load(path, weights_only=True))
    model.eval()
    return model
