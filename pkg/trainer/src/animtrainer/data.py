"""Reading triplet datasets through their on-disk interface.

A dataset directory contains ``manifest.json`` plus, per entry, the
files named in the entry's ``paths`` map.  Only the three RGB frames
are needed here; they decode to float arrays in [0, 1].
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

log = logging.getLogger(__name__)

SUPPORTED_VERSION = "animsynth/1"
MAX_SKIP_FRACTION = 0.01


@dataclass
class Triplet:
    entry_id: int
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray


def load_manifest(manifest_path: str | os.PathLike) -> dict:
    path = Path(manifest_path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != SUPPORTED_VERSION:
        raise ValueError(f"unsupported manifest version: {doc.get('version')!r}")
    if not isinstance(doc.get("entries"), list):
        raise ValueError("manifest has no entry list")
    return doc


def _decode_frame(path: Path) -> np.ndarray:
    img = Image.open(path)
    arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return arr


def load_triplets(
    manifest_path: str | os.PathLike,
    seed: int | None = None,
    entry_ids: set[int] | None = None,
) -> list[Triplet]:
    """Decode the frame triplets listed in the manifest.

    Missing or corrupt files are skipped with a warning; more than
    MAX_SKIP_FRACTION of the requested entries failing is an error.
    With a ``seed`` the returned order is a deterministic shuffle,
    otherwise manifest order.
    """
    path = Path(manifest_path)
    root = path.parent
    doc = load_manifest(path)
    wanted = [
        e for e in doc["entries"]
        if entry_ids is None or e["id"] in entry_ids
    ]
    triplets: list[Triplet] = []
    skipped = 0
    for entry in wanted:
        try:
            frames = [
                _decode_frame(root / entry["paths"][key]) for key in ("i1", "i2", "i3")
            ]
        except (OSError, KeyError, SyntaxError) as err:
            log.warning("skipping entry %s: %s", entry.get("id"), err)
            skipped += 1
            continue
        if not (frames[0].shape == frames[1].shape == frames[2].shape):
            log.warning("skipping entry %s: frame shapes differ", entry.get("id"))
            skipped += 1
            continue
        triplets.append(Triplet(entry["id"], *frames))
    if wanted and skipped / len(wanted) > MAX_SKIP_FRACTION:
        raise RuntimeError(
            f"{skipped}/{len(wanted)} entries unreadable, above the "
            f"{MAX_SKIP_FRACTION:.0%} tolerance"
        )
    if seed is not None:
        order = np.random.default_rng(seed).permutation(len(triplets))
        triplets = [triplets[i] for i in order]
    return triplets


def split_holdout(
    manifest_path: str | os.PathLike, holdout_count: int, seed: int
) -> tuple[list[int], list[int]]:
    """Deterministically split entry ids into disjoint (train, holdout)."""
    doc = load_manifest(manifest_path)
    ids = [e["id"] for e in doc["entries"]]
    if holdout_count <= 0 or holdout_count >= len(ids):
        raise ValueError(f"holdout_count must be in (0, {len(ids)})")
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    return sorted(shuffled[holdout_count:]), sorted(shuffled[:holdout_count])
