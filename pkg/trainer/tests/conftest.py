"""Shared fixtures: datasets produced by the generator's CLI.

The trainer only understands the on-disk dataset format, so fixtures
build real datasets by invoking the ``animsynth`` command line.
"""

import subprocess
import sys

import numpy as np
import pytest
from PIL import Image


def make_cartoon(rng, height, width):
    """Gradient backdrop with flat-colored blobs, cartoon-like."""
    yy, xx = np.mgrid[0:height, 0:width]
    base = np.stack([
        0.25 + 0.5 * xx / width,
        0.25 + 0.5 * yy / height,
        0.5 + 0.3 * np.sin(2 * np.pi * (xx + yy) / (width * 0.7)),
    ], axis=-1)
    for _ in range(24):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        r = rng.uniform(8, min(height, width) / 4)
        color = rng.uniform(0.05, 0.95, 3)
        blob = (yy - cy) ** 2 + (xx - cx) ** 2 < r ** 2
        base[blob] = color
    return np.clip(base, 0.0, 1.0)


@pytest.fixture(scope="session")
def source_stills(tmp_path_factory):
    root = tmp_path_factory.mktemp("stills")
    rng = np.random.default_rng(77)
    for i in range(6):
        arr = (make_cartoon(rng, 420, 460) * 255).round().astype(np.uint8)
        Image.fromarray(arr).save(root / f"s{i}.png")
    return root


def generate_dataset_cli(out_dir, source_dir, count, seed, width, height):
    config = out_dir / "config.json"
    config.write_text(
        '{"canvas": {"width": %d, "height": %d}, "count": %d, '
        '"global_seed": %d, "source_dir": "%s"}'
        % (width, height, count, seed, source_dir)
    )
    subprocess.run(
        [sys.executable, "-m", "animsynth.cli", "generate",
         "--config", str(config), "--out", str(out_dir)],
        check=True, capture_output=True, text=True,
    )
    return out_dir / "manifest.json"


@pytest.fixture(scope="session")
def small_manifest(source_stills, tmp_path_factory):
    out = tmp_path_factory.mktemp("small_ds")
    return generate_dataset_cli(out, source_stills, count=10, seed=3, width=64, height=64)


@pytest.fixture(scope="session")
def train_manifest(source_stills, tmp_path_factory):
    """The [toy-trainer] evaluation dataset: 1000 triplets at 128x128."""
    out = tmp_path_factory.mktemp("train_ds")
    return generate_dataset_cli(out, source_stills, count=1000, seed=11, width=128, height=128)
