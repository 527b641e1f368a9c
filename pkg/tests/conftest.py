import numpy as np
import pytest
from PIL import Image


def make_cartoon(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """Flat-colored blobs over a soft gradient, vaguely cel-shaded."""
    gx = np.linspace(0.0, 1.0, width)
    gy = np.linspace(0.0, 1.0, height)
    img = np.empty((height, width, 3))
    base = rng.uniform(0.25, 0.75, 3)
    img[:] = base
    img += 0.2 * gx[None, :, None] * rng.uniform(-1, 1, 3)
    img += 0.2 * gy[:, None, None] * rng.uniform(-1, 1, 3)
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(8):
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        r = rng.uniform(0.03, 0.12) * min(width, height)
        blob = (xx - cx) ** 2 + (yy - cy) ** 2 < r * r
        img[blob] = rng.uniform(0.05, 0.95, 3)
    return np.clip(img, 0.0, 1.0)


@pytest.fixture(scope="session")
def source_dir(tmp_path_factory):
    """Directory of synthetic stills large enough for 512x384 + margins."""
    root = tmp_path_factory.mktemp("stills")
    rng = np.random.default_rng(1234)
    for i in range(6):
        arr = make_cartoon(rng, 760, 920)
        Image.fromarray((arr * 255).round().astype(np.uint8)).save(root / f"still_{i}.png")
    return root
