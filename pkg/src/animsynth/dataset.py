"""Dataset generation, serialization and validation.

A dataset directory holds, per entry id:

    {id:06d}_i1.png / _i2.png / _i3.png    8-bit RGB frames
    {id:06d}_f12.flo / _f13.flo            ground-truth flow
    {id:06d}_occ2.png / _occ3.png          occlusion maps (0 or 255)
    {id:06d}_holes2.png / _holes3.png      splat-hole maps (all zero on a
                                           valid dataset)

plus manifest.json tying everything together.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from animsynth.compose import (
    ImageStore,
    LayerSpec,
    RenderError,
    SceneSpec,
    Triplet,
    forward_warp_average,
)
from animsynth.config import GenConfig
from animsynth.flo import FloFormatError, read_flo, write_flo
from animsynth.geometry import sample_homography
from animsynth.quality import psnr

MANIFEST_VERSION = "animsynth/1"
MANIFEST_NAME = "manifest.json"
PHOTO_CONSISTENCY_DB = 35.0

_FILE_KEYS = (
    "i1", "i2", "i3", "f12", "f13",
    "occ2", "occ3", "holes2", "holes3", "own2", "own3",
)
_SUFFIX = {
    "i1": "_i1.png", "i2": "_i2.png", "i3": "_i3.png",
    "f12": "_f12.flo", "f13": "_f13.flo",
    "occ2": "_occ2.png", "occ3": "_occ3.png",
    "holes2": "_holes2.png", "holes3": "_holes3.png",
    "own2": "_own2.png", "own3": "_own3.png",
}

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


class DirectoryStore(ImageStore):
    """Flat directory of still images, resolved by filename."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"source directory not found: {self.root}")
        self.names = sorted(
            p.name for p in self.root.iterdir()
            if p.suffix.lower() in IMAGE_EXTENSIONS
        )
        if not self.names:
            raise FileNotFoundError(f"no images in source directory: {self.root}")

    def load(self, ref: str) -> np.ndarray:
        img = PILImage.open(self.root / ref).convert("RGB")
        return np.asarray(img, dtype=np.float64) / 255.0


def quantize(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.clip(img, 0.0, 1.0) * 255.0), 0, 255).astype(np.uint8)


def _save_png(path: Path, arr: np.ndarray) -> None:
    PILImage.fromarray(arr).save(path, format="PNG")


def _load_png(path: Path) -> np.ndarray:
    return np.asarray(PILImage.open(path), dtype=np.float64) / 255.0


def write_triplet(t: Triplet, directory: str | os.PathLike, entry_id: int) -> dict[str, str]:
    """Persist one triplet; returns relative paths keyed by file role."""
    directory = Path(directory)
    prefix = f"{entry_id:06d}"
    paths = {key: prefix + _SUFFIX[key] for key in _FILE_KEYS}
    _save_png(directory / paths["i1"], quantize(t.i1))
    _save_png(directory / paths["i2"], quantize(t.i2))
    _save_png(directory / paths["i3"], quantize(t.i3))
    with open(directory / paths["f12"], "wb") as fh:
        write_flo(t.f12, fh)
    with open(directory / paths["f13"], "wb") as fh:
        write_flo(t.f13, fh)
    for key, arr in (
        ("occ2", t.occlusion2), ("occ3", t.occlusion3),
        ("holes2", t.holes2), ("holes3", t.holes3),
    ):
        _save_png(directory / paths[key], (np.asarray(arr, dtype=np.uint8) * 255))
    # flow-selection owner indices, one gray level per layer
    _save_png(directory / paths["own2"], t.owner2.astype(np.uint8))
    _save_png(directory / paths["own3"], t.owner3.astype(np.uint8))
    return paths


@dataclass
class DatasetManifest:
    version: str
    global_seed: int
    config_digest: str
    width: int
    height: int
    entries: list[dict] = field(default_factory=list)
    config: dict | None = None

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "global_seed": self.global_seed,
            "config_digest": self.config_digest,
            "canvas": {"width": self.width, "height": self.height},
            "entries": self.entries,
            "config": self.config,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "DatasetManifest":
        doc = json.loads(text)
        return DatasetManifest(
            version=doc["version"],
            global_seed=doc["global_seed"],
            config_digest=doc["config_digest"],
            width=doc["canvas"]["width"],
            height=doc["canvas"]["height"],
            entries=doc["entries"],
            config=doc.get("config"),
        )

    @staticmethod
    def load(directory: str | os.PathLike) -> "DatasetManifest":
        return DatasetManifest.from_json((Path(directory) / MANIFEST_NAME).read_text())


def triplet_subseed(global_seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{global_seed}/{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def build_scene_spec(config: GenConfig, store_names: list[str], index: int) -> SceneSpec:
    """Deterministically derive one scene from the global seed and index."""
    seed = triplet_subseed(config.global_seed, index)
    rng = np.random.default_rng(seed)
    k_total = int(rng.integers(config.layer_count[0], config.layer_count[1] + 1))
    bg_ref = store_names[int(rng.integers(len(store_names)))]
    bg_h = sample_homography(rng, config.effective_background_motion(), config.width, config.height)
    layers = []
    for _ in range(k_total - 1):
        ref = store_names[int(rng.integers(len(store_names)))]
        hom = sample_homography(rng, config.motion, config.width, config.height)
        layers.append(LayerSpec(image_ref=ref, homography=hom))
    return SceneSpec(
        seed=seed,
        width=config.width,
        height=config.height,
        background_ref=bg_ref,
        background_homography=bg_h,
        layers=tuple(layers),
        mask_params=config.mask_params,
        alpha=config.alpha,
        source_margin=config.source_margin,
        flow_mask_anchor=config.flow_mask_anchor,
    )


def _render_job(args) -> tuple[int, dict | None, str | None]:
    config_json, source_dir, index, outdir = args
    config = GenConfig.from_json(config_json)
    store = DirectoryStore(source_dir)
    spec = build_scene_spec(config, store.names, index)
    from animsynth.compose import render_triplet

    try:
        triplet = render_triplet(spec, store)
    except RenderError as err:
        return index, None, str(err)
    paths = write_triplet(triplet, outdir, index)
    entry = {
        "id": index,
        "paths": paths,
        "spec_digest": triplet.spec_digest,
        "stats": triplet.stats,
    }
    return index, entry, None


def generate_dataset(
    config: GenConfig,
    count: int,
    outdir: str | os.PathLike,
    jobs: int = 1,
    progress=None,
) -> DatasetManifest:
    """Render ``count`` triplets into ``outdir`` and write the manifest.

    Per-triplet sub-seeds are hashes of (global_seed, index), so output
    bytes are independent of ``jobs`` and scheduling.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    store = DirectoryStore(config.source_dir)  # fail early on an empty store

    args = [(config.to_json(), config.source_dir, i, str(outdir)) for i in range(count)]
    results: list[tuple[int, dict | None, str | None]] = []
    if jobs > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_render_job, args):
                results.append(res)
                if progress:
                    progress(res[0])
    else:
        for a in args:
            res = _render_job(a)
            results.append(res)
            if progress:
                progress(res[0])

    entries = [entry for _, entry, _ in sorted(results) if entry is not None]
    failures = [(i, err) for i, _, err in sorted(results) if err is not None]
    manifest = DatasetManifest(
        version=MANIFEST_VERSION,
        global_seed=config.global_seed,
        config_digest=config.digest(),
        width=config.width,
        height=config.height,
        entries=entries,
        config=config.to_dict(),
    )
    suffix = ".partial" if failures else ""
    (outdir / (MANIFEST_NAME + suffix)).write_text(manifest.to_json())
    if failures:
        (outdir / "failures.json").write_text(json.dumps(
            [{"id": i, "error": e} for i, e in failures], indent=2))
    _ = store
    return manifest


def load_entry_arrays(directory: Path, entry: dict) -> dict[str, np.ndarray]:
    p = entry["paths"]
    out = {}
    for key in ("i1", "i2", "i3"):
        out[key] = _load_png(directory / p[key])
    for key in ("f12", "f13"):
        with open(directory / p[key], "rb") as fh:
            out[key] = read_flo(fh)
    for key in ("occ2", "occ3", "holes2", "holes3"):
        out[key] = _load_png(directory / p[key]) > 0.5
    for key in ("own2", "own3"):
        out[key] = np.asarray(PILImage.open(directory / p[key]), dtype=np.int64)
    return out


def check_photo_consistency(arrays: dict[str, np.ndarray]) -> float:
    """PSNR of forward-warped I1 against I2, excluding flagged pixels."""
    res = forward_warp_average(arrays["i1"], arrays["f12"].astype(np.float64))
    valid = ~(arrays["occ2"] | arrays["holes2"] | res.holes)
    if not valid.any():
        return float("inf")
    return psnr(res.image, arrays["i2"], mask=valid)


def validate_dataset(directory: str | os.PathLike, strict: bool = False) -> dict:
    """Integrity report: files, .flo structure, flow doubling, and (in
    strict mode) photo-consistency PSNR."""
    directory = Path(directory)
    report = {
        "checks": {
            "manifest": {"pass": 0, "fail": 0},
            "files_exist": {"pass": 0, "fail": 0},
            "flo_format": {"pass": 0, "fail": 0},
            "flow_doubling": {"pass": 0, "fail": 0},
            "holes_empty": {"pass": 0, "fail": 0},
        },
        "failures": [],
        "ok": True,
    }
    if strict:
        report["checks"]["photo_consistency"] = {"pass": 0, "fail": 0}
        report["photo_consistency_db"] = []

    try:
        manifest = DatasetManifest.load(directory)
        if manifest.version != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {manifest.version!r}")
        ids = [e["id"] for e in manifest.entries]
        if ids != list(range(len(ids))):
            raise ValueError("entry ids are not dense 0..N-1")
        report["checks"]["manifest"]["pass"] += 1
    except (OSError, ValueError, KeyError) as err:
        report["checks"]["manifest"]["fail"] += 1
        report["failures"].append({"check": "manifest", "error": str(err)})
        report["ok"] = False
        return report

    for entry in manifest.entries:
        eid = entry["id"]
        missing = [k for k, rel in entry["paths"].items() if not (directory / rel).exists()]
        if missing:
            report["checks"]["files_exist"]["fail"] += 1
            report["failures"].append({"check": "files_exist", "id": eid, "missing": missing})
            continue
        report["checks"]["files_exist"]["pass"] += 1

        try:
            arrays = load_entry_arrays(directory, entry)
            report["checks"]["flo_format"]["pass"] += 1
        except (FloFormatError, OSError) as err:
            report["checks"]["flo_format"]["fail"] += 1
            report["failures"].append({"check": "flo_format", "id": eid, "error": str(err)})
            continue

        f12, f13 = arrays["f12"], arrays["f13"]
        doubled = (f13 == 2.0 * f12).all(axis=-1)
        agree = _owner_agreement(arrays)
        violations = int((~doubled & agree).sum())
        if violations:
            report["checks"]["flow_doubling"]["fail"] += 1
            report["failures"].append({"check": "flow_doubling", "id": eid, "pixels": violations})
        else:
            report["checks"]["flow_doubling"]["pass"] += 1

        if arrays["holes2"].any() or arrays["holes3"].any():
            report["checks"]["holes_empty"]["fail"] += 1
            report["failures"].append({"check": "holes_empty", "id": eid})
        else:
            report["checks"]["holes_empty"]["pass"] += 1

        if strict:
            db = check_photo_consistency(arrays)
            report["photo_consistency_db"].append(db)
            if db >= PHOTO_CONSISTENCY_DB:
                report["checks"]["photo_consistency"]["pass"] += 1
            else:
                report["checks"]["photo_consistency"]["fail"] += 1
                report["failures"].append(
                    {"check": "photo_consistency", "id": eid, "psnr_db": db})

    report["ok"] = all(c["fail"] == 0 for c in report["checks"].values())
    return report


def _owner_agreement(arrays: dict[str, np.ndarray]) -> np.ndarray:
    """Pixels where the stored flow-selection owner agrees between frames."""
    return arrays["own2"] == arrays["own3"]
