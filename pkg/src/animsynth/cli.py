"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 usage/environment error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from animsynth.config import GenConfig
from animsynth.dataset import (
    MANIFEST_NAME,
    DatasetManifest,
    generate_dataset,
    load_entry_arrays,
    validate_dataset,
)
from animsynth.flowvis import flow_to_rgb


def _load_config(path: str | None) -> GenConfig:
    if path is None:
        return GenConfig()
    return GenConfig.from_json(Path(path).read_text())


def _default_jobs(args_jobs: int | None) -> int:
    if args_jobs is not None:
        return args_jobs
    env = os.environ.get("ANIMSYNTH_JOBS")
    if env:
        return max(1, int(env))
    return 1


def cmd_generate(args) -> int:
    try:
        config = _load_config(args.config)
    except (OSError, ValueError, KeyError) as err:
        print(f"error: bad config: {err}", file=sys.stderr)
        return 2
    overrides = {}
    if args.count is not None:
        overrides["count"] = args.count
    if args.seed is not None:
        overrides["global_seed"] = args.seed
    if args.source_dir is not None:
        overrides["source_dir"] = args.source_dir
    if overrides:
        config = GenConfig.from_dict({**config.to_dict(), **overrides})
    if not config.source_dir or not Path(config.source_dir).is_dir():
        print(f"error: source_dir not found: {config.source_dir!r}", file=sys.stderr)
        return 2

    started = time.monotonic()
    done = [0]

    def progress(_idx):
        done[0] += 1
        if done[0] % 10 == 0 or done[0] == config.count:
            print(f"rendered {done[0]}/{config.count}", file=sys.stderr)

    try:
        manifest = generate_dataset(
            config, config.count, args.out, jobs=_default_jobs(args.jobs), progress=progress
        )
    except (OSError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    elapsed = time.monotonic() - started
    failed = config.count - len(manifest.entries)
    print(f"generated={len(manifest.entries)} failed={failed} elapsed={elapsed:.1f}s")
    print(str(Path(args.out) / MANIFEST_NAME))
    return 0 if failed == 0 else 1


def cmd_validate(args) -> int:
    directory = Path(args.dir)
    if not (directory / MANIFEST_NAME).exists():
        print(f"error: no manifest in {directory}", file=sys.stderr)
        return 2
    report = validate_dataset(directory, strict=args.strict)
    report_path = directory / "validation_report.json"
    report_path.write_text(json.dumps(report, indent=2))
    for name, counts in report["checks"].items():
        print(f"{name}: pass={counts['pass']} fail={counts['fail']}")
    print(str(report_path))
    return 0 if report["ok"] else 1


def cmd_preview(args) -> int:
    from PIL import Image as PILImage

    directory = Path(args.dir)
    try:
        manifest = DatasetManifest.load(directory)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    matching = [e for e in manifest.entries if e["id"] == args.id]
    if not matching:
        print(f"error: no entry with id {args.id}", file=sys.stderr)
        return 2
    arrays = load_entry_arrays(directory, matching[0])
    flow_rgb = flow_to_rgb(arrays["f12"].astype(np.float64))
    occ = arrays["occ2"].astype(np.float64)
    overlay = arrays["i2"].copy()
    overlay[occ > 0.5] = [1.0, 0.0, 0.0]
    strip = np.concatenate(
        [arrays["i1"], arrays["i2"], arrays["i3"], flow_rgb, overlay], axis=1
    )
    PILImage.fromarray((np.clip(strip, 0, 1) * 255).round().astype(np.uint8)).save(args.out)
    print(args.out)
    return 0


def cmd_stats(args) -> int:
    directory = Path(args.dir)
    try:
        manifest = DatasetManifest.load(directory)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    stats_rows = [e.get("stats", {}) for e in manifest.entries]
    mean_flow = [s.get("mean_flow_magnitude", 0.0) for s in stats_rows]
    areas = [s.get("mask_area_fraction", 0.0) for s in stats_rows]
    layers = [s.get("layer_count", 0) for s in stats_rows]
    sigmas = [sig for s in stats_rows for sig in s.get("blur_sigmas", [])]
    summary = {
        "entries": len(manifest.entries),
        "mean_flow_magnitude": float(np.mean(mean_flow)) if mean_flow else 0.0,
        "mask_area_fraction": float(np.mean(areas)) if areas else 0.0,
        "layer_counts": {str(k): layers.count(k) for k in sorted(set(layers))},
        "blur_sigma_mean": float(np.mean(sigmas)) if sigmas else 0.0,
        "blur_sigma_max": float(np.max(sigmas)) if sigmas else 0.0,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="animsynth",
        description="Render deterministic frame-interpolation training triplets.",
    )
    parser.add_argument(
        "--print-default-config", action="store_true",
        help="print the full default configuration as JSON and exit",
    )
    sub = parser.add_subparsers(dest="command")

    gen = sub.add_parser("generate", help="render a dataset")
    gen.add_argument("--config", help="JSON config path (defaults apply if omitted)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--count", type=int, help="override triplet count")
    gen.add_argument("--seed", type=int, help="override global seed")
    gen.add_argument("--source-dir", help="override source image directory")
    gen.add_argument("--jobs", type=int, help="parallel workers (default $ANIMSYNTH_JOBS or 1)")
    gen.set_defaults(func=cmd_generate)

    val = sub.add_parser("validate", help="validate a generated dataset")
    val.add_argument("dir")
    val.add_argument("--strict", action="store_true",
                     help="additionally enforce photo-consistency PSNR")
    val.set_defaults(func=cmd_validate)

    pre = sub.add_parser("preview", help="write an inspection strip for one entry")
    pre.add_argument("dir")
    pre.add_argument("--id", type=int, required=True)
    pre.add_argument("--out", required=True)
    pre.set_defaults(func=cmd_preview)

    sta = sub.add_parser("stats", help="print dataset distribution summaries")
    sta.add_argument("dir")
    sta.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_default_config:
        print(GenConfig().to_json())
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
