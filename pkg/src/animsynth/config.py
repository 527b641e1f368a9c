"""Generation configuration: JSON schema, defaults, digesting."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from animsynth.geometry import Interval, MotionRanges
from animsynth.masks import MaskParams


@dataclass(frozen=True)
class GenConfig:
    width: int = 512
    height: int = 384
    count: int = 100
    global_seed: int = 0
    source_dir: str = ""
    layer_count: tuple[int, int] = (2, 4)       # K including the background
    motion: MotionRanges = field(default_factory=MotionRanges)
    background_motion: MotionRanges | None = None  # None: half-width ranges
    mask_params: MaskParams = field(default_factory=MaskParams)
    alpha: float = 0.1
    source_margin: int | None = None            # None: auto from flow extent
    flow_mask_anchor: str = "warped"
    background_static: bool = False

    def __post_init__(self):
        if self.layer_count[0] < 1 or self.layer_count[0] > self.layer_count[1]:
            raise ValueError(f"invalid layer_count {self.layer_count}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.width < 64 or self.height < 64:
            raise ValueError("canvas must be at least 64x64")
        if self.flow_mask_anchor not in ("warped", "source"):
            raise ValueError(f"unknown flow_mask_anchor {self.flow_mask_anchor!r}")

    def effective_background_motion(self) -> MotionRanges:
        if self.background_static:
            return MotionRanges.identity()
        if self.background_motion is not None:
            return self.background_motion
        return self.motion.halved()

    def to_dict(self) -> dict:
        def iv(x: Interval):
            return [x.lo, x.hi]

        def ranges(m: MotionRanges):
            return {
                "scale": iv(m.scale),
                "rotation_deg": iv(m.rotation),
                "translation_frac": iv(m.translation),
                "perspective": iv(m.perspective),
            }

        return {
            "canvas": {"width": self.width, "height": self.height},
            "count": self.count,
            "global_seed": self.global_seed,
            "source_dir": self.source_dir,
            "layer_count": list(self.layer_count),
            "motion": ranges(self.motion),
            "background_motion": None if self.background_motion is None else ranges(self.background_motion),
            "mask": {
                "sides": list(self.mask_params.sides),
                "radius_frac": iv(self.mask_params.radius),
                "hole_probability": self.mask_params.hole_probability,
                "hole_scale": iv(self.mask_params.hole_scale),
            },
            "alpha": self.alpha,
            "source_margin": self.source_margin,
            "flow_mask_anchor": self.flow_mask_anchor,
            "background_static": self.background_static,
        }

    @staticmethod
    def from_dict(d: dict) -> "GenConfig":
        base = GenConfig().to_dict()
        unknown = set(d) - set(base)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged = {**base, **d}

        def iv(v):
            return Interval(float(v[0]), float(v[1]))

        def ranges(m):
            return MotionRanges(
                scale=iv(m["scale"]),
                rotation=iv(m["rotation_deg"]),
                translation=iv(m["translation_frac"]),
                perspective=iv(m["perspective"]),
            )

        mask = merged["mask"]
        return GenConfig(
            width=int(merged["canvas"]["width"]),
            height=int(merged["canvas"]["height"]),
            count=int(merged["count"]),
            global_seed=int(merged["global_seed"]),
            source_dir=str(merged["source_dir"]),
            layer_count=tuple(merged["layer_count"]),
            motion=ranges(merged["motion"]),
            background_motion=None if merged["background_motion"] is None else ranges(merged["background_motion"]),
            mask_params=MaskParams(
                sides=tuple(mask["sides"]),
                radius=iv(mask["radius_frac"]),
                hole_probability=float(mask["hole_probability"]),
                hole_scale=iv(mask["hole_scale"]),
            ),
            alpha=float(merged["alpha"]),
            source_margin=None if merged["source_margin"] is None else int(merged["source_margin"]),
            flow_mask_anchor=str(merged["flow_mask_anchor"]),
            background_static=bool(merged["background_static"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "GenConfig":
        return GenConfig.from_dict(json.loads(text))

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()
