"""Deterministic synthesis of frame-interpolation training triplets.

Renders (I1, I2, I3) frame triplets from a background image plus
polygon-masked layers, each moved by a homography-derived optical flow
field with the frame-1-to-3 displacement fixed at exactly twice the
frame-1-to-2 displacement.  Ground-truth flow, occlusion maps, and a
validation/metrics toolchain are included.
"""

from animsynth.geometry import (
    Interval,
    MotionRanges,
    sample_homography,
    homography_to_flow,
    double_flow,
)
from animsynth.masks import (
    MaskParams,
    sample_convex_polygon,
    rasterize_polygon,
    punch_hole,
    blur_sigma,
    gaussian_blur,
)
from animsynth.warp import WarpResult, forward_warp_average, backward_warp_bilinear
from animsynth.compose import (
    SceneSpec,
    LayerSpec,
    Triplet,
    composite_frame,
    composite_flow,
    compute_occlusion_map,
    render_triplet,
)
from animsynth.flo import read_flo, write_flo, FLO_MAGIC
from animsynth.quality import psnr, ssim

__version__ = "0.1.0"
