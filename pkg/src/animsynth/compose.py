"""Layered triplet rendering: frames, ground-truth flow, occlusion maps.

A scene is one background layer plus K-1 polygon-masked upper layers.
Each layer carries a homography; its dense flow to frame 2 comes from
the homography and its flow to frame 3 is exactly twice that, so the
triplet satisfies the linear-motion constraint by construction.

Rendering happens on a margin-enlarged canvas so the moving background
never exposes splat holes inside the final center crop.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import binary_dilation, binary_fill_holes

from animsynth import geometry, masks
from animsynth.geometry import DegenerateTransformError, double_flow, homography_to_flow
from animsynth.masks import MaskParams, blur_sigma, gaussian_blur
from animsynth.warp import HOLE_EPS, forward_warp_average

SOFT_LO = 0.02          # mask values in (SOFT_LO, 1-SOFT_LO) count as soft edge
OWN_THRESH = 0.5        # soft-mask threshold for layer-ownership questions
CONTAM_FRAC = 0.02      # tolerated wrong-owner mass fraction before flagging
MAX_RENDER_RETRIES = 4


class RenderError(RuntimeError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    """One upper layer: source image reference plus its motion."""

    image_ref: str
    homography: np.ndarray  # 3x3, frame 1 -> frame 2


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    width: int
    height: int
    background_ref: str
    background_homography: np.ndarray
    layers: tuple[LayerSpec, ...]            # bottom-to-top, k = 2..K
    mask_params: MaskParams = MaskParams()
    alpha: float = 0.1
    source_margin: int | None = None         # None: derived from flow extents
    flow_mask_anchor: str = "warped"         # "warped" | "source"

    def digest(self) -> str:
        parts = [
            str(self.seed), f"{self.width}x{self.height}", self.background_ref,
            np.asarray(self.background_homography, dtype=np.float64).tobytes().hex(),
            self.flow_mask_anchor, repr(self.alpha), repr(self.mask_params),
            repr(self.source_margin),
        ]
        for layer in self.layers:
            parts.append(layer.image_ref)
            parts.append(np.asarray(layer.homography, dtype=np.float64).tobytes().hex())
        return hashlib.sha256("|".join(parts).encode()).hexdigest()


@dataclass
class Triplet:
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    f12: np.ndarray
    f13: np.ndarray
    occlusion2: np.ndarray
    occlusion3: np.ndarray
    holes2: np.ndarray
    holes3: np.ndarray
    owner2: np.ndarray  # layer index whose flow f12 stores at each pixel
    owner3: np.ndarray
    spec_digest: str
    stats: dict = field(default_factory=dict)


def composite_frame(images: list[np.ndarray], layer_masks: list[np.ndarray]) -> np.ndarray:
    """Iterative over-compositing, bottom layer first: I := (1-M)*I + M*I_k."""
    if len(images) != len(layer_masks) or not images:
        raise ValueError("need equally many images and masks, at least one")
    shape = images[0].shape[:2]
    out = np.zeros_like(np.asarray(images[0], dtype=np.float64))
    for img, m in zip(images, layer_masks):
        img = np.asarray(img, dtype=np.float64)
        if img.shape[:2] != shape or m.shape != shape:
            raise ValueError("layer dimensions differ")
        mm = m[..., None] if img.ndim == 3 else m
        out = (1.0 - mm) * out + mm * img
    return out


def composite_flow(layer_flows: list[np.ndarray], layer_masks: list[np.ndarray]) -> np.ndarray:
    """Same iteration as composite_frame, applied to (H, W, 2) flow fields."""
    if len(layer_flows) != len(layer_masks) or not layer_flows:
        raise ValueError("need equally many flows and masks, at least one")
    shape = layer_flows[0].shape[:2]
    out = np.zeros_like(np.asarray(layer_flows[0], dtype=np.float64))
    for f, m in zip(layer_flows, layer_masks):
        f = np.asarray(f, dtype=np.float64)
        if f.shape[:2] != shape or m.shape != shape:
            raise ValueError("layer dimensions differ")
        out = (1.0 - m[..., None]) * out + m[..., None] * f
    return out


def ownership(layer_masks: list[np.ndarray]) -> np.ndarray:
    """Topmost layer index with mask > OWN_THRESH per pixel; background is 0."""
    owner = np.zeros(layer_masks[0].shape, dtype=np.int64)
    for k, m in enumerate(layer_masks):
        owner[m > OWN_THRESH] = k
    return owner


def select_flow(layer_flows: list[np.ndarray], owner: np.ndarray) -> np.ndarray:
    """Per-pixel hard selection of the owning layer's flow."""
    stacked = np.stack(layer_flows, axis=0)
    h, w = owner.shape
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return stacked[owner, rows, cols]


def compute_occlusion_map(
    layer_masks_at_n: list[np.ndarray],
    layer_masks_at_1: list[np.ndarray],
    layer_flows: list[np.ndarray],
) -> np.ndarray:
    """Flag pixels whose composited ground truth is not photo-consistent.

    A frame-n pixel is flagged when the mass that forward warping
    transports onto it (using the same composited flow the dataset
    stores) does not come from the layer that owns the pixel at frame n,
    when it receives no mass at all, or when it sits in a soft (blurred)
    mask transition where content from several layers mixes.
    """
    owner1 = ownership(layer_masks_at_1)
    owner_n = ownership(layer_masks_at_n)
    flow = select_flow(layer_flows, owner_n)

    soft1 = np.zeros(owner1.shape, dtype=bool)
    soft_n = np.zeros(owner1.shape, dtype=bool)
    for m1, mn in zip(layer_masks_at_1[1:], layer_masks_at_n[1:]):
        soft1 |= (m1 > SOFT_LO) & (m1 < 1.0 - SOFT_LO)
        soft_n |= (mn > SOFT_LO) & (mn < 1.0 - SOFT_LO)

    # transport frame-1 ownership (one-hot) and the soft-edge indicator
    # forward along the stored flow, with the same splatting kernel the
    # renderer uses
    k_layers = len(layer_masks_at_1)
    feat = np.zeros(owner1.shape + (k_layers + 1,), dtype=np.float64)
    for k in range(k_layers):
        feat[..., k] = owner1 == k
    feat[..., k_layers] = soft1
    res = forward_warp_average(feat, flow)

    own_frac = np.take_along_axis(res.image[..., :k_layers], owner_n[..., None], axis=-1)[..., 0]
    soft_frac = res.image[..., k_layers]
    occ = res.holes | (own_frac < 1.0 - CONTAM_FRAC) | (soft_frac > CONTAM_FRAC) | soft_n
    return binary_dilation(occ, np.ones((3, 3), dtype=bool))


def _interior_holes(mask_soft: np.ndarray, warp_holes: np.ndarray) -> np.ndarray:
    """Splat holes strictly inside the warped object support."""
    support = mask_soft > OWN_THRESH
    filled = binary_fill_holes(support)
    return warp_holes & filled & ~support


def _apply_homography(hom: np.ndarray, points: np.ndarray) -> np.ndarray:
    p = np.concatenate([points, np.ones((len(points), 1))], axis=1) @ hom.T
    return p[:, :2] / p[:, 2:3]


def _preimage_excursion(hom: np.ndarray, width: int, height: int) -> float:
    """How far outside the crop the preimage of its boundary reaches under
    the doubled motion T(x) = x + 2(H(x) - x), found per point by Newton."""
    t = np.linspace(0.0, 1.0, 33)
    zeros, ones = np.zeros_like(t), np.ones_like(t)
    target = np.concatenate([
        np.stack([t * width, zeros], axis=1),
        np.stack([t * width, ones * height], axis=1),
        np.stack([zeros, t * height], axis=1),
        np.stack([ones * width, t * height], axis=1),
    ])

    def forward(x):
        return 2.0 * _apply_homography(hom, x) - x

    x = target.copy()
    eps = 1e-4
    max_step = 32.0  # keep iterates away from the projective horizon
    for _ in range(400):
        resid = forward(x) - target
        if np.abs(resid).max() < 1e-9:
            break
        jx = (forward(x + [eps, 0.0]) - forward(x)) / eps
        jy = (forward(x + [0.0, eps]) - forward(x)) / eps
        det = jx[:, 0] * jy[:, 1] - jx[:, 1] * jy[:, 0]
        if np.abs(det).min() < 1e-12:
            raise DegenerateTransformError("non-invertible doubled motion")
        step_x = (jy[:, 1] * resid[:, 0] - jy[:, 0] * resid[:, 1]) / det
        step_y = (-jx[:, 1] * resid[:, 0] + jx[:, 0] * resid[:, 1]) / det
        step = np.stack([step_x, step_y], axis=1)
        norm = np.hypot(step[:, 0], step[:, 1])
        step *= np.minimum(1.0, max_step / np.maximum(norm, 1e-12))[:, None]
        x -= step
    else:
        raise DegenerateTransformError("crop preimage failed to converge")
    return float(max(
        (-x[:, 0]).max(), (x[:, 0] - width).max(),
        (-x[:, 1]).max(), (x[:, 1] - height).max(), 0.0,
    ))


def _forward_excursion(hom: np.ndarray, width: int, height: int) -> float:
    """Max doubled corner displacement; a bound on how far content travels."""
    corners = np.array(
        [[0.5, 0.5], [width - 0.5, 0.5], [0.5, height - 0.5],
         [width - 0.5, height - 0.5]],
        dtype=np.float64,
    )
    moved = _apply_homography(hom, corners)
    return float(2.0 * np.abs(moved - corners).max())


def _derive_margin(spec: SceneSpec) -> int:
    """Source margin large enough that the background covers the final crop
    without splat holes and layer content reaching the crop originates on
    the enlarged canvas.

    The background uses the exact crop preimage; layer motion may fold, so
    layers use the forward corner-displacement bound instead.
    """
    need = _preimage_excursion(
        geometry.normalize_homography(spec.background_homography),
        spec.width, spec.height,
    )
    for layer in spec.layers:
        need = max(need, _forward_excursion(
            geometry.normalize_homography(layer.homography),
            spec.width, spec.height,
        ))
    return int(np.ceil(need * 1.1)) + 8


class ImageStore:
    """Resolves image references to float arrays in [0, 1]; see dataset.DirectoryStore."""

    def load(self, ref: str) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


class ArrayStore(ImageStore):
    def __init__(self, images: dict[str, np.ndarray]):
        self.images = images

    def load(self, ref: str) -> np.ndarray:
        return np.asarray(self.images[ref], dtype=np.float64)


def _crop_source(img: np.ndarray, rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Random crop of at least the working canvas; upscale first if needed."""
    if img.ndim == 2:
        img = img[..., None].repeat(3, axis=-1)
    h, w = img.shape[:2]
    if h < height or w < width:
        from PIL import Image as PILImage

        scale = max(height / h, width / w)
        nw, nh = int(np.ceil(w * scale)), int(np.ceil(h * scale))
        arr = (np.clip(img, 0, 1) * 255).round().astype(np.uint8)
        img = np.asarray(PILImage.fromarray(arr).resize((nw, nh), PILImage.BILINEAR), dtype=np.float64) / 255.0
        h, w = img.shape[:2]
    y0 = int(rng.integers(0, h - height + 1))
    x0 = int(rng.integers(0, w - width + 1))
    return img[y0:y0 + height, x0:x0 + width]


def _render_once(spec: SceneSpec, store: ImageStore, rng: np.random.Generator) -> Triplet:
    wc, hc = spec.width, spec.height
    margin = spec.source_margin if spec.source_margin is not None else _derive_margin(spec)
    we, he = wc + 2 * margin, hc + 2 * margin
    crop = (slice(margin, margin + hc), slice(margin, margin + wc))

    # homographies were anchored at the final canvas center; shift the
    # anchor to the enlarged canvas so flows agree on the center crop
    shift = np.array([[1, 0, margin], [0, 1, margin], [0, 0, 1]], dtype=np.float64)
    unshift = np.array([[1, 0, -margin], [0, 1, -margin], [0, 0, 1]], dtype=np.float64)

    def enlarged_flow(hom: np.ndarray) -> np.ndarray:
        return homography_to_flow(shift @ np.asarray(hom) @ unshift, we, he)

    # per-layer content, mask and flow on the enlarged canvas
    images1: list[np.ndarray] = []
    masks1: list[np.ndarray] = []
    flows12: list[np.ndarray] = []
    deltas: list[float] = []

    bg = _crop_source(store.load(spec.background_ref), rng, we, he)
    images1.append(bg)
    masks1.append(np.ones((he, we), dtype=np.float64))
    flows12.append(enlarged_flow(spec.background_homography))
    deltas.append(0.0)

    for idx, layer in enumerate(spec.layers):
        img = _crop_source(store.load(layer.image_ref), rng, we, he)
        f12 = enlarged_flow(layer.homography)
        outer = masks.sample_convex_polygon(rng, spec.mask_params, wc, hc)
        outer = outer + margin  # polygon sampled on the final canvas
        m = masks.rasterize_polygon(outer, we, he)
        if rng.uniform() < spec.mask_params.hole_probability:
            centroid = outer.mean(axis=0)
            extent = np.abs(outer - centroid).max()
            hole_r = spec.mask_params.hole_scale.sample(rng) * extent
            try:
                hole = masks.sample_convex_polygon(
                    rng, spec.mask_params, we, he, center=tuple(centroid), radius_px=hole_r
                )
                m = masks.punch_hole(m, hole)
            except masks.PolygonError:
                pass  # keep the solid mask
        delta = blur_sigma(m, f12, spec.alpha)
        deltas.append(delta)
        if delta > 0:
            # blur touches only the mask's bounding box plus the kernel reach
            pad = 2 * int(np.ceil(3.0 * delta)) + 2
            rows = np.flatnonzero(m.any(axis=1))
            cols = np.flatnonzero(m.any(axis=0))
            y0, y1 = max(rows[0] - pad, 0), min(rows[-1] + 1 + pad, he)
            x0, x1 = max(cols[0] - pad, 0), min(cols[-1] + 1 + pad, we)
            box = (slice(y0, y1), slice(x0, x1))
            premul = gaussian_blur(m[box][..., None] * img[box], delta)
            m_sub = gaussian_blur(m[box], delta)
            img_sub = np.divide(
                premul, m_sub[..., None], out=premul, where=m_sub[..., None] > HOLE_EPS
            )
            img = img.copy()
            img[box] = np.clip(img_sub, 0.0, 1.0)
            m = np.zeros_like(m)
            m[box] = np.clip(m_sub, 0.0, 1.0)
        images1.append(img)
        masks1.append(m)
        flows12.append(f12)

    flows13 = [double_flow(f) for f in flows12]
    k_total = len(images1)

    # warp every layer's content and mask to frames 2 and 3; layers touch
    # only their mask's bounding box, so warp that sub-rectangle alone.
    # The background result is read only on the crop, so its warp needs
    # just the crop plus the preimage reach of its own motion.
    bg_reach = min(
        int(np.ceil(_preimage_excursion(
            geometry.normalize_homography(spec.background_homography), wc, hc
        ))) + 4,
        margin,
    )
    bg_box = (
        margin - bg_reach, margin + hc + bg_reach,
        margin - bg_reach, margin + wc + bg_reach,
    )

    def layer_box(k: int, flow: np.ndarray):
        rows = np.flatnonzero(masks1[k].any(axis=1))
        cols = np.flatnonzero(masks1[k].any(axis=0))
        if rows.size == 0:
            return None
        y0, y1 = rows[0], rows[-1] + 1
        x0, x1 = cols[0], cols[-1] + 1
        reach = int(np.ceil(np.abs(flow[y0:y1, x0:x1]).max())) + 3
        y0, y1 = max(y0 - reach, 0), min(y1 + reach, he)
        x0, x1 = max(x0 - reach, 0), min(x1 + reach, we)
        return y0, y1, x0, x1

    def warp_all(flows: list[np.ndarray]):
        imgs_n, masks_n, holes_n = [], [], []
        for k in range(k_total):
            box = bg_box if k == 0 else layer_box(k, flows[k])
            img_n = np.zeros((he, we, 3))
            m_n = np.zeros((he, we))
            holes = np.ones((he, we), dtype=bool)
            if box is not None:
                y0, y1, x0, x1 = box
                if k == 0:
                    # the background mask is all ones: averaging preserves
                    # it exactly, so skip the extra channel
                    res = forward_warp_average(
                        images1[0][y0:y1, x0:x1], flows[0][y0:y1, x0:x1]
                    )
                    img_n[y0:y1, x0:x1] = np.clip(res.image, 0.0, 1.0)
                    m_n[y0:y1, x0:x1] = (~res.holes).astype(np.float64)
                    holes[y0:y1, x0:x1] = res.holes
                else:
                    stack = np.concatenate(
                        [images1[k][y0:y1, x0:x1], masks1[k][y0:y1, x0:x1, None]],
                        axis=-1,
                    )
                    res = forward_warp_average(stack, flows[k][y0:y1, x0:x1])
                    img_n[y0:y1, x0:x1] = np.clip(res.image[..., :3], 0.0, 1.0)
                    sub = np.clip(res.image[..., 3], 0.0, 1.0)
                    sub[res.holes] = 0.0
                    m_n[y0:y1, x0:x1] = sub
                    holes[y0:y1, x0:x1] = res.holes
                    if _interior_holes(sub, res.holes).any():
                        raise RenderError(f"layer {k + 1}: splat holes inside the warped object")
            imgs_n.append(img_n)
            masks_n.append(m_n)
            holes_n.append(holes)
        return imgs_n, masks_n, holes_n

    imgs2, masks2, holes2 = warp_all(flows12)
    imgs3, masks3, holes3 = warp_all(flows13)

    i1 = composite_frame([x[crop] for x in images1], [m[crop] for m in masks1])
    i2 = composite_frame([x[crop] for x in imgs2], [m[crop] for m in masks2])
    i3 = composite_frame([x[crop] for x in imgs3], [m[crop] for m in masks3])

    # ground-truth flow: hard per-pixel selection by the owning layer so
    # the doubled-flow identity survives compositing bitwise
    anchor2 = masks2 if spec.flow_mask_anchor == "warped" else masks1
    anchor3 = masks3 if spec.flow_mask_anchor == "warped" else masks1
    owner2 = ownership([m[crop] for m in anchor2])
    owner3 = ownership([m[crop] for m in anchor3])
    f12 = select_flow([f[crop] for f in flows12], owner2)
    f13 = select_flow([f[crop] for f in flows13], owner3)

    occ2 = compute_occlusion_map(
        [m[crop] for m in masks2], [m[crop] for m in masks1], [f[crop] for f in flows12]
    )
    occ3 = compute_occlusion_map(
        [m[crop] for m in masks3], [m[crop] for m in masks1], [f[crop] for f in flows13]
    )

    # the composited frame is uncovered only where the background splat
    # left a hole; the margin is sized so the crop never contains one
    h2 = holes2[0][crop]
    h3 = holes3[0][crop]
    if h2.any() or h3.any():
        raise RenderError("background splat holes inside the final crop")

    flow_mag = np.sqrt(f12[..., 0] ** 2 + f12[..., 1] ** 2)
    mask_area = float(np.mean(ownership([m[crop] for m in masks1]) > 0))
    stats = {
        "layer_count": k_total,
        "blur_sigmas": deltas[1:],
        "mean_flow_magnitude": float(flow_mag.mean()),
        "mask_area_fraction": mask_area,
        "margin": margin,
        "occlusion2_fraction": float(occ2.mean()),
    }
    return Triplet(
        i1=i1, i2=i2, i3=i3, f12=f12, f13=f13,
        occlusion2=occ2, occlusion3=occ3, holes2=h2, holes3=h3,
        owner2=owner2, owner3=owner3,
        spec_digest=spec.digest(), stats=stats,
    )


def render_triplet(spec: SceneSpec, store: ImageStore) -> Triplet:
    """Render one triplet deterministically from spec.seed.

    Retries with derived sub-seeds when a sample invalidates itself
    (splat holes inside an object or in the background crop).
    """
    last: Exception | None = None
    for attempt in range(MAX_RENDER_RETRIES):
        seed = spec.seed if attempt == 0 else _subseed(spec.seed, attempt)
        rng = np.random.default_rng(seed)
        try:
            return _render_once(spec, store, rng)
        except RenderError as err:
            last = err
    raise RenderError(f"render failed after {MAX_RENDER_RETRIES} attempts: {last}")


def _subseed(seed: int, salt: int) -> int:
    digest = hashlib.sha256(f"{seed}:{salt}".encode()).digest()
    return int.from_bytes(digest[:8], "little")
