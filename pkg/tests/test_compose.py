import numpy as np
import pytest

from animsynth.compose import (
    ArrayStore,
    LayerSpec,
    SceneSpec,
    composite_flow,
    composite_frame,
    compute_occlusion_map,
    ownership,
    render_triplet,
)
from animsynth.geometry import Interval, MotionRanges, sample_homography
from animsynth.masks import MaskParams


def translation_h(tx, ty):
    h = np.eye(3)
    h[0, 2], h[1, 2] = tx, ty
    return h


class TestCompositeFrame:
    def test_background_only(self):
        rng = np.random.default_rng(0)
        bg = rng.random((6, 8, 3))
        out = composite_frame([bg], [np.ones((6, 8))])
        assert (out == bg).all()

    def test_opaque_top_layer(self):
        rng = np.random.default_rng(1)
        bg, top = rng.random((6, 8, 3)), rng.random((6, 8, 3))
        out = composite_frame([bg, top], [np.ones((6, 8)), np.ones((6, 8))])
        assert (out == top).all()

    def test_half_transparent_mix(self):
        bg = np.full((4, 4, 3), 0.2)
        top = np.full((4, 4, 3), 0.8)
        out = composite_frame([bg, top], [np.ones((4, 4)), np.full((4, 4), 0.5)])
        assert np.allclose(out, 0.5)

    def test_convexity(self):
        rng = np.random.default_rng(2)
        layers = [rng.random((5, 5)) for _ in range(3)]
        ms = [np.ones((5, 5))] + [rng.random((5, 5)) for _ in range(2)]
        out = composite_frame(layers, ms)
        lo = np.min(layers, axis=0)
        hi = np.max(layers, axis=0)
        assert (out >= lo - 1e-12).all() and (out <= hi + 1e-12).all()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            composite_frame([np.zeros((4, 4))], [np.zeros((5, 4))])


class TestCompositeFlow:
    def test_background_only(self):
        rng = np.random.default_rng(0)
        f = rng.normal(size=(6, 8, 2))
        assert (composite_flow([f], [np.ones((6, 8))]) == f).all()

    def test_empty_top_mask(self):
        rng = np.random.default_rng(1)
        f_bg = rng.normal(size=(6, 8, 2))
        f_top = rng.normal(size=(6, 8, 2))
        out = composite_flow([f_bg, f_top], [np.ones((6, 8)), np.zeros((6, 8))])
        assert (out == f_bg).all()

    def test_binary_top_mask_selects(self):
        rng = np.random.default_rng(2)
        f_bg = rng.normal(size=(6, 8, 2))
        f_top = rng.normal(size=(6, 8, 2))
        m = (rng.random((6, 8)) < 0.5).astype(float)
        out = composite_flow([f_bg, f_top], [np.ones((6, 8)), m])
        for row in range(6):
            for col in range(8):
                expect = f_top[row, col] if m[row, col] else f_bg[row, col]
                assert (out[row, col] == expect).all()


class TestOcclusionMap:
    def test_static_scene_zero(self):
        bg_mask = np.ones((12, 12))
        top = np.zeros((12, 12))
        top[4:8, 4:8] = 1.0
        zero = np.zeros((12, 12, 2))
        occ = compute_occlusion_map([bg_mask, top], [bg_mask, top], [zero, zero])
        assert not occ.any()

    def test_empty_top_mask_zero(self):
        bg_mask = np.ones((12, 12))
        top = np.zeros((12, 12))
        zero = np.zeros((12, 12, 2))
        occ = compute_occlusion_map([bg_mask, top], [bg_mask, top], [zero, zero])
        assert not occ.any()

    def test_translating_layer_flags_trailing_edge(self):
        h = w = 24
        bg_mask = np.ones((h, w))
        m1 = np.zeros((h, w))
        m1[8:16, 6:14] = 1.0
        d = 4
        m2 = np.roll(m1, d, axis=1)
        f_bg = np.zeros((h, w, 2))
        f_top = np.zeros((h, w, 2))
        f_top[..., 0] = d
        occ = compute_occlusion_map([bg_mask, m2], [bg_mask, m1], [f_bg, f_top])
        # uncovered background: the d-wide band the object vacated
        assert occ[8:16, 6:10].all()
        # with warped-mask flow anchoring, the object's leading d-wide band
        # receives no splat mass and is flagged too
        assert occ[10:14, 10:14].all()
        # far background and the covered object interior stay clean
        assert not occ[:4, :].any()
        assert not occ[10:14, 15:17].any()

    def test_ownership_helper(self):
        bg = np.ones((4, 4))
        top = np.zeros((4, 4))
        top[0, 0] = 1.0
        own = ownership([bg, top])
        assert own[0, 0] == 1
        assert (own.ravel()[1:] == 0).all()


def make_store(rng, names, size=(700, 860)):
    return ArrayStore({
        n: np.clip(
            rng.random(3) + 0.25 * rng.standard_normal((size[0], size[1], 3)), 0, 1
        )
        for n in names
    })


def base_spec(seed=3, layers=(), bg_h=None, **kw):
    return SceneSpec(
        seed=seed, width=192, height=128,
        background_ref="bg",
        background_homography=np.eye(3) if bg_h is None else bg_h,
        layers=tuple(layers),
        **kw,
    )


class TestRenderTriplet:
    def test_identity_background_only(self):
        store = make_store(np.random.default_rng(0), ["bg"])
        t = render_triplet(base_spec(), store)
        assert (t.i1 == t.i2).all() and (t.i1 == t.i3).all()
        assert (t.f12 == 0).all() and (t.f13 == 0).all()
        assert not t.occlusion2.any() and not t.occlusion3.any()
        assert not t.holes2.any() and not t.holes3.any()

    def test_pure_translation_layer(self):
        rng = np.random.default_rng(1)
        store = make_store(rng, ["bg", "obj"])
        d = 5
        spec = base_spec(
            layers=[LayerSpec("obj", translation_h(d, 0))],
            mask_params=MaskParams(hole_probability=0.0, radius=Interval(0.15, 0.25)),
        )
        t = render_triplet(spec, store)
        # object ownership displaced by d between frames 2 and 3
        inside2 = t.owner2 == 1
        inside3 = t.owner3 == 1
        assert inside2.sum() > 50
        assert (np.roll(inside2, d, axis=1) == inside3).mean() > 0.98
        # stored flow equals d inside the frame-2 object support
        assert (t.f12[inside2, 0] == d).all()
        assert (t.f12[inside2, 1] == 0).all()
        # flow is zero on far background
        far_bg = ~inside2 & ~inside3 & (t.owner2 == 0)
        assert (t.f12[far_bg] == 0).all()

    def test_determinism(self):
        rng = np.random.default_rng(2)
        store = make_store(rng, ["bg", "obj"])
        mr = MotionRanges()
        spec = base_spec(
            seed=99,
            bg_h=sample_homography(np.random.default_rng(5), mr.halved(), 192, 128),
            layers=[LayerSpec("obj", sample_homography(np.random.default_rng(6), mr, 192, 128))],
        )
        a = render_triplet(spec, store)
        b = render_triplet(spec, store)
        for key in ("i1", "i2", "i3", "f12", "f13"):
            assert (getattr(a, key) == getattr(b, key)).all()
        assert (a.occlusion2 == b.occlusion2).all()
        assert a.spec_digest == b.spec_digest

    def test_flow_doubling_where_owner_agrees(self):
        rng = np.random.default_rng(3)
        store = make_store(rng, ["bg", "obj", "obj2"])
        mr = MotionRanges()
        spec = base_spec(
            seed=123,
            bg_h=sample_homography(np.random.default_rng(7), mr.halved(), 192, 128),
            layers=[
                LayerSpec("obj", sample_homography(np.random.default_rng(8), mr, 192, 128)),
                LayerSpec("obj2", sample_homography(np.random.default_rng(9), mr, 192, 128)),
            ],
        )
        t = render_triplet(spec, store)
        agree = t.owner2 == t.owner3
        assert agree.sum() > 0
        assert (t.f13[agree] == 2.0 * t.f12[agree]).all()

    def test_frames_stay_in_range(self):
        rng = np.random.default_rng(4)
        store = make_store(rng, ["bg", "obj"])
        spec = base_spec(layers=[LayerSpec("obj", translation_h(3, -2))])
        t = render_triplet(spec, store)
        for img in (t.i1, t.i2, t.i3):
            assert img.min() >= 0.0 and img.max() <= 1.0

    def test_source_anchor_mode(self):
        rng = np.random.default_rng(5)
        store = make_store(rng, ["bg", "obj"])
        spec = base_spec(
            layers=[LayerSpec("obj", translation_h(4, 0))],
            flow_mask_anchor="source",
            mask_params=MaskParams(hole_probability=0.0),
        )
        t = render_triplet(spec, store)
        # source anchoring selects by frame-1 masks for both flows, so the
        # doubling identity holds everywhere
        assert (t.f13 == 2.0 * t.f12).all()
