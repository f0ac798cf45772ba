import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from designloop.imaging import (
    NoForegroundError,
    aspect_ratio,
    channel_dominance,
    color_descriptor,
    compute_mask,
    extract_palette,
    rgb_to_hsv,
    shape_descriptor,
)
from oracles import color_descriptor_reference, hsv_reference, shape_descriptor_reference


def _flat(color, size=(6, 6)):
    img = np.empty((*size, 3))
    img[:] = color
    return img, np.ones(size, dtype=bool)


class TestColorDescriptor:
    def test_pure_red_fixed_point(self):
        img, mask = _flat((1.0, 0.0, 0.0))
        assert np.allclose(color_descriptor(img, mask).vector, [1.0, 0.0, 1.0, 1.0])

    def test_pure_green_matches_reference(self):
        img, mask = _flat((0.0, 1.0, 0.0))
        vec = color_descriptor(img, mask).vector
        assert np.allclose(vec, [-0.5, np.sqrt(3) / 2, 1.0, 1.0])
        assert np.allclose(vec, color_descriptor_reference(img, mask))

    def test_red_cyan_mix_cancels_hue(self):
        img = np.zeros((4, 4, 3))
        img[:2] = (1.0, 0.0, 0.0)
        img[2:] = (0.0, 1.0, 1.0)
        vec = color_descriptor(img, np.ones((4, 4), dtype=bool)).vector
        assert np.allclose(vec, [0.0, 0.0, 1.0, 1.0], atol=1e-12)

    def test_gray_pixels_contribute_only_value(self):
        img, mask = _flat((0.5, 0.5, 0.5))
        assert np.allclose(color_descriptor(img, mask).vector, [0.0, 0.0, 0.0, 0.5])

    def test_empty_mask_rejected(self):
        img, _ = _flat((1.0, 0.0, 0.0))
        with pytest.raises(NoForegroundError):
            color_descriptor(img, np.zeros((6, 6), dtype=bool))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_hue_norm_bounded_by_mean_saturation(self, seed):
        rng = np.random.default_rng(seed)
        img = rng.random((5, 5, 3))
        mask = rng.random((5, 5)) < 0.7
        if not mask.any():
            mask[0, 0] = True
        vec = color_descriptor(img, mask).vector
        mean_sat = rgb_to_hsv(img[mask])[:, 1].mean()
        assert vec[0] ** 2 + vec[1] ** 2 <= mean_sat**2 + 1e-12
        assert mean_sat <= 1.0 + 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_stdlib_reference(self, seed):
        rng = np.random.default_rng(seed)
        img = np.round(rng.random((4, 4, 3)), 3)
        mask = np.ones((4, 4), dtype=bool)
        assert np.allclose(
            color_descriptor(img, mask).vector, color_descriptor_reference(img, mask), atol=1e-9
        )

    def test_rgb_to_hsv_matches_colorsys(self):
        rng = np.random.default_rng(3)
        arr = rng.random((40, 3))
        assert np.allclose(rgb_to_hsv(arr), hsv_reference(arr), atol=1e-12)


class TestShapeDescriptor:
    def test_full_rectangle_all_ones(self):
        mask = np.zeros((50, 90), dtype=bool)
        mask[5:37, 10:74] = True
        assert np.allclose(shape_descriptor(mask).vector, 1.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        base = rng.random((24, 17)) < 0.4
        base[0, 0] = base[-1, -1] = True
        doubled = np.kron(base, np.ones((2, 2), dtype=bool))
        assert np.allclose(
            shape_descriptor(base).vector, shape_descriptor(doubled).vector, atol=1e-12
        )

    def test_translation_invariance(self):
        mask = np.zeros((60, 60), dtype=bool)
        mask[10:30, 5:20] = True
        shifted = np.roll(np.roll(mask, 17, axis=0), 23, axis=1)
        assert np.allclose(
            shape_descriptor(mask).vector, shape_descriptor(shifted).vector, atol=1e-12
        )

    def test_left_half_filled_bbox(self):
        # Pin the bbox to the full square with two far-corner pixels; the
        # left half dominates the grid.
        mask = np.zeros((160, 160), dtype=bool)
        mask[:, :80] = True
        mask[0, 159] = mask[159, 159] = True
        vec = shape_descriptor(mask).vector.reshape(16, 16)
        assert np.allclose(vec[:, :8], 1.0)
        assert vec[:, 8:].max() <= 0.011
        assert np.allclose(
            shape_descriptor(mask).vector, shape_descriptor_reference(mask), atol=1e-12
        )

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_entries_in_unit_interval_and_match_reference(self, seed):
        rng = np.random.default_rng(seed)
        mask = rng.random((rng.integers(17, 40), rng.integers(17, 40))) < 0.5
        if not mask.any():
            mask[0, 0] = True
        vec = shape_descriptor(mask).vector
        assert vec.shape == (256,)
        assert (vec >= -1e-12).all() and (vec <= 1 + 1e-12).all()
        assert np.allclose(vec, shape_descriptor_reference(mask), atol=1e-10)

    def test_empty_mask_rejected(self):
        with pytest.raises(NoForegroundError):
            shape_descriptor(np.zeros((10, 10), dtype=bool))


class TestAspectRatio:
    def test_wide_box(self):
        mask = np.zeros((300, 300), dtype=bool)
        mask[40:240, 100:150] = True  # 200 tall x 50 wide
        assert aspect_ratio(mask) == 0.25

    def test_square(self):
        mask = np.zeros((10, 10), dtype=bool)
        mask[2:8, 3:9] = True
        assert aspect_ratio(mask) == 1.0

    def test_single_pixel(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[2, 2] = True
        assert aspect_ratio(mask) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(NoForegroundError):
            aspect_ratio(np.zeros((5, 5), dtype=bool))


class TestChannelDominance:
    def test_pure_red(self):
        img, mask = _flat((1.0, 0.0, 0.0))
        assert channel_dominance(img, mask, "red") == 1.0

    def test_gray_is_zero(self):
        img, mask = _flat((0.6, 0.6, 0.6))
        assert channel_dominance(img, mask, "blue") == 0.0

    def test_green_scores_minus_one_for_red(self):
        img, mask = _flat((0.0, 1.0, 0.0))
        assert channel_dominance(img, mask, "red") == -1.0

    def test_antisymmetric_under_channel_swap(self):
        rng = np.random.default_rng(5)
        # Two-channel images: swap red and blue planes, score flips sign.
        img = np.zeros((8, 8, 3))
        img[..., 0] = rng.random((8, 8))
        img[..., 2] = rng.random((8, 8))
        mask = np.ones((8, 8), dtype=bool)
        swapped = img[..., ::-1].copy()
        a = channel_dominance(img, mask, "red")
        b = channel_dominance(swapped, mask, "red")
        assert a == pytest.approx(-b, abs=1e-12)

    def test_unknown_channel(self):
        img, mask = _flat((0.5, 0.5, 0.5))
        with pytest.raises(ValueError):
            channel_dominance(img, mask, "green")


class TestPalette:
    def test_single_color(self):
        img, mask = _flat((0.3, 0.6, 0.9))
        pal = extract_palette(img, mask, k=1, seed=1)
        assert len(pal.entries) == 1
        rgb, weight = pal.entries[0]
        assert np.allclose(rgb, (0.3, 0.6, 0.9))
        assert weight == 1.0

    def test_two_color_split(self):
        img = np.zeros((10, 10, 3))
        img[:6] = (0.9, 0.1, 0.1)
        img[6:] = (0.1, 0.2, 0.8)
        pal = extract_palette(img, np.ones((10, 10), dtype=bool), k=2, seed=2)
        got = sorted(pal.entries, key=lambda e: e[1])
        assert got[0][1] == pytest.approx(0.4)
        assert got[1][1] == pytest.approx(0.6)
        assert np.allclose(got[0][0], (0.1, 0.2, 0.8), atol=1e-9)
        assert np.allclose(got[1][0], (0.9, 0.1, 0.1), atol=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        img = rng.random((12, 12, 3))
        mask = np.ones((12, 12), dtype=bool)
        a = extract_palette(img, mask, k=4, seed=9)
        b = extract_palette(img, mask, k=4, seed=9)
        assert a == b

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_weights_sum_to_one(self, seed, k):
        rng = np.random.default_rng(seed)
        img = rng.random((9, 9, 3))
        mask = np.ones((9, 9), dtype=bool)
        pal = extract_palette(img, mask, k=k, seed=seed)
        assert len(pal.entries) == k
        assert sum(w for _, w in pal.entries) == pytest.approx(1.0, abs=1e-9)

    def test_k_exceeding_pixels_rejected(self):
        img, mask = _flat((0.5, 0.5, 0.5), size=(2, 2))
        with pytest.raises(ValueError):
            extract_palette(img, mask, k=5, seed=0)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_inertia_non_increasing(self, seed):
        from designloop.imaging import _lloyd

        rng = np.random.default_rng(seed)
        pix = rng.random((rng.integers(20, 120), 3))
        _, _, trace = _lloyd(pix, k=int(rng.integers(2, 6)), rng=rng)
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


class TestComputeMask:
    def test_iou_against_ground_truth(self, small_catalog):
        rng = np.random.default_rng(1)
        picks = rng.choice(len(small_catalog.designs), 100, replace=False)
        ious = []
        for i in picks:
            d = small_catalog.designs[i]
            m = compute_mask(d.image)
            ious.append((m & d.mask).sum() / (m | d.mask).sum())
        ious = np.array(ious)
        assert (ious >= 0.95).all()

    def test_iou_invariant_over_catalog(self, small_catalog):
        ok = 0
        for d in small_catalog.designs:
            m = compute_mask(d.image)
            iou = (m & d.mask).sum() / (m | d.mask).sum()
            ok += iou >= 0.95
        assert ok / len(small_catalog.designs) >= 0.99

    def test_all_white_errors(self):
        with pytest.raises(NoForegroundError):
            compute_mask(np.ones((64, 64, 3)))

    def test_black_canvas_is_all_foreground(self):
        mask = compute_mask(np.zeros((64, 64, 3)))
        assert mask.all()
