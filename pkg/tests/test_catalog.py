import json

import numpy as np
import pytest

from designloop.catalog import (
    CANVAS_MARGIN,
    Catalog,
    CatalogError,
    DesignParams,
    generate_catalog,
    load_catalog,
    render_design,
    sample_params,
    save_catalog,
)


def _bbox(mask):
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return rows[0], rows[-1], cols[0], cols[-1]


def _params(**overrides):
    base = dict(
        body_shape="rectangle",
        width_frac=0.5,
        height_frac=0.8,
        body_color=(0.2, 0.3, 0.7),
        cap_color=(0.4, 0.4, 0.4),
        cap_height_frac=0.15,
        texture_seed=12345,
    )
    base.update(overrides)
    return DesignParams(**base)


class TestRenderDesign:
    def test_rectangle_aspect_quarter(self):
        image, mask = render_design(_params(width_frac=0.25, height_frac=1.0))
        r0, r1, c0, c1 = _bbox(mask)
        aspect = (c1 - c0 + 1) / (r1 - r0 + 1)
        base = 128 - 2 * CANVAS_MARGIN
        assert abs(aspect - 0.25) <= 2 / base  # one pixel quantum

    def test_pure_red_body_keeps_red_channel(self):
        image, mask = render_design(_params(body_color=(1.0, 0.0, 0.0)))
        # Cap pixels excluded: check only rows below the cap.
        r0, r1, c0, c1 = _bbox(mask)
        cap_rows = round(0.15 * (r1 - r0 + 1))
        body = mask.copy()
        body[: r0 + cap_rows + 1] = False
        assert (image[body][:, 0] == 1.0).all()

    def test_purity(self):
        a_img, a_mask = render_design(_params())
        b_img, b_mask = render_design(_params())
        assert np.array_equal(a_img, b_img)
        assert np.array_equal(a_mask, b_mask)

    def test_mask_is_painted_set(self):
        image, mask = render_design(_params())
        background = image[~mask]
        assert (background == 1.0).all()
        assert (image[mask].min(axis=1) < 0.94).all()

    def test_bbox_strictly_inside_canvas(self):
        for shape in ("rectangle", "ellipse", "trapezoid", "rounded-rect", "circle-body"):
            _, mask = render_design(_params(body_shape=shape, width_frac=0.95, height_frac=0.95))
            assert not mask[0].any() and not mask[-1].any()
            assert not mask[:, 0].any() and not mask[:, -1].any()

    def test_invalid_params_rejected(self):
        with pytest.raises(CatalogError):
            render_design(_params(width_frac=0.0))
        with pytest.raises(CatalogError):
            render_design(_params(cap_height_frac=0.4))
        with pytest.raises(CatalogError):
            render_design(_params(body_shape="hexagon"))


class TestGenerateCatalog:
    def test_deterministic_regeneration(self):
        a = generate_catalog(10, (128, 128), seed=7)
        b = generate_catalog(10, (128, 128), seed=7)
        assert a.ids == b.ids
        for da, db in zip(a.designs, b.designs):
            assert da.params == db.params
            assert np.array_equal(da.image_u8, db.image_u8)
            assert np.array_equal(da.mask, db.mask)

    def test_size_zero_rejected(self):
        with pytest.raises(CatalogError):
            generate_catalog(0, (128, 128), seed=1)

    def test_small_image_rejected(self):
        with pytest.raises(CatalogError):
            generate_catalog(5, (32, 32), seed=1)

    def test_aspect_span_of_sampled_params(self):
        # Distribution check on the parameter sampler at catalog scale.
        params = sample_params(24000, seed=1)
        aspects = np.array([p.width_frac / p.height_frac for p in params])
        assert aspects.min() <= 0.2
        assert aspects.max() >= 1.5

    def test_rendered_aspect_matches_params(self, small_catalog):
        bound = 2 / 128
        for d in small_catalog.designs:
            r0, r1, c0, c1 = _bbox(d.mask)
            aspect = (c1 - c0 + 1) / (r1 - r0 + 1)
            assert abs(aspect - d.params.width_frac / d.params.height_frac) <= bound

    def test_masks_nonempty(self, small_catalog):
        assert all(d.mask.any() for d in small_catalog.designs)

    def test_unique_ids(self, small_catalog):
        assert len(set(small_catalog.ids)) == len(small_catalog)


class TestPersistence:
    def test_round_trip_identity(self, tmp_path):
        cat = generate_catalog(12, (128, 128), seed=5)
        save_catalog(cat, tmp_path / "cat")
        loaded = load_catalog(tmp_path / "cat")
        assert loaded.ids == cat.ids
        assert loaded.image_size == cat.image_size
        assert loaded.generation_seed == cat.generation_seed
        for da, db in zip(cat.designs, loaded.designs):
            assert np.array_equal(da.image_u8, db.image_u8)
            assert np.array_equal(da.mask, db.mask)
            assert da.params == db.params
        assert loaded.fingerprint() == cat.fingerprint()

    def test_missing_image_file_named_in_error(self, tmp_path):
        cat = generate_catalog(3, (128, 128), seed=5)
        root = save_catalog(cat, tmp_path / "cat")
        victim = root / "images" / "d000001.png"
        victim.unlink()
        with pytest.raises(IOError, match="d000001"):
            load_catalog(root)

    def test_duplicate_id_rejected(self, tmp_path):
        cat = generate_catalog(3, (128, 128), seed=5)
        root = save_catalog(cat, tmp_path / "cat")
        manifest = json.loads((root / "manifest.json").read_text())
        manifest["designs"].append(manifest["designs"][0])
        (root / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(CatalogError, match="duplicate"):
            load_catalog(root)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(IOError, match="manifest"):
            load_catalog(tmp_path / "nope")

    def test_duplicate_ids_rejected_in_memory(self):
        cat = generate_catalog(2, (128, 128), seed=5)
        with pytest.raises(CatalogError):
            Catalog(
                designs=[cat.designs[0], cat.designs[0]],
                image_size=(128, 128),
                generation_seed=0,
            )
