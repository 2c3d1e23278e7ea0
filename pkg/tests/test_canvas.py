import numpy as np
import pytest

from scenegen.canvas import build_canvas, empty_canvas, scene_canvas_sequence
from scenegen.errors import AssetNotFound
from scenegen.scene import ObjectToken, Scene


def layout_token(cat=7, cell=(14, 14), size=8, ratio=8):
    return ObjectToken(category=cat, cell=cell, attributes=(size, ratio))


class TestLayoutCanvas:
    def test_empty_prefix_is_all_zero(self, layout_spec):
        canvas = build_canvas(layout_spec, [], size=(28, 28))
        assert canvas.data.shape == (83, 28, 28)
        assert not canvas.data.any()

    def test_default_raster_matches_encoder_input(self, layout_spec):
        canvas = build_canvas(layout_spec, [])
        assert canvas.data.shape == (83, 64, 64)

    def test_single_object_covers_expected_cells(self, layout_spec):
        # size bin 1 with square aspect at cell (0,0) spans raster cells
        # (0..1, 0..1) on a 28x28 raster
        token = layout_token(cat=4, cell=(0, 0), size=1, ratio=8)
        canvas = build_canvas(layout_spec, [token], size=(28, 28))
        assert int(canvas.data.sum()) == 4
        assert canvas.data[4].sum() == 4
        assert canvas.data[4, :2, :2].all()

    def test_later_objects_overwrite(self, layout_spec):
        first = layout_token(cat=5, cell=(14, 14), size=10, ratio=8)
        second = layout_token(cat=9, cell=(14, 14), size=4, ratio=8)
        canvas = build_canvas(layout_spec, [first, second])
        per_cell = canvas.data.sum(axis=0)
        assert set(np.unique(per_cell)) <= {0.0, 1.0}
        rows, cols = np.nonzero(canvas.data[9])
        assert len(rows) > 0
        assert not canvas.data[5, rows, cols].any()

    def test_one_hot_invariant_random_scenes(self, layout_spec, rng):
        tokens = [
            layout_token(
                cat=int(rng.integers(3, 83)),
                cell=(int(rng.integers(0, 28)), int(rng.integers(0, 28))),
                size=int(rng.integers(0, 17)),
                ratio=int(rng.integers(0, 17)),
            )
            for _ in range(12)
        ]
        canvas = build_canvas(layout_spec, tokens)
        sums = canvas.data.sum(axis=0)
        assert set(np.unique(sums)) <= {0.0, 1.0}

    def test_prefix_consistency(self, layout_spec, rng):
        tokens = [
            layout_token(cat=int(rng.integers(3, 83)),
                         cell=(int(rng.integers(0, 28)), int(rng.integers(0, 28))))
            for _ in range(5)
        ]
        scene = Scene(task=layout_spec.kind, objects=tokens)
        steps = scene_canvas_sequence(layout_spec, scene)
        assert len(steps) == 6
        for t in range(6):
            rebuilt = build_canvas(layout_spec, tokens[:t])
            np.testing.assert_array_equal(steps[t].data, rebuilt.data)


class TestAbstractCanvas:
    def abstract_token(self, spec, name, cell=(20, 10), size=0, direction=0):
        return ObjectToken(
            category=spec.vocabulary.index(name), cell=cell,
            attributes=(size, direction, 0, 0),
        )

    def test_shape_and_range(self, abstract_spec, clipart_library):
        token = self.abstract_token(abstract_spec, "sun")
        canvas = build_canvas(abstract_spec, [token], assets=clipart_library)
        h, w = abstract_spec.canvas_size
        assert canvas.data.shape == (3, h, w)
        assert canvas.data.min() >= 0.0 and canvas.data.max() <= 1.0

    def test_empty_prefix_is_background(self, abstract_spec, clipart_library):
        empty = build_canvas(abstract_spec, [], assets=clipart_library)
        background = clipart_library.render(
            Scene(task=abstract_spec.kind), abstract_spec
        )
        np.testing.assert_array_equal(empty.data, background)

    def test_sprite_changes_pixels(self, abstract_spec, clipart_library):
        empty = build_canvas(abstract_spec, [], assets=clipart_library)
        one = build_canvas(
            abstract_spec, [self.abstract_token(abstract_spec, "tree")],
            assets=clipart_library,
        )
        assert (empty.data != one.data).any()

    def test_direction_flips_render(self, abstract_spec, clipart_library):
        plain = self.abstract_token(abstract_spec, "dog", direction=0)
        flipped = self.abstract_token(abstract_spec, "dog", direction=1)
        a = build_canvas(abstract_spec, [plain], assets=clipart_library)
        b = build_canvas(abstract_spec, [flipped], assets=clipart_library)
        assert (a.data != b.data).any()

    def test_size_scales_shrink_sprite(self, abstract_spec, clipart_library):
        background = build_canvas(abstract_spec, [], assets=clipart_library).data
        changed = []
        for size in (0, 2):
            data = build_canvas(
                abstract_spec,
                [self.abstract_token(abstract_spec, "bear", size=size)],
                assets=clipart_library,
            ).data
            changed.append((data != background).any(axis=0).sum())
        assert changed[0] > changed[2 - 1]

    def test_missing_asset_raises(self, abstract_spec, clipart_library, tmp_path):
        from scenegen.assets import AssetLibrary, CategoryAsset

        broken = AssetLibrary(
            root=tmp_path, categories=[CategoryAsset("ghost", "ghost.png")],
            canvas_size=(32, 32), size_scales=(1.0, 0.7, 0.49),
        )
        with pytest.raises(AssetNotFound):
            broken.sprite("ghost")

    def test_requires_assets(self, abstract_spec):
        with pytest.raises(ValueError):
            build_canvas(abstract_spec, [])

    def test_prefix_consistency(self, abstract_spec, clipart_library):
        tokens = [
            self.abstract_token(abstract_spec, "sun", cell=(3, 20)),
            self.abstract_token(abstract_spec, "mike", cell=(20, 10)),
        ]
        scene = Scene(task=abstract_spec.kind, objects=tokens)
        steps = scene_canvas_sequence(abstract_spec, scene, assets=clipart_library)
        for t in range(3):
            rebuilt = build_canvas(abstract_spec, tokens[:t], assets=clipart_library)
            np.testing.assert_array_equal(steps[t].data, rebuilt.data)


class TestCompositeCanvasShape:
    def test_empty_canvas_shape(self, composite_spec):
        canvas = empty_canvas(composite_spec)
        assert canvas.data.shape == (3 * 98, 128, 128)
        assert not canvas.data.any()
