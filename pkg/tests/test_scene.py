import math

import pytest
from hypothesis import given, strategies as st

from scenegen.scene import (
    ASPECT_RATIOS,
    ABSTRACT_ATTRIBUTES,
    COMPOSITE_ATTRIBUTES,
    LAYOUT_ATTRIBUTES,
    ObjectToken,
    Vocabulary,
    aspect_bin,
    continuize_location,
    discretize_location,
    normalized_box_size,
    order_objects,
    size_bin,
    token_box,
)


class Obj:
    def __init__(self, y, x, category):
        self.y, self.x, self.category = y, x, category

    def __repr__(self):
        return f"Obj({self.y}, {self.x}, {self.category})"

    def __eq__(self, other):
        return (self.y, self.x, self.category) == (other.y, other.x, other.category)


class TestDiscretize:
    def test_midpoint(self):
        assert discretize_location((0.5, 0.5), (28, 28)) == (14, 14)

    def test_origin(self):
        assert discretize_location((0.0, 0.0), (28, 28)) == (0, 0)

    def test_upper_boundary_clamps(self):
        assert discretize_location((1.0, 1.0), (28, 28)) == (27, 27)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ValueError):
            discretize_location((bad, 0.5), (28, 28))

    def test_cell_centers(self):
        assert continuize_location((0, 0), (28, 28)) == (1 / 56, 1 / 56)
        assert continuize_location((27, 27), (28, 28)) == (55 / 56, 55 / 56)

    def test_out_of_bounds_cell(self):
        with pytest.raises(ValueError):
            continuize_location((28, 0), (28, 28))

    @pytest.mark.parametrize("grid", [(28, 28), (32, 32), (5, 9)])
    def test_round_trip_every_cell(self, grid):
        h, w = grid
        for row in range(h):
            for col in range(w):
                xy = continuize_location((row, col), grid)
                assert discretize_location(xy, grid) == (row, col)


class TestSizeBin:
    def test_zero(self):
        assert size_bin(0.0) == 0

    def test_one_clamps(self):
        assert size_bin(1.0) == 16

    def test_half(self):
        # floor(0.5 * 17) = 8 by direct evaluation
        assert size_bin(0.5) == 8

    @pytest.mark.parametrize("bad", [-0.01, 1.01, float("nan")])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            size_bin(bad)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert size_bin(lo) <= size_bin(hi)


class TestAspectBin:
    def test_square(self):
        assert aspect_bin(1.0) == 8

    def test_clamp_wide(self):
        assert aspect_bin(20.0) == 16

    def test_nearest_in_log_space(self):
        # |ln .45 - ln .5| = .105 < |ln .45 - ln(1/3)| = .300
        assert aspect_bin(0.45) == 7

    def test_exact_scales(self):
        for i, ratio in enumerate(ASPECT_RATIOS):
            assert aspect_bin(ratio) == i

    def test_tie_goes_to_smaller_index(self):
        tie = math.sqrt((1 / 9) * (1 / 8))  # log-midpoint of bins 0 and 1
        assert aspect_bin(tie) == 0

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_nonpositive_rejected(self, bad):
        with pytest.raises(ValueError):
            aspect_bin(bad)

    @given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert aspect_bin(lo) <= aspect_bin(hi)


class TestOrdering:
    def test_bottom_first(self):
        objs = [Obj(0.2, 0.5, 3), Obj(0.9, 0.1, 5)]
        assert [o.y for o in order_objects(objs)] == [0.9, 0.2]

    def test_left_to_right_on_equal_y(self):
        objs = [Obj(0.5, 0.7, 1), Obj(0.5, 0.2, 1)]
        assert [o.x for o in order_objects(objs)] == [0.2, 0.7]

    def test_category_breaks_remaining_ties(self):
        objs = [Obj(0.5, 0.5, 7), Obj(0.5, 0.5, 2)]
        assert [o.category for o in order_objects(objs)] == [2, 7]

    def test_flip_flag(self):
        objs = [Obj(0.2, 0.5, 3), Obj(0.9, 0.1, 5)]
        assert [o.y for o in order_objects(objs, bottom_first=False)] == [0.2, 0.9]

    @given(st.permutations(list(range(6))))
    def test_permutation_invariant(self, perm):
        base = [Obj(0.1 * i, 0.05 * i, i % 3) for i in range(6)]
        shuffled = [base[i] for i in perm]
        assert order_objects(shuffled) == order_objects(base)


class TestVocabulary:
    def test_specials_and_indices(self):
        vocab = Vocabulary(["sun", "tree"], person_categories=())
        assert len(vocab) == 5
        assert vocab.pad_id == 0 and vocab.sos_id == 1 and vocab.eos_id == 2
        assert vocab.index("sun") == 3
        assert vocab.name(4) == "tree"
        assert vocab.is_special(vocab.eos_id)
        assert not vocab.is_special(3)

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(["a", "a"])

    def test_special_collision_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(["sos"])

    def test_person_flags(self):
        vocab = Vocabulary(["mike", "sun"], person_categories=["mike"])
        assert vocab.is_person(vocab.index("mike"))
        assert not vocab.is_person(vocab.index("sun"))

    def test_unknown_person_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(["sun"], person_categories=["mike"])


class TestAttributeSpaces:
    def test_cardinalities(self):
        assert ABSTRACT_ATTRIBUTES.cardinalities == (3, 2, 7, 5)
        assert LAYOUT_ATTRIBUTES.cardinalities == (17, 17)
        assert COMPOSITE_ATTRIBUTES.appearance_dim == 128

    def test_head_channels(self):
        assert ABSTRACT_ATTRIBUTES.total_channels == 1 + 17
        assert LAYOUT_ATTRIBUTES.total_channels == 1 + 34
        assert COMPOSITE_ATTRIBUTES.total_channels == 1 + 34 + 128

    def test_aspect_scale_table(self):
        assert len(ASPECT_RATIOS) == 17
        assert ASPECT_RATIOS[8] == 1.0
        assert ASPECT_RATIOS[0] == pytest.approx(1 / 9)
        assert ASPECT_RATIOS[16] == 9.0


class TestObjectToken:
    def test_validate_accepts_good_token(self, layout_spec):
        token = ObjectToken(category=3, cell=(5, 6), attributes=(4, 8))
        token.validate(layout_spec)

    def test_validate_rejects_special_category(self, layout_spec):
        token = ObjectToken(category=1, cell=(0, 0), attributes=(0, 0))
        with pytest.raises(ValueError):
            token.validate(layout_spec)

    def test_validate_rejects_bad_cell(self, layout_spec):
        token = ObjectToken(category=3, cell=(28, 0), attributes=(0, 0))
        with pytest.raises(ValueError):
            token.validate(layout_spec)

    def test_validate_rejects_bad_attribute(self, layout_spec):
        token = ObjectToken(category=3, cell=(0, 0), attributes=(17, 0))
        with pytest.raises(ValueError):
            token.validate(layout_spec)

    def test_appearance_norm_checked(self, composite_spec):
        bad = ObjectToken(category=3, cell=(0, 0), attributes=(0, 0),
                          appearance=tuple([0.5] * 128))
        with pytest.raises(ValueError):
            bad.validate(composite_spec)
        good = ObjectToken(category=3, cell=(0, 0), attributes=(0, 0),
                           appearance=tuple([1.0] + [0.0] * 127))
        good.validate(composite_spec)


class TestTokenBox:
    def test_box_matches_bin_centers(self, layout_spec):
        token = ObjectToken(category=3, cell=(14, 14), attributes=(8, 8))
        x0, y0, x1, y1 = token_box(token, layout_spec)
        f = (8 + 0.5) / 17
        assert (x1 - x0) == pytest.approx(f)
        assert (y1 - y0) == pytest.approx(f)
        assert normalized_box_size((x0, y0, x1, y1)) == pytest.approx(f)

    def test_aspect_changes_shape(self, layout_spec):
        wide = ObjectToken(category=3, cell=(14, 14), attributes=(8, 16))
        x0, y0, x1, y1 = token_box(wide, layout_spec)
        assert (x1 - x0) / (y1 - y0) == pytest.approx(9.0)
