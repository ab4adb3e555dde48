import math

import pytest
from hypothesis import given, strategies as st

from alod.geometry import (
    BBox,
    Point,
    containment_ratio,
    extreme_points,
    giou,
    iou,
)


def boxes(max_coord=100.0):
    coord = st.floats(0.0, max_coord, allow_nan=False)
    size = st.floats(0.1, max_coord, allow_nan=False)
    return st.builds(
        lambda x, y, w, h: BBox(x, y, x + w, y + h), coord, coord, size, size
    )


class TestBBox:
    def test_rejects_inverted_corners(self):
        with pytest.raises(ValueError):
            BBox(5, 5, 3, 3)

    def test_rejects_zero_area(self):
        with pytest.raises(ValueError):
            BBox(0, 0, 0, 5)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            BBox(0, 0, math.inf, 1)


class TestIoU:
    def test_identity(self):
        b = BBox(3, 4, 10, 12)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0

    def test_partial_overlap(self):
        # intersection 1, union 4 + 4 - 1 = 7
        assert iou(BBox(0, 0, 2, 2), BBox(1, 1, 3, 3)) == pytest.approx(1 / 7)

    @given(boxes(), boxes())
    def test_symmetric_and_bounded(self, a, b):
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0

    @given(boxes(), boxes(), st.floats(-50, 50), st.floats(-50, 50))
    def test_translation_invariance(self, a, b, dx, dy):
        assert iou(a.translate(dx, dy), b.translate(dx, dy)) == pytest.approx(
            iou(a, b), abs=1e-12
        )


class TestGIoU:
    def test_identity(self):
        b = BBox(1, 1, 4, 5)
        assert giou(b, b) == 1.0

    def test_disjoint_hull_penalty(self):
        # side-by-side unit boxes with a unit gap: hull 3x1, slack 1/3
        assert giou(BBox(0, 0, 1, 1), BBox(2, 0, 3, 1)) == pytest.approx(-1 / 3)

    @given(boxes(), boxes())
    def test_never_exceeds_iou(self, a, b):
        assert giou(a, b) <= iou(a, b) + 1e-12

    @given(boxes(), boxes())
    def test_range(self, a, b):
        assert -1.0 < giou(a, b) <= 1.0

    def test_equals_iou_when_union_fills_hull(self):
        a = BBox(0, 0, 2, 2)
        b = BBox(0, 0, 1, 2)  # contained: hull == a == union
        assert giou(a, b) == pytest.approx(iou(a, b))


class TestContainment:
    def test_identity(self):
        b = BBox(0, 0, 5, 5)
        assert containment_ratio(b, b) == 1.0

    def test_full_containment(self):
        assert containment_ratio(BBox(0, 0, 10, 10), BBox(2, 2, 4, 4)) == 1.0

    def test_partial(self):
        assert containment_ratio(BBox(0, 0, 2, 2), BBox(1, 1, 3, 3)) == pytest.approx(0.25)

    @given(boxes(), boxes())
    def test_bounded(self, outer, inner):
        assert 0.0 <= containment_ratio(outer, inner) <= 1.0 + 1e-12


class TestExtremePoints:
    def test_square(self):
        pts = set((p.x, p.y) for p in extreme_points(BBox(0, 0, 2, 2)))
        assert pts == {(1, 0), (1, 2), (0, 1), (2, 1)}

    def test_top_of_wide_box(self):
        top, _, _, _ = extreme_points(BBox(0, 0, 4, 2))
        assert (top.x, top.y) == (2, 0)

    @given(boxes())
    def test_points_on_boundary(self, b):
        for p in extreme_points(b):
            on_edge = (
                p.x in (b.x_min, b.x_max) or p.y in (b.y_min, b.y_max)
            )
            assert on_edge, p
            assert b.contains_point(Point(p.x, p.y))
