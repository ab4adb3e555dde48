"""Axis-aligned box arithmetic: IoU, generalized IoU, containment, extreme points."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point coordinates: ({self.x}, {self.y})")


@dataclass(frozen=True)
class BBox:
    """Axis-aligned rectangle in pixel coordinates with strictly positive area."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite box coordinates: {coords}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"invalid box (corners not strictly ordered): {coords}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return Point((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def contains_point(self, p: Point) -> bool:
        """Boundary-inclusive containment."""
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def intersection_area(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU: IoU minus the hull slack ratio. Lies in (-1, 1]."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    hull = BBox(
        min(a.x_min, b.x_min),
        min(a.y_min, b.y_min),
        max(a.x_max, b.x_max),
        max(a.y_max, b.y_max),
    )
    return inter / union - (hull.area - union) / hull.area


def containment_ratio(outer: BBox, inner: BBox) -> float:
    """Fraction of `inner`'s area covered by `outer`."""
    return intersection_area(outer, inner) / inner.area


def extreme_points(b: BBox) -> tuple[Point, Point, Point, Point]:
    """Edge midpoints (top, bottom, left, right) standing in for object extremities."""
    c = b.center
    return (
        Point(c.x, b.y_min),
        Point(c.x, b.y_max),
        Point(b.x_min, c.y),
        Point(b.x_max, c.y),
    )
