"""Synthetic data: the copy-paste auxiliary set built from cropped object
templates, plus the random world generator used for desk-scale experiments."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .datastore import (
    ClassId,
    FullLabel,
    ImageRecord,
    LabeledObject,
    WeakLabel,
)
from .geometry import BBox


@dataclass(frozen=True)
class Template:
    source_id: str
    crop: BBox
    class_id: ClassId


@dataclass(frozen=True)
class Placement:
    template_index: int
    scale: float
    quarter_turns: int  # 0..3; odd turns swap the footprint's width/height
    flip: bool
    anchor_x: float  # footprint top-left corner
    anchor_y: float


@dataclass(frozen=True)
class SceneSpec:
    background_id: str
    width: int
    height: int
    placements: tuple[Placement, ...]


class GenerationError(RuntimeError):
    pass


def crop_templates(records: Sequence[ImageRecord]) -> list[Template]:
    """One template per fully labeled object."""
    templates: list[Template] = []
    for record in records:
        if not isinstance(record.label, FullLabel):
            raise GenerationError(f"record {record.id!r} is not fully labeled")
        for obj in record.label.objects:
            templates.append(Template(record.id, obj.box, obj.class_id))
    return templates


def placement_footprint(template: Template, placement: Placement) -> BBox:
    w = template.crop.width * placement.scale
    h = template.crop.height * placement.scale
    if placement.quarter_turns % 2 == 1:
        w, h = h, w
    return BBox(
        placement.anchor_x,
        placement.anchor_y,
        placement.anchor_x + w,
        placement.anchor_y + h,
    )


def compose_scene(
    background_id: str,
    width: int,
    height: int,
    templates: Sequence[Template],
    rng: np.random.Generator,
    k: int,
    scale_range: tuple[float, float] = (0.5, 1.5),
    max_attempts: int = 100,
) -> tuple[SceneSpec, FullLabel]:
    """Sample k placements that land fully inside the background extent.

    Each placement is retried up to max_attempts, shrinking the scale when a
    template will not fit; a template that cannot fit even at minimum scale
    raises GenerationError.
    """
    if k < 1:
        raise GenerationError("object count must be >= 1")
    if not templates:
        raise GenerationError("no templates to place")
    placements: list[Placement] = []
    objects: list[LabeledObject] = []
    for _ in range(k):
        idx = int(rng.integers(len(templates)))
        template = templates[idx]
        scale = float(rng.uniform(*scale_range))
        turns = int(rng.integers(4))
        flip = bool(rng.integers(2))
        placed = None
        for attempt in range(max_attempts + 1):
            w = template.crop.width * scale
            h = template.crop.height * scale
            if turns % 2 == 1:
                w, h = h, w
            if w < width and h < height:
                ax = float(rng.uniform(0.0, width - w))
                ay = float(rng.uniform(0.0, height - h))
                placed = Placement(idx, scale, turns, flip, ax, ay)
                break
            scale *= 0.5
            if scale < 1e-3:
                break
        if placed is None:
            raise GenerationError(
                f"background {background_id!r} too small for template {idx}"
            )
        placements.append(placed)
        objects.append(
            LabeledObject(box=placement_footprint(template, placed), class_id=template.class_id, quality=1)
        )
    spec = SceneSpec(background_id, width, height, tuple(placements))
    return spec, FullLabel(tuple(objects))


def generate_auxiliary(
    a0_records: Sequence[ImageRecord],
    backgrounds: Sequence[tuple[str, int, int]],
    n_real: int,
    multiplier: float,
    rng: np.random.Generator,
    objects_range: tuple[int, int] = (1, 12),
    id_prefix: str = "aux",
) -> list[ImageRecord]:
    """Build the fully labeled auxiliary set, round(multiplier * n_real) scenes."""
    if multiplier <= 0.0:
        raise GenerationError(f"multiplier must be positive, got {multiplier}")
    if not backgrounds:
        raise GenerationError("no backgrounds provided")
    templates = crop_templates(a0_records)
    if not templates:
        raise GenerationError("no templates cropped from the seed records")
    count = round(multiplier * n_real)
    records: list[ImageRecord] = []
    lo, hi = objects_range
    for i in range(count):
        bg_id, width, height = backgrounds[int(rng.integers(len(backgrounds)))]
        k = int(rng.integers(lo, hi + 1))
        _, label = compose_scene(bg_id, width, height, templates, rng, k)
        records.append(
            ImageRecord(
                id=f"{id_prefix}_{i:06d}",
                width=width,
                height=height,
                uri=None,
                ground_truth=label,
                label=label,
                source="auxiliary",
            )
        )
    return records


def render_scene(
    spec: SceneSpec,
    templates: Sequence[Template],
    raster_paths: dict[str, str | Path],
    out_path: str | Path,
) -> None:
    """Paste transformed template crops over the background raster.

    Rasters are read as PNG or PPM and written as binary PPM so identical
    scenes produce identical bytes.
    """
    from PIL import Image

    def open_raster(image_id: str) -> "Image.Image":
        if image_id not in raster_paths:
            raise GenerationError(f"no raster for image {image_id!r}")
        path = Path(raster_paths[image_id])
        if not path.exists():
            raise GenerationError(f"raster missing: {path}")
        return Image.open(path).convert("RGB")

    canvas = open_raster(spec.background_id)
    for placement in spec.placements:
        template = templates[placement.template_index]
        src = open_raster(template.source_id)
        crop = src.crop(
            (
                int(round(template.crop.x_min)),
                int(round(template.crop.y_min)),
                int(round(template.crop.x_max)),
                int(round(template.crop.y_max)),
            )
        )
        foot = placement_footprint(template, placement)
        if placement.flip:
            crop = crop.transpose(Image.FLIP_LEFT_RIGHT)
        if placement.quarter_turns:
            crop = crop.rotate(90 * placement.quarter_turns, expand=True)
        target_w = max(1, int(round(foot.width)))
        target_h = max(1, int(round(foot.height)))
        crop = crop.resize((target_w, target_h), Image.NEAREST)
        canvas.paste(crop, (int(round(foot.x_min)), int(round(foot.y_min))))
    canvas.save(out_path, format="PPM")


def generate_world(
    n: int,
    num_classes: int,
    rng: np.random.Generator,
    class_weights: Sequence[float] | None = None,
    extent: tuple[int, int] = (640, 480),
    objects_range: tuple[int, int] = (1, 6),
    id_prefix: str = "img",
) -> list[ImageRecord]:
    """Random weakly labeled world with hidden ground truth.

    Class frequencies follow class_weights (defaults to a geometric falloff,
    so later classes are rare), which is what makes informed acquisition pay
    off at desk scale.
    """
    if class_weights is None:
        class_weights = [0.55**c for c in range(num_classes)]
    weights = np.asarray(class_weights, dtype=float)
    weights /= weights.sum()
    width, height = extent
    records: list[ImageRecord] = []
    lo, hi = objects_range
    for i in range(n):
        k = int(rng.integers(lo, hi + 1))
        objects = []
        for _ in range(k):
            c = int(rng.choice(num_classes, p=weights))
            bw = float(rng.uniform(0.08, 0.35)) * width
            bh = float(rng.uniform(0.08, 0.35)) * height
            x0 = float(rng.uniform(0.0, width - bw))
            y0 = float(rng.uniform(0.0, height - bh))
            objects.append(
                LabeledObject(box=BBox(x0, y0, x0 + bw, y0 + bh), class_id=c, quality=1)
            )
        gt = FullLabel(tuple(objects))
        records.append(
            ImageRecord(
                id=f"{id_prefix}_{i:05d}",
                width=width,
                height=height,
                uri=None,
                ground_truth=gt,
                label=WeakLabel(frozenset(o.class_id for o in objects)),
            )
        )
    return records
