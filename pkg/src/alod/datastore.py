"""Image/label records and the versioned weak/full partition of the training set.

Datasets live on disk as UTF-8 JSON lines, one object per image. Ground truth
is stored next to each record but is read only by the evaluator and the
simulated annotator, never by the learner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Union

from .geometry import BBox

ClassId = int


@dataclass(frozen=True)
class LabeledObject:
    box: BBox
    class_id: ClassId
    quality: int  # 1 = precise, 0 = imprecise

    def __post_init__(self):
        if self.quality not in (0, 1):
            raise ValueError(f"quality flag must be 0 or 1, got {self.quality}")


@dataclass(frozen=True)
class FullLabel:
    objects: tuple[LabeledObject, ...]

    def class_counts(self) -> dict[ClassId, int]:
        counts: dict[ClassId, int] = {}
        for obj in self.objects:
            counts[obj.class_id] = counts.get(obj.class_id, 0) + 1
        return counts


@dataclass(frozen=True)
class WeakLabel:
    classes: frozenset[ClassId]

    def __post_init__(self):
        if not self.classes:
            raise ValueError("weak label must contain at least one class")


Label = Union[WeakLabel, FullLabel]


@dataclass(frozen=True)
class ImageRecord:
    id: str
    width: int
    height: int
    ground_truth: FullLabel
    label: Label
    uri: str | None = None
    source: str | None = None


@dataclass(frozen=True)
class DatasetVersion:
    """The (weak, full) partition at cycle t plus the acquisition history."""

    t: int
    weak_ids: frozenset[str]
    full_ids: frozenset[str]
    history: tuple[frozenset[str], ...] = ()

    @property
    def size(self) -> int:
        return len(self.weak_ids) + len(self.full_ids)


class DatasetError(ValueError):
    pass


def validate(record: ImageRecord) -> list[str]:
    """Return every violated record invariant; an empty list means valid."""
    violations: list[str] = []
    extent = BBox(0.0, 0.0, float(record.width), float(record.height))
    gt_classes = {obj.class_id for obj in record.ground_truth.objects}

    def check_box(box: BBox, what: str) -> None:
        if (
            box.x_min < extent.x_min
            or box.y_min < extent.y_min
            or box.x_max > extent.x_max
            or box.y_max > extent.y_max
        ):
            violations.append(f"{what} out of bounds")

    for obj in record.ground_truth.objects:
        check_box(obj.box, "ground-truth box")
    if isinstance(record.label, WeakLabel):
        if record.label.classes != gt_classes:
            if gt_classes - record.label.classes:
                violations.append("weak label incomplete")
            if record.label.classes - gt_classes:
                violations.append("weak label has spurious classes")
    else:
        for obj in record.label.objects:
            check_box(obj.box, "box")
    return violations


def promote(
    version: DatasetVersion,
    acquired: Iterable[str],
    labels: Mapping[str, FullLabel],
) -> DatasetVersion:
    """Move acquired ids from the weak set to the full set; returns a new version."""
    acquired = frozenset(acquired)
    already_full = acquired & version.full_ids
    if already_full:
        raise DatasetError(f"cannot re-promote fully labeled ids: {sorted(already_full)}")
    unknown = acquired - version.weak_ids
    if unknown:
        raise DatasetError(f"acquired ids not in the weak set: {sorted(unknown)}")
    missing = acquired - set(labels)
    if missing:
        raise DatasetError(f"missing full labels for: {sorted(missing)}")
    extra = set(labels) - acquired
    if extra:
        raise DatasetError(f"labels for non-acquired ids: {sorted(extra)}")
    return DatasetVersion(
        t=version.t + 1,
        weak_ids=version.weak_ids - acquired,
        full_ids=version.full_ids | acquired,
        history=version.history + (acquired,),
    )


# ---------------------------------------------------------------------------
# JSON-lines (de)serialization


def _box_to_json(box: BBox) -> list[float]:
    return [box.x_min, box.y_min, box.x_max, box.y_max]


def _box_from_json(raw) -> BBox:
    if not (isinstance(raw, (list, tuple)) and len(raw) == 4):
        raise DatasetError(f"box must be a 4-element array, got {raw!r}")
    try:
        return BBox(*(float(v) for v in raw))
    except ValueError as exc:
        raise DatasetError(f"invalid box: {exc}") from None


def _objects_to_json(objects: Iterable[LabeledObject]) -> list[dict]:
    return [
        {"box": _box_to_json(o.box), "class": o.class_id, "quality": o.quality}
        for o in objects
    ]


def _objects_from_json(raw) -> tuple[LabeledObject, ...]:
    return tuple(
        LabeledObject(
            box=_box_from_json(item["box"]),
            class_id=int(item["class"]),
            quality=int(item["quality"]),
        )
        for item in raw
    )


def record_to_json(record: ImageRecord) -> dict:
    if isinstance(record.label, WeakLabel):
        label = {"kind": "weak", "classes": sorted(record.label.classes)}
    else:
        label = {"kind": "full", "objects": _objects_to_json(record.label.objects)}
    out = {
        "id": record.id,
        "width": record.width,
        "height": record.height,
        "uri": record.uri,
        "gt": _objects_to_json(record.ground_truth.objects),
        "label": label,
    }
    if record.source is not None:
        out["source"] = record.source
    return out


def record_from_json(raw: dict) -> ImageRecord:
    label_raw = raw["label"]
    label: Label
    if label_raw["kind"] == "weak":
        label = WeakLabel(frozenset(int(c) for c in label_raw["classes"]))
    elif label_raw["kind"] == "full":
        label = FullLabel(_objects_from_json(label_raw["objects"]))
    else:
        raise DatasetError(f"unknown label kind {label_raw['kind']!r}")
    return ImageRecord(
        id=str(raw["id"]),
        width=int(raw["width"]),
        height=int(raw["height"]),
        uri=raw.get("uri"),
        ground_truth=FullLabel(_objects_from_json(raw["gt"])),
        label=label,
        source=raw.get("source"),
    )


def save_dataset(path: str | Path, records: Iterable[ImageRecord]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_json(record), sort_keys=True))
            fh.write("\n")


def load_dataset(path: str | Path) -> tuple[dict[str, ImageRecord], DatasetVersion]:
    """Load records keyed by id plus the initial partition.

    The initial version puts every weakly labeled record in the weak set and
    every fully labeled one in the full set.
    """
    path = Path(path)
    records: dict[str, ImageRecord] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            record = record_from_json(raw)
        except (DatasetError, ValueError, KeyError, TypeError) as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from None
        violations = validate(record)
        if violations:
            raise DatasetError(
                f"{path}:{lineno}: record {record.id!r}: {'; '.join(violations)}"
            )
        if record.id in records:
            raise DatasetError(f"{path}:{lineno}: duplicate id {record.id!r}")
        records[record.id] = record
    weak = frozenset(r.id for r in records.values() if isinstance(r.label, WeakLabel))
    full = frozenset(records) - weak
    return records, DatasetVersion(t=0, weak_ids=weak, full_ids=full)


def version_to_json(version: DatasetVersion) -> dict:
    return {
        "t": version.t,
        "weak_ids": sorted(version.weak_ids),
        "full_ids": sorted(version.full_ids),
        "history": [sorted(batch) for batch in version.history],
    }


def version_from_json(raw: dict) -> DatasetVersion:
    return DatasetVersion(
        t=int(raw["t"]),
        weak_ids=frozenset(raw["weak_ids"]),
        full_ids=frozenset(raw["full_ids"]),
        history=tuple(frozenset(batch) for batch in raw["history"]),
    )


def apply_full_labels(
    records: dict[str, ImageRecord], labels: Mapping[str, FullLabel]
) -> dict[str, ImageRecord]:
    """Return a copy of the record map with the given labels swapped in."""
    out = dict(records)
    for image_id, label in labels.items():
        out[image_id] = replace(records[image_id], label=label)
    return out
