"""Matching-based detection metrics: per-class AP, AP50, COCO-style AP, and NMS."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .datastore import ClassId
from .geometry import BBox, iou

COCO_TAUS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class Prediction:
    box: BBox
    class_dist: tuple[float, ...]
    confidence: float
    role: str = "teacher"  # "student" | "teacher"

    def __post_init__(self):
        total = sum(self.class_dist)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"class_dist sums to {total}, expected 1")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")

    @property
    def argmax_class(self) -> ClassId:
        return max(range(len(self.class_dist)), key=lambda c: (self.class_dist[c], -c))

    def entropy(self) -> float:
        return -sum(p * math.log(p) for p in self.class_dist if p > 0.0)


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[tuple[int, int, float], ...]  # (prediction idx, gt idx, iou)
    unmatched_preds: tuple[int, ...]
    unmatched_gts: tuple[int, ...]


def match_greedy(
    preds: Sequence[Prediction],
    gts: Sequence[tuple[BBox, ClassId]],
    class_id: ClassId,
    tau: float,
) -> MatchResult:
    """Greedy one-to-one matching of class `class_id` predictions to ground truth.

    Predictions are taken in confidence-descending order (ties: lower index
    first) and each claims the highest-IoU unclaimed GT with IoU >= tau.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0,1), got {tau}")
    pred_indices = [i for i, p in enumerate(preds) if p.argmax_class == class_id]
    pred_indices.sort(key=lambda i: (-preds[i].confidence, i))
    gt_indices = [j for j, (_, c) in enumerate(gts) if c == class_id]

    claimed: set[int] = set()
    pairs: list[tuple[int, int, float]] = []
    unmatched_preds: list[int] = []
    for i in pred_indices:
        best_j, best_iou = -1, 0.0
        for j in gt_indices:
            if j in claimed:
                continue
            v = iou(preds[i].box, gts[j][0])
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0 and best_iou >= tau:
            claimed.add(best_j)
            pairs.append((i, best_j, best_iou))
        else:
            unmatched_preds.append(i)
    unmatched_gts = tuple(j for j in gt_indices if j not in claimed)
    return MatchResult(tuple(pairs), tuple(unmatched_preds), unmatched_gts)


def _ap_from_flags(flags: Sequence[bool], n_gt: int) -> float:
    """All-point AP from confidence-ordered TP/FP flags with precision envelope."""
    if n_gt == 0:
        return 1.0 if not flags else 0.0
    if not flags:
        return 0.0
    tp = 0
    points: list[tuple[float, float]] = []  # (recall, precision)
    for rank, is_tp in enumerate(flags, 1):
        if is_tp:
            tp += 1
            points.append((tp / n_gt, tp / rank))
    ap = 0.0
    prev_recall = 0.0
    # envelope: precision at recall r is the max precision at any recall >= r
    for idx, (recall, _) in enumerate(points):
        env = max(p for _, p in points[idx:])
        ap += (recall - prev_recall) * env
        prev_recall = recall
    return ap


def average_precision(
    preds_per_image: Sequence[Sequence[Prediction]],
    gts_per_image: Sequence[Sequence[tuple[BBox, ClassId]]],
    class_id: ClassId,
    tau: float,
) -> float:
    """AP for one class at one IoU threshold over a list of scenes.

    A class with no ground truth scores 1 when it also has no predictions,
    0 otherwise.
    """
    n_gt = sum(1 for gts in gts_per_image for _, c in gts if c == class_id)
    scored: list[tuple[float, int, int, bool]] = []  # (-conf, image, idx, is_tp)
    for img, (preds, gts) in enumerate(zip(preds_per_image, gts_per_image)):
        result = match_greedy(preds, gts, class_id, tau)
        matched = {i for i, _, _ in result.pairs}
        for i, p in enumerate(preds):
            if p.argmax_class == class_id:
                scored.append((-p.confidence, img, i, i in matched))
    scored.sort()
    return _ap_from_flags([tp for _, _, _, tp in scored], n_gt)


def map50_and_map(
    preds_per_image: Sequence[Sequence[Prediction]],
    gts_per_image: Sequence[Sequence[tuple[BBox, ClassId]]],
    num_classes: int,
) -> tuple[float, float]:
    """(AP50, AP): mean AP over classes at tau=0.5 and over the 0.50..0.95 set."""
    ap50 = 0.0
    ap_all = 0.0
    for c in range(num_classes):
        for tau in COCO_TAUS:
            ap = average_precision(preds_per_image, gts_per_image, c, tau)
            ap_all += ap
            if tau == 0.5:
                ap50 += ap
    return ap50 / num_classes, ap_all / (num_classes * len(COCO_TAUS))


def per_class_ap(
    preds_per_image: Sequence[Sequence[Prediction]],
    gts_per_image: Sequence[Sequence[tuple[BBox, ClassId]]],
    num_classes: int,
    tau: float = 0.5,
) -> list[float]:
    return [
        average_precision(preds_per_image, gts_per_image, c, tau)
        for c in range(num_classes)
    ]


def nms(preds: Sequence[Prediction], iou_thresh: float) -> list[Prediction]:
    """Per-argmax-class greedy suppression in confidence-descending order."""
    if not 0.0 < iou_thresh < 1.0:
        raise ValueError(f"iou_thresh must be in (0,1), got {iou_thresh}")
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    kept: list[int] = []
    for i in order:
        suppressed = any(
            preds[k].argmax_class == preds[i].argmax_class
            and iou(preds[k].box, preds[i].box) > iou_thresh
            for k in kept
        )
        if not suppressed:
            kept.append(i)
    kept.sort()
    return [preds[i] for i in kept]
