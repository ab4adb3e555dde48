"""Proposal preparation and the simulated annotator.

Proposals are the merged student/teacher detections after cluster pruning,
NMS, and a confidence cut. The simulated annotator follows the
select / correct-class / grade-quality protocol with fixed per-action costs,
drawing a tight box whenever no acceptable proposal exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .datastore import ClassId, FullLabel, LabeledObject
from .evaluation import Prediction, nms
from .geometry import BBox, containment_ratio, extreme_points, iou

CLUSTER_COVER_THRESHOLD = 0.95
NMS_IOU_THRESHOLD = 0.75
PROPOSAL_CONFIDENCE_THRESHOLD = 0.3
SELECT_IOU_THRESHOLD = 0.5
PRECISE_IOU_THRESHOLD = 0.9


@dataclass(frozen=True)
class Proposal:
    box: BBox
    suggested_class: ClassId
    source: str  # "student" | "teacher"
    confidence: float


@dataclass(frozen=True)
class CostModel:
    select_seconds: float = 2.0
    draw_seconds: float = 34.5
    extreme_click_seconds: float = 7.0

    def __post_init__(self):
        if min(self.select_seconds, self.draw_seconds, self.extreme_click_seconds) <= 0:
            raise ValueError("cost model values must be positive")


@dataclass(frozen=True)
class Action:
    kind: str  # "selected" | "drawn" | "removed"
    proposal_index: int | None
    class_id: ClassId
    quality: int
    seconds: float
    class_corrected: bool = False


@dataclass(frozen=True)
class SessionResult:
    label: FullLabel
    actions: tuple[Action, ...]
    total_seconds: float


def prepare_proposals(
    student_preds: Sequence[Prediction], teacher_preds: Sequence[Prediction]
) -> list[Proposal]:
    """Merge both roles, keep cluster centers, run per-class NMS at 0.75, and
    drop everything under confidence 0.3 (inclusive threshold)."""
    merged = list(student_preds) + list(teacher_preds)
    # cluster pruning: largest-first; a box fully covered (>= 0.95) by an
    # earlier retained center is absorbed by it
    order = sorted(range(len(merged)), key=lambda i: (-merged[i].box.area, i))
    centers: list[int] = []
    for i in order:
        absorbed = any(
            containment_ratio(merged[j].box, merged[i].box) >= CLUSTER_COVER_THRESHOLD
            for j in centers
        )
        if not absorbed:
            centers.append(i)
    centers.sort()
    survivors = nms([merged[i] for i in centers], NMS_IOU_THRESHOLD)
    return [
        Proposal(
            box=p.box,
            suggested_class=p.argmax_class,
            source=p.role,
            confidence=p.confidence,
        )
        for p in survivors
        if p.confidence >= PROPOSAL_CONFIDENCE_THRESHOLD
    ]


def quality_flag(iou_with_gt: float) -> int | None:
    """Binary precision grade; None when the overlap is too poor to select."""
    if not 0.0 <= iou_with_gt <= 1.0:
        raise ValueError(f"iou out of range: {iou_with_gt}")
    if iou_with_gt >= PRECISE_IOU_THRESHOLD:
        return 1
    if iou_with_gt > SELECT_IOU_THRESHOLD:
        return 0
    return None


def _acceptable(proposal: Proposal, gt_box: BBox) -> bool:
    if iou(proposal.box, gt_box) <= SELECT_IOU_THRESHOLD:
        return False
    return any(proposal.box.contains_point(p) for p in extreme_points(gt_box))


def simulate_session(
    proposals: Sequence[Proposal],
    gt: FullLabel,
    cost: CostModel = CostModel(),
) -> SessionResult:
    """Flawless annotator: every ground-truth object ends up labeled once.

    Objects are handled in descending order of their best proposal IoU; each
    claims its best unclaimed proposal when that proposal overlaps > 0.5 IoU
    and contains a ground-truth extreme point, otherwise a tight box is drawn.
    Leftover proposals are removed at zero cost.
    """
    best_iou = []
    for k, obj in enumerate(gt.objects):
        b = max((iou(p.box, obj.box) for p in proposals), default=0.0)
        best_iou.append((-b, k))
    order = [k for _, k in sorted(best_iou)]

    claimed: set[int] = set()
    actions: list[Action] = []
    labeled: dict[int, LabeledObject] = {}
    for k in order:
        obj = gt.objects[k]
        best_idx, best = -1, 0.0
        for i, p in enumerate(proposals):
            if i in claimed:
                continue
            v = iou(p.box, obj.box)
            if v > best:
                best_idx, best = i, v
        if best_idx >= 0 and _acceptable(proposals[best_idx], obj.box):
            claimed.add(best_idx)
            flag = quality_flag(best)
            assert flag is not None
            proposal = proposals[best_idx]
            labeled[k] = LabeledObject(box=proposal.box, class_id=obj.class_id, quality=flag)
            actions.append(
                Action(
                    kind="selected",
                    proposal_index=best_idx,
                    class_id=obj.class_id,
                    quality=flag,
                    seconds=cost.select_seconds,
                    class_corrected=proposal.suggested_class != obj.class_id,
                )
            )
        else:
            labeled[k] = LabeledObject(box=obj.box, class_id=obj.class_id, quality=1)
            actions.append(
                Action(
                    kind="drawn",
                    proposal_index=None,
                    class_id=obj.class_id,
                    quality=1,
                    seconds=cost.draw_seconds,
                )
            )
    for i, p in enumerate(proposals):
        if i not in claimed:
            actions.append(
                Action(
                    kind="removed",
                    proposal_index=i,
                    class_id=p.suggested_class,
                    quality=0,
                    seconds=0.0,
                )
            )
    label = FullLabel(tuple(labeled[k] for k in range(len(gt.objects))))
    total = sum(a.seconds for a in actions)
    return SessionResult(label=label, actions=tuple(actions), total_seconds=total)


def actions_to_json(actions: Sequence[Action]) -> list[dict]:
    return [
        {
            "kind": a.kind,
            "proposal_index": a.proposal_index,
            "class": a.class_id,
            "quality": a.quality,
            "seconds": a.seconds,
            "class_corrected": a.class_corrected,
        }
        for a in actions
    ]
