"""Pseudo-label filtering: bipartite matching of teacher predictions to weak
class sets or to imprecise full labels, plus imprecise-box refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .datastore import ClassId, FullLabel, LabeledObject, WeakLabel
from .evaluation import Prediction
from .geometry import BBox, giou

DEFAULT_DELTA = 0.7
DEFAULT_LAMBDA_IOU = 2.0
DEFAULT_LAMBDA_L1 = 5.0
DEFAULT_INTERP_WEIGHT = 0.5


@dataclass(frozen=True)
class PseudoObject:
    box: BBox
    class_id: ClassId
    quality: float


@dataclass(frozen=True)
class PseudoLabel:
    objects: tuple[PseudoObject, ...]
    dropped_slots: int = 0  # slots beyond the prediction count, reported not matched
    unmatched_passthrough: int = 0  # imprecise boxes left unrefined for lack of preds


def hungarian(costs: np.ndarray) -> tuple[list[int], float]:
    """Minimum-cost injective row->column assignment.

    Among cost-optimal assignments, returns the lexicographically smallest
    column sequence. Requires rows <= cols and a non-empty matrix.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.size == 0:
        raise ValueError("empty cost matrix")
    n_rows, n_cols = costs.shape
    if n_rows > n_cols:
        raise ValueError(f"more rows than columns: {n_rows} > {n_cols}")
    if not np.all(np.isfinite(costs)):
        raise ValueError("cost matrix entries must be finite")

    rows, cols = linear_sum_assignment(costs)
    optimal = float(costs[rows, cols].sum())
    eps = 1e-9

    # Refine scipy's solution to the lexicographically smallest optimum: fix
    # rows in order, trying only columns smaller than the known-achievable
    # one, with a column-minima lower bound screening out most candidates
    # before the exact subproblem is solved.
    current = list(cols)  # current[r] = achievable column for row r
    assignment: list[int] = []
    used: set[int] = set()
    spent = 0.0
    for row in range(n_rows):
        chosen = current[row]
        remaining = list(range(row + 1, n_rows))
        for col in range(n_cols):
            if col >= chosen:
                break
            if col in used:
                continue
            candidate = spent + costs[row, col]
            if remaining:
                free = [c for c in range(n_cols) if c != col and c not in used]
                sub = costs[remaining][:, free]
                if candidate + float(sub.min(axis=1).sum()) > optimal + eps:
                    continue
                r, c = linear_sum_assignment(sub)
                if candidate + float(sub[r, c].sum()) > optimal + eps:
                    continue
                for rr, cc in zip(r, c):
                    current[remaining[rr]] = free[cc]
            elif candidate > optimal + eps:
                continue
            chosen = col
            break
        assignment.append(chosen)
        used.add(chosen)
        spent += float(costs[row, chosen])
    return assignment, optimal


def predict_counts(
    teacher_preds: Sequence[Prediction], weak: WeakLabel, delta: float = DEFAULT_DELTA
) -> dict[ClassId, int]:
    """Per weak class, the number of predictions with class probability above
    delta, floored at 1 (every present class has at least one object)."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    return {
        c: max(1, sum(1 for p in teacher_preds if p.class_dist[c] > delta))
        for c in sorted(weak.classes)
    }


def filter_weak(
    teacher_preds: Sequence[Prediction],
    weak: WeakLabel,
    delta: float = DEFAULT_DELTA,
) -> PseudoLabel:
    """Match teacher predictions to repeated weak-class slots.

    Slot for class c vs prediction o costs 1 - pr_o(c); the matched
    prediction's box becomes the pseudo box and its class probability the
    quality score. With no predictions there is nothing to match: the result
    is empty and flags the condition via dropped_slots.
    """
    counts = predict_counts(teacher_preds, weak, delta)
    slots: list[ClassId] = []
    for c in sorted(counts):
        slots.extend([c] * counts[c])
    if not teacher_preds:
        return PseudoLabel(objects=(), dropped_slots=len(slots))

    dropped = 0
    if len(slots) > len(teacher_preds):
        # fewer predictions than slots: drop surplus slots, oldest class first
        dropped = len(slots) - len(teacher_preds)
        slots = slots[dropped:]

    costs = np.array(
        [[1.0 - p.class_dist[c] for p in teacher_preds] for c in slots]
    )
    assignment, _ = hungarian(costs)
    objects = tuple(
        PseudoObject(
            box=teacher_preds[o].box,
            class_id=c,
            quality=teacher_preds[o].class_dist[c],
        )
        for c, o in zip(slots, assignment)
    )
    return PseudoLabel(objects=objects, dropped_slots=dropped)


def _l1_normalized(a: BBox, b: BBox, width: float, height: float) -> float:
    return (
        abs(a.x_min - b.x_min) / width
        + abs(a.x_max - b.x_max) / width
        + abs(a.y_min - b.y_min) / height
        + abs(a.y_max - b.y_max) / height
    )


def interpolate_box(imprecise: BBox, matched: BBox, w: float) -> BBox:
    """Per-corner convex combination: w=1 trusts the matched box fully."""
    return BBox(
        w * matched.x_min + (1.0 - w) * imprecise.x_min,
        w * matched.y_min + (1.0 - w) * imprecise.y_min,
        w * matched.x_max + (1.0 - w) * imprecise.x_max,
        w * matched.y_max + (1.0 - w) * imprecise.y_max,
    )


def filter_full(
    teacher_preds: Sequence[Prediction],
    full: FullLabel,
    lambda_iou: float = DEFAULT_LAMBDA_IOU,
    lambda_l1: float = DEFAULT_LAMBDA_L1,
    w: float = DEFAULT_INTERP_WEIGHT,
    image_width: float = 1.0,
    image_height: float = 1.0,
) -> PseudoLabel:
    """Refine imprecise (quality 0) boxes by matching them to teacher
    predictions and interpolating; precise boxes pass through unchanged."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"interpolation weight must be in [0,1], got {w}")
    imprecise = [(k, obj) for k, obj in enumerate(full.objects) if obj.quality == 0]
    refined: dict[int, BBox] = {}
    unmatched = 0
    if imprecise and len(teacher_preds) >= len(imprecise):
        costs = np.array(
            [
                [
                    lambda_iou * (1.0 - giou(p.box, obj.box))
                    + lambda_l1 * _l1_normalized(p.box, obj.box, image_width, image_height)
                    for p in teacher_preds
                ]
                for _, obj in imprecise
            ]
        )
        assignment, _ = hungarian(costs)
        for (k, obj), o in zip(imprecise, assignment):
            refined[k] = interpolate_box(obj.box, teacher_preds[o].box, w)
    else:
        unmatched = len(imprecise)

    objects = tuple(
        PseudoObject(
            box=refined.get(k, obj.box),
            class_id=obj.class_id,
            quality=float(obj.quality),
        )
        for k, obj in enumerate(full.objects)
    )
    return PseudoLabel(objects=objects, unmatched_passthrough=unmatched)


def pseudo_to_full(pseudo: PseudoLabel, quality_threshold: float = 0.9) -> FullLabel:
    """View a pseudo label as a full label, binarizing soft quality scores."""
    return FullLabel(
        tuple(
            LabeledObject(
                box=o.box,
                class_id=o.class_id,
                quality=1 if o.quality >= quality_threshold else 0,
            )
            for o in pseudo.objects
        )
    )
