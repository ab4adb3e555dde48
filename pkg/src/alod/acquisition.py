"""Acquisition scoring of weakly labeled images and batch selection."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .datastore import DatasetVersion, WeakLabel
from .evaluation import Prediction, average_precision


class Strategy(str, Enum):
    PRODUCT = "product"
    SUM = "sum"
    UNIFORM = "uniform"
    ENTROPY_SUM = "entropy_sum"


@dataclass(frozen=True)
class AcqScore:
    image_id: str
    beta_md: float
    beta_iu: float
    fused: float


def model_disagreement(
    student_preds: Sequence[Prediction],
    teacher_preds: Sequence[Prediction],
    weak: WeakLabel,
) -> float:
    """1 minus the mean per-weak-class AP of student predictions scored
    against teacher predictions taken as ground truth (at IoU 0.5).

    A class on which both models are silent counts as full agreement (AP 1).
    """
    teacher_gts = [(p.box, p.argmax_class) for p in teacher_preds]
    total = 0.0
    for c in weak.classes:
        total += average_precision([student_preds], [teacher_gts], c, tau=0.5)
    return 1.0 - total / len(weak.classes)


def image_uncertainty(
    teacher_preds: Sequence[Prediction], num_classes: int
) -> float:
    """Maximum class-distribution entropy over the teacher's predictions.

    An image where the teacher predicts nothing is treated as maximally
    uncertain (ln C).
    """
    if not teacher_preds:
        return math.log(num_classes)
    return max(p.entropy() for p in teacher_preds)


def fuse(beta_md: float, beta_iu: float, mode: Strategy) -> float:
    if mode is Strategy.PRODUCT:
        return beta_md * beta_iu
    if mode is Strategy.SUM:
        return beta_md + beta_iu
    raise ValueError(f"strategy {mode.value!r} does not fuse component scores")


def select_batch(
    version: DatasetVersion,
    budget: int,
    strategy: Strategy,
    scores: Mapping[str, AcqScore] | None = None,
    entropy_sums: Mapping[str, float] | None = None,
    rng: np.random.Generator | None = None,
) -> frozenset[str]:
    """Pick the acquisition batch from the weak set.

    product/sum take the top-budget fused scores (ties to the lower image
    id); entropy_sum ranks by summed per-prediction entropy; uniform samples
    without replacement from the provided generator.
    """
    weak = sorted(version.weak_ids)
    if budget > len(weak):
        raise ValueError(f"budget {budget} exceeds weak set size {len(weak)}")
    if strategy is Strategy.UNIFORM:
        if rng is None:
            raise ValueError("uniform strategy needs an rng")
        picked = rng.choice(len(weak), size=budget, replace=False)
        return frozenset(weak[i] for i in picked)
    if strategy is Strategy.ENTROPY_SUM:
        if entropy_sums is None:
            raise ValueError("entropy_sum strategy needs per-image entropy sums")
        ranked = sorted(weak, key=lambda i: (-entropy_sums[i], i))
        return frozenset(ranked[:budget])
    if scores is None:
        raise ValueError(f"{strategy.value} strategy needs fused scores")
    ranked = sorted(weak, key=lambda i: (-scores[i].fused, i))
    return frozenset(ranked[:budget])


def write_scores_csv(path: str | Path, scores: Sequence[AcqScore]) -> None:
    """Rank-ordered CSV export (image_id, beta_md, beta_iu, fused, rank)."""
    ranked = sorted(scores, key=lambda s: (-s.fused, s.image_id))
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "beta_md", "beta_iu", "fused", "rank"])
        for rank, s in enumerate(ranked, 1):
            writer.writerow(
                [s.image_id, repr(s.beta_md), repr(s.beta_iu), repr(s.fused), rank]
            )
