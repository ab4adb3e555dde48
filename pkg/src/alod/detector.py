"""Surrogate student/teacher detector.

Per-class skill in [0,1] stands in for network parameters: training updates
raise skill, the teacher tracks the student by exponential moving average,
and prediction quality (recall, box jitter, class confusion, false positives)
degrades smoothly as skill drops. All noise constants live in NoiseConfig so
experiments pin one block of numbers.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .datastore import ClassId, FullLabel, ImageRecord
from .evaluation import Prediction
from .geometry import BBox

DEFAULT_EMA_RATE = 0.9996
PSEUDO_QUALITY_THRESHOLD = 0.7


@dataclass(frozen=True)
class NoiseConfig:
    recall_floor: float = 0.2  # recall at zero skill; recall = floor + (1-floor)*s
    jitter_scale: float = 0.25  # box noise sigma = jitter_scale*(1-s)*box size
    confusion_scale: float = 0.6  # uniform mixing u = confusion_scale*(1-s)
    swap_scale: float = 0.3  # argmax swap probability = swap_scale*(1-s)
    fp_rate: float = 1.0  # Poisson mean = fp_rate*(1 - mean skill)


@dataclass(frozen=True)
class SkillState:
    skills: tuple[float, ...]
    fp_rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if any(not 0.0 <= s <= 1.0 for s in self.skills):
            raise ValueError("skills must lie in [0,1]")

    @property
    def num_classes(self) -> int:
        return len(self.skills)

    @property
    def mean_skill(self) -> float:
        return sum(self.skills) / len(self.skills)


@dataclass(frozen=True)
class TrainSignal:
    full_counts: Mapping[ClassId, int]
    pseudo_counts: Mapping[ClassId, int] = field(default_factory=dict)


def train_update(
    skill: SkillState, signal: TrainSignal, eta: float, kappa: float = 0.5
) -> SkillState:
    """Saturating skill update: s <- 1 - (1-s)*exp(-eta*(full + kappa*pseudo)).

    Monotone in the counts, never leaves [0,1], and order-independent when
    counts from one cycle are summed before the call.
    """
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must be in [0,1], got {kappa}")
    new = []
    for c, s in enumerate(skill.skills):
        weight = signal.full_counts.get(c, 0) + kappa * signal.pseudo_counts.get(c, 0)
        if weight == 0:
            new.append(s)
        else:
            new.append(1.0 - (1.0 - s) * float(np.exp(-eta * weight)))
    return replace(skill, skills=tuple(new))


def ema_update(teacher: SkillState, student: SkillState, q: float = DEFAULT_EMA_RATE) -> SkillState:
    """teacher <- q*teacher + (1-q)*student, per class."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0,1), got {q}")
    skills = tuple(q * t + (1.0 - q) * s for t, s in zip(teacher.skills, student.skills))
    return replace(teacher, skills=skills)


def ema_update_n(teacher: SkillState, student: SkillState, q: float, n: int) -> SkillState:
    """n EMA steps against a constant student, via the closed geometric form."""
    decay = q**n
    skills = tuple(
        s + decay * (t - s) for t, s in zip(teacher.skills, student.skills)
    )
    return replace(teacher, skills=skills)


def _image_rng(skill: SkillState, image_id: str, role: str) -> np.random.Generator:
    # independent stream per (seed, image, role) so student/teacher noise is
    # uncorrelated and repeated calls are reproducible
    tag = zlib.crc32(f"{image_id}/{role}".encode())
    return np.random.default_rng(np.random.SeedSequence([skill.seed, tag]))


def _jitter_box(
    box: BBox, sigma_frac: float, extent: tuple[float, float], rng: np.random.Generator
) -> BBox:
    if sigma_frac == 0.0:
        return box
    sx = sigma_frac * box.width
    sy = sigma_frac * box.height
    noise = rng.normal(0.0, 1.0, size=4)
    x0 = box.x_min + sx * noise[0]
    y0 = box.y_min + sy * noise[1]
    x1 = box.x_max + sx * noise[2]
    y1 = box.y_max + sy * noise[3]
    # repair: keep corners ordered and inside the image with a minimum size
    w, h = extent
    x0, x1 = min(x0, x1), max(x0, x1)
    y0, y1 = min(y0, y1), max(y0, y1)
    x0 = min(max(x0, 0.0), w - 1e-3)
    y0 = min(max(y0, 0.0), h - 1e-3)
    x1 = min(max(x1, x0 + 1e-3), w)
    y1 = min(max(y1, y0 + 1e-3), h)
    return BBox(x0, y0, x1, y1)


def predict(
    skill: SkillState,
    record: ImageRecord,
    role: str,
    noise: NoiseConfig = NoiseConfig(),
) -> list[Prediction]:
    """Emit noisy detections for a record's ground truth.

    Per object of class c: emitted with probability floor + (1-floor)*s_c,
    box jittered at sigma = jitter*(1-s_c)*size, class distribution mixed
    toward uniform by u = confusion*(1-s_c) with a swap_scale*(1-s_c) chance
    of an argmax swap. False positives follow a Poisson whose mean shrinks
    with mean skill. At skill 1 everywhere the output is exactly the ground
    truth with one-hot classes and confidence 1.
    """
    rng = _image_rng(skill, record.id, role)
    C = skill.num_classes
    extent = (float(record.width), float(record.height))
    preds: list[Prediction] = []

    for obj in record.ground_truth.objects:
        s = skill.skills[obj.class_id]
        if rng.random() > noise.recall_floor + (1.0 - noise.recall_floor) * s:
            continue
        box = _jitter_box(obj.box, noise.jitter_scale * (1.0 - s), extent, rng)
        u = noise.confusion_scale * (1.0 - s)
        dist = np.full(C, u / C)
        dist[obj.class_id] += 1.0 - u
        if C > 1 and rng.random() < noise.swap_scale * (1.0 - s):
            other = int(rng.integers(C - 1))
            if other >= obj.class_id:
                other += 1
            dist[obj.class_id], dist[other] = dist[other], dist[obj.class_id]
        dist /= dist.sum()
        preds.append(
            Prediction(
                box=box,
                class_dist=tuple(dist.tolist()),
                confidence=float(dist.max()),
                role=role,
            )
        )

    fp_mean = skill.fp_rate * noise.fp_rate * (1.0 - skill.mean_skill)
    for _ in range(int(rng.poisson(fp_mean))):
        w, h = extent
        bw = rng.uniform(0.05, 0.4) * w
        bh = rng.uniform(0.05, 0.4) * h
        x0 = rng.uniform(0.0, w - bw)
        y0 = rng.uniform(0.0, h - bh)
        dist = rng.uniform(0.8, 1.2, size=C)
        dist /= dist.sum()
        preds.append(
            Prediction(
                box=BBox(x0, y0, x0 + bw, y0 + bh),
                class_dist=tuple(dist.tolist()),
                confidence=float(dist.max()),
                role=role,
            )
        )
    return preds


def burn_in(
    aux_records: Sequence[ImageRecord],
    num_classes: int,
    eta: float,
    init_skill: float = 0.0,
    fp_rate: float = 1.0,
    seed: int = 0,
) -> tuple[SkillState, SkillState]:
    """Train a fresh student on the auxiliary full labels, then duplicate it
    as the teacher."""
    if not aux_records:
        raise ValueError("burn-in needs a non-empty auxiliary dataset")
    counts: dict[ClassId, int] = {}
    for record in aux_records:
        label = record.label
        if not isinstance(label, FullLabel):
            raise ValueError(f"auxiliary record {record.id!r} is not fully labeled")
        for c, n in label.class_counts().items():
            counts[c] = counts.get(c, 0) + n
    student = SkillState(
        skills=(init_skill,) * num_classes, fp_rate=fp_rate, seed=seed
    )
    student = train_update(student, TrainSignal(full_counts=counts), eta=eta)
    teacher = replace(student)  # exact duplicate; role tags keep noise streams apart
    return student, teacher
