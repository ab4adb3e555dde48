"""Active-learning loop orchestration.

One run: sample the warm-start batch, synthesize the auxiliary set from it,
burn in the student, duplicate the teacher, then alternate acquisition,
annotation, promotion, and fine-tuning for a fixed number of cycles while
recording the teacher's held-out metrics and the cumulative annotation cost.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import acquisition, annotate, datastore, detector, pseudolabel, synth
from .acquisition import AcqScore, Strategy
from .annotate import CostModel
from .datastore import DatasetVersion, FullLabel, ImageRecord, WeakLabel
from .detector import NoiseConfig, SkillState
from .evaluation import Prediction, map50_and_map, per_class_ap


@dataclass(frozen=True)
class LoopConfig:
    n_images: int = 300
    num_classes: int = 6
    cycles: int = 5
    budget: int = 10
    strategy: Strategy = Strategy.PRODUCT
    seed: int = 0
    a0_size: int = 50
    delta: float = 0.7
    q: float = 0.9996
    # EMA applications per fine-tune pass; stands in for the per-iteration
    # updates a real training cycle would apply
    ema_steps_per_cycle: int = 4000
    multiplier: float = 2.0
    aux_objects_range: tuple[int, int] = (1, 12)
    background_count: int = 10
    extent: tuple[int, int] = (640, 480)
    world_objects_range: tuple[int, int] = (1, 6)
    class_weights: tuple[float, ...] | None = None
    eta_full: float = 0.06  # skill gain per human-labeled instance
    eta_aux: float = 0.003  # per synthetic instance (domain-shift discount)
    kappa: float = 0.1
    inner_iterations: int = 1
    heldout_fraction: float = 0.2
    interp_weight: float = 0.5
    lambda_iou: float = 2.0
    lambda_l1: float = 5.0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    cost: CostModel = field(default_factory=CostModel)

    def __post_init__(self):
        if self.cycles < 1 or self.budget < 1:
            raise ValueError("cycles and budget must be >= 1")
        if self.a0_size + self.budget * self.cycles > self.n_images:
            raise ValueError("warm start plus total budget exceeds the dataset size")

    def to_json(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, (NoiseConfig, CostModel)):
                out[key] = dict(value.__dict__)
            elif isinstance(value, Strategy):
                out[key] = value.value
            elif isinstance(value, tuple):
                out[key] = list(value)
            else:
                out[key] = value
        return out


@dataclass(frozen=True)
class CycleReport:
    t: int
    acquired: tuple[str, ...]
    ap50: float
    ap: float
    per_class: tuple[float, ...]
    cumulative_seconds: float

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "acquired": list(self.acquired),
            "ap50": self.ap50,
            "ap": self.ap,
            "per_class_ap50": list(self.per_class),
            "cumulative_seconds": self.cumulative_seconds,
        }


@dataclass
class LoopState:
    config: LoopConfig
    records: dict[str, ImageRecord]
    version: DatasetVersion
    student: SkillState
    teacher: SkillState
    heldout: list[ImageRecord]
    cumulative_seconds: float = 0.0
    reports: list[CycleReport] = field(default_factory=list)
    pending: frozenset[str] = frozenset()
    pending_scores: dict[str, AcqScore] = field(default_factory=dict)

    @property
    def t(self) -> int:
        # cycle index: the warm-start promote already advanced the version once
        return self.version.t - 1

    def clone(self) -> "LoopState":
        return copy.deepcopy(self)


def _teacher_predict(state: LoopState, record: ImageRecord) -> list[Prediction]:
    return detector.predict(state.teacher, record, "teacher", state.config.noise)


def _student_predict(state: LoopState, record: ImageRecord) -> list[Prediction]:
    return detector.predict(state.student, record, "student", state.config.noise)


def score_weak_images(
    state: LoopState,
) -> tuple[dict[str, AcqScore], dict[str, float], dict[str, list[Prediction]], dict[str, list[Prediction]]]:
    """Score every weak image; also returns the prediction caches and the
    per-image entropy sums used by the entropy-sum baseline."""
    cfg = state.config
    scores: dict[str, AcqScore] = {}
    entropy_sums: dict[str, float] = {}
    teacher_cache: dict[str, list[Prediction]] = {}
    student_cache: dict[str, list[Prediction]] = {}
    for image_id in sorted(state.version.weak_ids):
        record = state.records[image_id]
        assert isinstance(record.label, WeakLabel)
        t_preds = _teacher_predict(state, record)
        s_preds = _student_predict(state, record)
        teacher_cache[image_id] = t_preds
        student_cache[image_id] = s_preds
        beta_md = acquisition.model_disagreement(s_preds, t_preds, record.label)
        beta_iu = acquisition.image_uncertainty(t_preds, cfg.num_classes)
        fused = acquisition.fuse(
            beta_md,
            beta_iu,
            cfg.strategy if cfg.strategy in (Strategy.PRODUCT, Strategy.SUM) else Strategy.PRODUCT,
        )
        scores[image_id] = AcqScore(image_id, beta_md, beta_iu, fused)
        entropy_sums[image_id] = sum(p.entropy() for p in t_preds)
    return scores, entropy_sums, teacher_cache, student_cache


def _evaluate(state: LoopState) -> tuple[float, float, list[float]]:
    preds = [_teacher_predict(state, r) for r in state.heldout]
    gts = [
        [(o.box, o.class_id) for o in r.ground_truth.objects] for r in state.heldout
    ]
    ap50, ap = map50_and_map(preds, gts, state.config.num_classes)
    per_class = per_class_ap(preds, gts, state.config.num_classes)
    return ap50, ap, per_class


def _pseudo_counts(
    state: LoopState, teacher_cache: Mapping[str, list[Prediction]]
) -> dict[int, int]:
    """Per-class counts of confident pseudo objects over the weak set."""
    counts: dict[int, int] = {}
    for image_id in sorted(state.version.weak_ids):
        record = state.records[image_id]
        assert isinstance(record.label, WeakLabel)
        preds = teacher_cache[image_id]
        pseudo = pseudolabel.filter_weak(preds, record.label, state.config.delta)
        for obj in pseudo.objects:
            if obj.quality > detector.PSEUDO_QUALITY_THRESHOLD:
                counts[obj.class_id] = counts.get(obj.class_id, 0) + 1
    return counts


def make_backgrounds(config: LoopConfig) -> list[tuple[str, int, int]]:
    w, h = config.extent
    return [(f"bg_{i:03d}", w, h) for i in range(config.background_count)]


def run_initial(
    config: LoopConfig, records: dict[str, ImageRecord] | None = None
) -> LoopState:
    """Warm start: draw-annotate a uniform seed batch, synthesize the
    auxiliary set from it, burn in, and run one semi-supervised round."""
    root = np.random.SeedSequence(config.seed)
    world_ss, a0_ss, aux_ss, heldout_ss = root.spawn(4)

    if records is None:
        world = synth.generate_world(
            config.n_images,
            config.num_classes,
            np.random.default_rng(world_ss),
            class_weights=config.class_weights,
            extent=config.extent,
            objects_range=config.world_objects_range,
        )
        records = {r.id: r for r in world}
    heldout = synth.generate_world(
        round(config.heldout_fraction * config.n_images),
        config.num_classes,
        np.random.default_rng(heldout_ss),
        class_weights=config.class_weights,
        extent=config.extent,
        objects_range=config.world_objects_range,
        id_prefix="heldout",
    )
    version = DatasetVersion(
        t=0, weak_ids=frozenset(records), full_ids=frozenset()
    )

    a0_rng = np.random.default_rng(a0_ss)
    all_ids = sorted(records)
    a0 = frozenset(
        all_ids[i]
        for i in a0_rng.choice(len(all_ids), size=config.a0_size, replace=False)
    )

    # the warm-start batch is annotated from scratch: every box is drawn
    a0_labels: dict[str, FullLabel] = {}
    drawn_seconds = 0.0
    for image_id in sorted(a0):
        gt = records[image_id].ground_truth
        a0_labels[image_id] = gt
        drawn_seconds += len(gt.objects) * config.cost.draw_seconds

    a0_full_records = [
        replace(records[i], label=a0_labels[i]) for i in sorted(a0)
    ]
    aux = synth.generate_auxiliary(
        a0_full_records,
        make_backgrounds(config),
        n_real=config.n_images,
        multiplier=config.multiplier,
        rng=np.random.default_rng(aux_ss),
        objects_range=config.aux_objects_range,
    )
    student, teacher = detector.burn_in(
        aux, config.num_classes, eta=config.eta_aux, seed=config.seed
    )

    state = LoopState(
        config=config,
        records=records,
        version=version,
        student=student,
        teacher=teacher,
        heldout=heldout,
        cumulative_seconds=drawn_seconds,
    )

    # one semi-supervised round over the auxiliary counts plus discounted
    # pseudo counts from the weak set, then an EMA pass
    aux_counts: dict[int, int] = {}
    for r in aux:
        assert isinstance(r.label, FullLabel)
        for c, n in r.label.class_counts().items():
            aux_counts[c] = aux_counts.get(c, 0) + n
    teacher_cache = {
        i: _teacher_predict(state, records[i]) for i in sorted(version.weak_ids)
    }
    pseudo_counts = _pseudo_counts(state, teacher_cache)
    state.student = detector.train_update(
        state.student,
        detector.TrainSignal(
            full_counts={c: 0 for c in aux_counts}, pseudo_counts=pseudo_counts
        ),
        eta=config.eta_full,
        kappa=config.kappa,
    )
    state.student = detector.train_update(
        state.student, detector.TrainSignal(full_counts=aux_counts), eta=config.eta_aux
    )
    state.teacher = detector.ema_update_n(
        state.teacher, state.student, config.q, config.ema_steps_per_cycle
    )

    # promote the warm-start batch into the full set
    state.records = datastore.apply_full_labels(state.records, a0_labels)
    state.version = datastore.promote(version, a0, a0_labels)

    ap50, ap, per_class = _evaluate(state)
    state.reports.append(
        CycleReport(
            t=0,
            acquired=tuple(sorted(a0)),
            ap50=ap50,
            ap=ap,
            per_class=tuple(per_class),
            cumulative_seconds=state.cumulative_seconds,
        )
    )
    return state


def select_acquisition(
    state: LoopState,
) -> tuple[frozenset[str], dict[str, AcqScore], dict[str, list[Prediction]], dict[str, list[Prediction]]]:
    """Score the weak set and pick the next batch under the configured strategy."""
    cfg = state.config
    scores, entropy_sums, teacher_cache, student_cache = score_weak_images(state)
    rng = np.random.default_rng(
        np.random.SeedSequence([cfg.seed, 1000 + state.t])
    )
    batch = acquisition.select_batch(
        state.version,
        cfg.budget,
        cfg.strategy,
        scores=scores,
        entropy_sums=entropy_sums,
        rng=rng,
    )
    return batch, scores, teacher_cache, student_cache


def finish_cycle(
    state: LoopState,
    batch: frozenset[str],
    labels: Mapping[str, FullLabel],
    session_seconds: float,
    teacher_cache: Mapping[str, list[Prediction]],
) -> CycleReport:
    """Promote the annotated batch and fine-tune the pair; mutates state."""
    cfg = state.config
    state.cumulative_seconds += session_seconds
    state.version = datastore.promote(state.version, batch, labels)

    # refine imprecise boxes in the new labels before counting them
    refined_labels: dict[str, FullLabel] = {}
    full_counts: dict[int, int] = {}
    for image_id in sorted(batch):
        label = labels[image_id]
        if any(o.quality == 0 for o in label.objects):
            record = state.records[image_id]
            preds = teacher_cache.get(image_id) or _teacher_predict(state, record)
            pseudo = pseudolabel.filter_full(
                preds,
                label,
                lambda_iou=cfg.lambda_iou,
                lambda_l1=cfg.lambda_l1,
                w=cfg.interp_weight,
                image_width=record.width,
                image_height=record.height,
            )
            label = pseudolabel.pseudo_to_full(pseudo)
        refined_labels[image_id] = label
        for c, n in label.class_counts().items():
            full_counts[c] = full_counts.get(c, 0) + n
    state.records = datastore.apply_full_labels(state.records, refined_labels)

    for _ in range(cfg.inner_iterations):
        pseudo_counts = _pseudo_counts(state, teacher_cache)
        state.student = detector.train_update(
            state.student,
            detector.TrainSignal(full_counts=full_counts, pseudo_counts=pseudo_counts),
            eta=cfg.eta_full,
            kappa=cfg.kappa,
        )
        state.teacher = detector.ema_update_n(
            state.teacher, state.student, cfg.q, cfg.ema_steps_per_cycle
        )

    ap50, ap, per_class = _evaluate(state)
    report = CycleReport(
        t=state.t,
        acquired=tuple(sorted(batch)),
        ap50=ap50,
        ap=ap,
        per_class=tuple(per_class),
        cumulative_seconds=state.cumulative_seconds,
    )
    state.reports.append(report)
    return report


def run_cycle(state: LoopState) -> CycleReport:
    """One full cycle with the simulated annotator; mutates state."""
    batch, _, teacher_cache, student_cache = select_acquisition(state)
    labels: dict[str, FullLabel] = {}
    seconds = 0.0
    for image_id in sorted(batch):
        record = state.records[image_id]
        proposals = annotate.prepare_proposals(
            student_cache[image_id], teacher_cache[image_id]
        )
        session = annotate.simulate_session(
            proposals, record.ground_truth, state.config.cost
        )
        labels[image_id] = session.label
        seconds += session.total_seconds
    # drop cached predictions for images leaving the weak set
    cache = {i: p for i, p in teacher_cache.items() if i not in batch}
    return finish_cycle(state, batch, labels, seconds, cache)


def run_simulation(config: LoopConfig) -> LoopState:
    state = run_initial(config)
    for _ in range(config.cycles):
        run_cycle(state)
    return state


def run_comparison(
    config: LoopConfig,
    strategies: Sequence[Strategy],
    seeds: Sequence[int],
    progress: Callable[[str], None] | None = None,
) -> dict[Strategy, dict[int, list[CycleReport]]]:
    """Run each strategy on the identical seeded world with a shared warm start."""
    if len(strategies) < 2:
        raise ValueError("comparison needs at least two strategies")
    results: dict[Strategy, dict[int, list[CycleReport]]] = {s: {} for s in strategies}
    for seed in seeds:
        base = run_initial(replace(config, seed=seed))
        for strategy in strategies:
            state = base.clone()
            state.config = replace(config, seed=seed, strategy=strategy)
            for _ in range(config.cycles):
                run_cycle(state)
            results[strategy][seed] = state.reports
            if progress:
                progress(f"seed {seed} strategy {strategy.value}: "
                         f"final AP50 {state.reports[-1].ap50:.4f}")
    return results


# ---------------------------------------------------------------------------
# Run artifacts


def write_reports(out_dir: str | Path, state: LoopState) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(
        json.dumps(state.config.to_json(), indent=2, sort_keys=True) + "\n"
    )
    for report in state.reports:
        (out / f"cycle_{report.t:03d}.json").write_text(
            json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
        )
    with (out / "curves.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "ap50", "ap", "cumulative_seconds"])
        for report in state.reports:
            writer.writerow(
                [report.t, repr(report.ap50), repr(report.ap), repr(report.cumulative_seconds)]
            )


def write_comparison_csv(
    path: str | Path, results: dict[Strategy, dict[int, list[CycleReport]]]
) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "seed", "t", "ap50", "ap"])
        for strategy in sorted(results, key=lambda s: s.value):
            for seed in sorted(results[strategy]):
                for report in results[strategy][seed]:
                    writer.writerow(
                        [strategy.value, seed, report.t, repr(report.ap50), repr(report.ap)]
                    )


def read_comparison_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return [
            {
                "strategy": row["strategy"],
                "seed": int(row["seed"]),
                "t": int(row["t"]),
                "ap50": float(row["ap50"]),
                "ap": float(row["ap"]),
            }
            for row in csv.DictReader(fh)
        ]
