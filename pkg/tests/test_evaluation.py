import numpy as np
import pytest

from alod.evaluation import (
    Prediction,
    average_precision,
    map50_and_map,
    match_greedy,
    nms,
)
from alod.geometry import BBox, iou


def pred(box, cls, conf, C=3, role="teacher"):
    dist = [(1.0 - conf) / (C - 1)] * C
    dist[cls] = conf
    return Prediction(box=BBox(*box), class_dist=tuple(dist), confidence=conf, role=role)


def random_scene(rng, n_preds=None, n_gts=None, C=3):
    n_preds = int(rng.integers(0, 8)) if n_preds is None else n_preds
    n_gts = int(rng.integers(0, 6)) if n_gts is None else n_gts

    def rand_box():
        x0, y0 = rng.uniform(0, 80, 2)
        w, h = rng.uniform(5, 30, 2)
        return (x0, y0, x0 + w, y0 + h)

    preds = [
        pred(rand_box(), int(rng.integers(C)), float(rng.uniform(0.4, 0.99)), C)
        for _ in range(n_preds)
    ]
    gts = [(BBox(*rand_box()), int(rng.integers(C))) for _ in range(n_gts)]
    return preds, gts


def oracle_ap(preds, gts, class_id, tau):
    """Threshold-enumeration AP, matched independently of the library path."""
    cls_preds = sorted(
        (p for p in preds if p.argmax_class == class_id),
        key=lambda p: -p.confidence,
    )
    cls_gts = [b for b, c in gts if c == class_id]
    if not cls_gts:
        return 1.0 if not cls_preds else 0.0
    if not cls_preds:
        return 0.0

    def pr_at(threshold):
        kept = [p for p in cls_preds if p.confidence >= threshold]
        claimed = [False] * len(cls_gts)
        tp = 0
        for p in kept:
            best, best_iou = -1, 0.0
            for j, g in enumerate(cls_gts):
                if claimed[j]:
                    continue
                v = iou(p.box, g)
                if v > best_iou:
                    best, best_iou = j, v
            if best >= 0 and best_iou >= tau:
                claimed[best] = True
                tp += 1
        return tp / len(cls_gts), tp / len(kept)

    points = [pr_at(p.confidence) for p in cls_preds]
    recalls = sorted({r for r, _ in points})
    ap, prev = 0.0, 0.0
    for r in recalls:
        envelope = max(p for rr, p in points if rr >= r)
        ap += (r - prev) * envelope
        prev = r
    return ap


class TestMatchGreedy:
    def test_exact_match(self):
        gts = [(BBox(0, 0, 10, 10), 0)]
        result = match_greedy([pred((0, 0, 10, 10), 0, 0.9)], gts, 0, 0.5)
        assert len(result.pairs) == 1 and result.pairs[0][2] == 1.0

    def test_one_to_one(self):
        gts = [(BBox(0, 0, 10, 10), 0)]
        preds = [pred((0, 0, 10, 10), 0, 0.6), pred((0, 0, 10, 10), 0, 0.9)]
        result = match_greedy(preds, gts, 0, 0.5)
        assert result.pairs == ((1, 0, 1.0),)
        assert result.unmatched_preds == (0,)

    def test_threshold_boundary(self):
        # IoU just below tau stays unmatched
        gts = [(BBox(0, 0, 100, 10), 0)]
        p = pred((0, 0, 49, 10), 0, 0.9)
        assert iou(p.box, gts[0][0]) == pytest.approx(0.49)
        assert not match_greedy([p], gts, 0, 0.5).pairs


class TestAveragePrecision:
    def test_perfect_single_detection(self):
        gts = [[(BBox(0, 0, 10, 10), 0)]]
        assert average_precision([[pred((0, 0, 10, 10), 0, 0.9)]], gts, 0, 0.5) == 1.0

    def test_no_predictions(self):
        assert average_precision([[]], [[(BBox(0, 0, 10, 10), 0)]], 0, 0.5) == 0.0

    def test_absent_class_conventions(self):
        assert average_precision([[]], [[]], 0, 0.5) == 1.0
        assert average_precision([[pred((0, 0, 5, 5), 0, 0.9)]], [[]], 0, 0.5) == 0.0

    def test_worked_example(self):
        # TP at 0.9, FP at 0.8, TP at 0.7 over two GTs -> AP = 1*0.5 + (2/3)*0.5
        gts = [[(BBox(0, 0, 10, 10), 0), (BBox(50, 50, 60, 60), 0)]]
        preds = [[
            pred((0, 0, 10, 10), 0, 0.9),
            pred((80, 80, 90, 90), 0, 0.8),
            pred((50, 50, 60, 60), 0, 0.7),
        ]]
        expected = 5 / 6
        assert average_precision(preds, gts, 0, 0.5) == pytest.approx(expected)
        assert oracle_ap(preds[0], gts[0], 0, 0.5) == pytest.approx(expected)

    def test_matches_oracle_on_random_scenes(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            preds, gts = random_scene(rng)
            for c in range(3):
                got = average_precision([preds], [gts], c, 0.5)
                want = oracle_ap(preds, gts, c, 0.5)
                assert got == pytest.approx(want, abs=1e-9)

    def test_removing_false_positive_never_decreases_ap(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 200:
            preds, gts = random_scene(rng)
            result = match_greedy(preds, gts, 0, 0.5)
            if not result.unmatched_preds:
                continue
            checked += 1
            fp = result.unmatched_preds[0]
            without = [p for i, p in enumerate(preds) if i != fp]
            before = average_precision([preds], [gts], 0, 0.5)
            after = average_precision([without], [gts], 0, 0.5)
            assert after >= before - 1e-12


class TestMap:
    def test_identical_sets(self):
        gts = [[(BBox(0, 0, 10, 10), 0), (BBox(30, 30, 44, 44), 1)]]
        preds = [[pred((0, 0, 10, 10), 0, 1.0), pred((30, 30, 44, 44), 1, 1.0)]]
        assert map50_and_map(preds, gts, 2) == (1.0, 1.0)

    def test_empty_preds(self):
        gts = [[(BBox(0, 0, 10, 10), 0), (BBox(30, 30, 44, 44), 1)]]
        assert map50_and_map([[]], gts, 2) == (0.0, 0.0)

    def test_tau_set_membership(self):
        # IoU 0.6 counts at tau in {0.5, 0.55, 0.6} only: AP = 3/10
        gts = [[(BBox(0, 0, 100, 10), 0)]]
        p = pred((0, 0, 60, 10), 0, 0.9)
        assert iou(p.box, gts[0][0][0]) == pytest.approx(0.6)
        ap50, ap = map50_and_map([[p]], gts, 1)
        assert ap50 == 1.0
        assert ap == pytest.approx(0.3)


class TestNms:
    def test_duplicate_same_class(self):
        preds = [pred((0, 0, 10, 10), 0, 0.7), pred((0, 0, 10, 10), 0, 0.9)]
        kept = nms(preds, 0.75)
        assert kept == [preds[1]]

    def test_duplicate_different_class(self):
        preds = [pred((0, 0, 10, 10), 0, 0.7), pred((0, 0, 10, 10), 1, 0.9)]
        assert len(nms(preds, 0.75)) == 2

    def test_chain_alternates(self):
        # consecutive boxes at IoU 0.8 (> 0.75), next-but-one at ~0.64
        shift = 1 / 9
        preds = [
            pred((i * shift, 0, i * shift + 1, 1), 0, 0.9 - 0.1 * i) for i in range(5)
        ]
        assert iou(preds[0].box, preds[1].box) == pytest.approx(0.8)
        kept = nms(preds, 0.75)
        assert [p.confidence for p in kept] == [
            preds[0].confidence,
            preds[2].confidence,
            preds[4].confidence,
        ]

    def test_postconditions_on_random_scenes(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            preds, _ = random_scene(rng, n_preds=10)
            kept = nms(preds, 0.75)
            assert all(p in preds for p in kept)
            for i, a in enumerate(kept):
                for b in kept[i + 1:]:
                    if a.argmax_class == b.argmax_class:
                        assert iou(a.box, b.box) <= 0.75

    def test_matches_brute_force_greedy(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            preds, _ = random_scene(rng, n_preds=8)
            order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
            kept_idx = []
            for i in order:
                if all(
                    preds[k].argmax_class != preds[i].argmax_class
                    or iou(preds[k].box, preds[i].box) <= 0.75
                    for k in kept_idx
                ):
                    kept_idx.append(i)
            expected = [preds[i] for i in sorted(kept_idx)]
            assert nms(preds, 0.75) == expected
