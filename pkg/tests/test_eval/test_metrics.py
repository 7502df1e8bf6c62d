import numpy as np
import pytest

from common.eval.metrics import (DEFAULT_THRESHOLDS, MAP_THRESHOLDS, average_precision, evaluate,
                                 evaluate_boxes, gt_masks_from_scene, mask_iou, match_and_ap,
                                 normalize_thresholds, rank_masks)
from common.instancer.export import masks_to_boxes
from common.instancer.mask import InstanceMask
from common.scene.models import BoxAnnotationSet


def masks_of(*point_lists, label=1, scores=None):
    scores = scores or [1.0] * len(point_lists)
    return [InstanceMask(p, label, s) for p, s in zip(point_lists, scores)]


def brute_force_ap(preds, gts, thresh):
    """PR curve written out point by point over score-sorted predictions."""
    preds = sorted(preds, key=lambda m: -m.score)
    taken = set()
    hits = []
    for p in preds:
        best, best_iou = None, -1.0
        for j, g in enumerate(gts):
            if j in taken:
                continue
            iou = len(set(p.point_indices) & set(g.point_indices)) / len(set(p.point_indices) | set(g.point_indices))
            if iou > best_iou:
                best, best_iou = j, iou
        if best is not None and best_iou >= thresh:
            taken.add(best)
            hits.append(True)
        else:
            hits.append(False)
    if not gts:
        return 1.0 if not preds else 0.0
    precisions, recalls = [], []
    for k in range(1, len(hits) + 1):
        precisions.append(sum(hits[:k]) / k)
        recalls.append(sum(hits[:k]) / len(gts))
    ap, prev = 0.0, 0.0
    for k in range(len(hits)):
        ap += (recalls[k] - prev) * max(precisions[k:])
        prev = recalls[k]
    return ap


def test_mask_iou_values():
    assert mask_iou([1, 2, 3], [3, 2, 1]) == 1.0
    assert mask_iou([1, 2], [3, 4]) == 0.0
    assert mask_iou([1, 2, 3, 4], [3, 4, 5, 6]) == pytest.approx(1 / 3)
    assert mask_iou([], [1]) == 0.0
    with pytest.raises(ValueError, match="both masks are empty"):
        mask_iou([], [])


def test_perfect_predictions():
    gts = masks_of([0, 1, 2], [3, 4], [5, 6, 7, 8])
    for t in DEFAULT_THRESHOLDS:
        assert match_and_ap(gts, gts, 1, t).ap == 1.0


def test_no_predictions():
    result = match_and_ap([], masks_of([0, 1]), 1, 0.5)
    assert result.ap == 0.0
    assert (result.tp, result.fp, result.fn) == (0, 0, 1)
    assert result.precision is None
    assert result.recall == 0.0


def test_false_positive_ranked_first_halves_ap():
    gts = masks_of([0, 1, 2, 3])
    preds = masks_of([7, 8, 9], [0, 1, 2, 3], scores=[0.9, 0.5])
    result = match_and_ap(preds, gts, 1, 0.5)
    assert result.ap == pytest.approx(0.5)
    assert (result.tp, result.fp, result.fn) == (1, 1, 0)


def test_other_classes_are_ignored():
    gts = masks_of([0, 1, 2])
    preds = masks_of([0, 1, 2], label=2)
    assert match_and_ap(preds, gts, 1, 0.5).ap == 0.0
    assert match_and_ap(preds, gts, 2, 0.5).ap == 0.0
    assert match_and_ap([], [], 3, 0.5).ap == 1.0


def test_average_precision_edge_cases():
    assert average_precision(np.zeros(0, dtype=bool), 0) == 1.0
    assert average_precision(np.array([False]), 0) == 0.0
    assert average_precision(np.array([True, False, True]), 2) == pytest.approx(1.0 * 0.5 + (2 / 3) * 0.5)


def test_ranking_ties():
    masks = [InstanceMask([5, 6], 1, 0.5), InstanceMask([1, 2, 3], 1, 0.5), InstanceMask([0, 9], 1, 0.5),
             InstanceMask([4], 1, 0.9)]
    assert rank_masks(masks).tolist() == [3, 1, 2, 0]


def test_matches_brute_force():
    rng = np.random.default_rng(0)
    universe = np.arange(12)
    for _ in range(500):
        gts = [InstanceMask(rng.choice(universe, size=rng.integers(1, 6), replace=False), 1)
               for _ in range(rng.integers(0, 4))]
        preds = [InstanceMask(rng.choice(universe, size=rng.integers(1, 6), replace=False), 1, s)
                 for s in rng.permutation(np.linspace(0.1, 0.9, 9))[:rng.integers(0, 5)]]
        thresh = float(rng.choice([0.25, 0.5, 0.75]))
        assert match_and_ap(preds, gts, 1, thresh).ap == pytest.approx(brute_force_ap(preds, gts, thresh))


def random_instance(rng):
    universe = np.arange(40)
    gts = []
    for start in range(0, 40, 8):
        gts.append(InstanceMask(np.arange(start, start + 8), int(rng.integers(1, 3))))
    preds = []
    for g in gts:
        keep = rng.random(8) < 0.8
        extra = rng.choice(universe, size=3, replace=False)
        points = np.concatenate([g.point_indices[keep], extra]) if keep.any() else extra
        preds.append(InstanceMask(points, g.label, float(rng.uniform(0.1, 0.9))))
    return preds, gts


def test_ap_is_monotone_in_threshold():
    rng = np.random.default_rng(1)
    for _ in range(50):
        preds, gts = random_instance(rng)
        report = evaluate(preds, gts)
        for c in report.classes:
            aps = [c.ap[t] for t in report.thresholds]
            assert all(a >= b for a, b in zip(aps, aps[1:]))
        assert report.map25 >= report.map50 >= report.map


def test_score_scaling_and_order_do_not_matter():
    rng = np.random.default_rng(2)
    for _ in range(20):
        preds, gts = random_instance(rng)
        base = evaluate(preds, gts).to_dict()
        scaled = [InstanceMask(p.point_indices, p.label, p.score * 0.37) for p in preds]
        assert evaluate(scaled, gts).to_dict()['per_threshold_mAP'] == base['per_threshold_mAP']
        shuffled = [preds[i] for i in rng.permutation(len(preds))]
        assert evaluate(shuffled, gts).to_dict() == base


def test_evaluate_aggregates():
    gts = masks_of([0, 1], [2, 3], [4, 5], [6, 7])
    report = evaluate(gts[:2], gts)
    assert report.mprec == 1.0
    assert report.mrec == 0.5
    assert report.map50 == pytest.approx(0.5)

    perfect = evaluate(gts, gts)
    assert perfect.summary() == {'mAP25': 1.0, 'mAP50': 1.0, 'mAP': 1.0, 'mPrec': 1.0, 'mRec': 1.0}

    empty = evaluate([], gts)
    assert empty.mprec == 0.0 and empty.mrec == 0.0
    assert not empty.precision_defined


def test_map_never_exceeds_map50_when_thresholds_agree():
    gts = masks_of([0, 1]) + masks_of([2, 3], label=2) + masks_of([4, 5], label=3)
    report = evaluate(masks_of([0, 1]), gts)
    assert report.map25 == report.map50 == pytest.approx(1 / 3)
    assert report.map25 >= report.map50 >= report.map
    assert report.map == pytest.approx(1 / 3)


def test_classes_without_gt_are_excluded_from_means():
    gts = masks_of([0, 1])
    preds = gts + masks_of([5, 6], label=2)
    report = evaluate(preds, gts, class_names=['background', 'chair', 'table'])
    assert [c.name for c in report.classes] == ['chair', 'table']
    assert report.map50 == 1.0


def test_thresholds():
    assert normalize_thresholds(None) == list(DEFAULT_THRESHOLDS)
    assert 0.3 in normalize_thresholds([0.3])
    with pytest.raises(ValueError, match="out of range"):
        normalize_thresholds([1.5])
    assert len(MAP_THRESHOLDS) == 10 and MAP_THRESHOLDS[-1] == 0.95


def test_gt_masks_from_scene(disjoint_scene):
    scene, boxes = disjoint_scene
    masks = gt_masks_from_scene(scene)
    assert [m.label for m in masks] == boxes.labels.tolist()
    assert sum(len(m) for m in masks) == int((scene.gt_instance_ids >= 0).sum())


def test_detection_proxy(disjoint_scene):
    scene, boxes = disjoint_scene
    gt = gt_masks_from_scene(scene)
    pred_boxes = masks_to_boxes(gt, scene)
    report = evaluate_boxes(pred_boxes, [0.9, 0.8], masks_to_boxes(gt, scene))
    assert report.map == 1.0

    shifted = BoxAnnotationSet(tuple(b.translated((0.5 * b.size[0], 0.0, 0.0)) for b in pred_boxes))
    shifted_report = evaluate_boxes(shifted, [0.9, 0.8], pred_boxes)
    # half-width shift: IoU = 1/3
    assert shifted_report.map25 == 1.0
    assert shifted_report.map50 == 0.0
