"""Instance matching and average precision.

Predictions are ranked by descending score, ties by larger mask, then by the
lowest first point index. Each prediction in rank order matches the unmatched
ground truth of its class with the highest IoU if that IoU reaches the
threshold; otherwise it is a false positive. AP integrates the precision
envelope (running maximum from the right) over recall with the rectangle rule.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from common.geometry.aabb import cross_iou
from common.instancer.mask import InstanceMask
from common.scene.models import NO_INSTANCE, BoxAnnotationSet, SceneCloud
from common.utils.errors import SchemaError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

MAP_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))
DEFAULT_THRESHOLDS = (0.25,) + MAP_THRESHOLDS
PRECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one class at one IoU threshold."""

    ap: float
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> Optional[float]:
        if self.tp + self.fp == 0:
            return None
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> Optional[float]:
        if self.tp + self.fn == 0:
            return None
        return self.tp / (self.tp + self.fn)


def mask_iou(a, b) -> float:
    """Set IoU of two point-index collections."""
    a = np.unique(np.asarray(a, dtype=np.int64))
    b = np.unique(np.asarray(b, dtype=np.int64))
    if a.size == 0 and b.size == 0:
        raise ValueError("both masks are empty")
    inter = np.intersect1d(a, b, assume_unique=True).size
    return inter / float(a.size + b.size - inter)


def mask_iou_matrix(preds: Sequence[InstanceMask], gts: Sequence[InstanceMask]) -> np.ndarray:
    out = np.zeros((len(preds), len(gts)))
    for j, g in enumerate(gts):
        for i, p in enumerate(preds):
            inter = np.intersect1d(p.point_indices, g.point_indices, assume_unique=True).size
            if inter:
                out[i, j] = inter / float(len(p) + len(g) - inter)
    return out


def rank_masks(masks: Sequence[InstanceMask]) -> np.ndarray:
    """Positions in rank order: score desc, size desc, first point asc."""
    if not masks:
        return np.zeros(0, dtype=np.int64)
    scores = np.array([m.score for m in masks])
    sizes = np.array([len(m) for m in masks])
    firsts = np.array([m.point_indices[0] for m in masks])
    return np.lexsort((firsts, -sizes, -scores))


def greedy_match(ious: np.ndarray, iou_thresh: float) -> np.ndarray:
    """True-positive flag per ranked prediction; ``ious`` rows are in rank order."""
    num_preds, num_gts = ious.shape
    tp = np.zeros(num_preds, dtype=bool)
    taken = np.zeros(num_gts, dtype=bool)
    for i in range(num_preds):
        if taken.all():
            break
        row = np.where(taken, -1.0, ious[i])
        j = int(np.argmax(row))
        if row[j] >= iou_thresh:
            tp[i] = True
            taken[j] = True
    return tp


def average_precision(tp: np.ndarray, num_gt: int) -> float:
    if num_gt == 0:
        return 1.0 if tp.size == 0 else 0.0
    if tp.size == 0:
        return 0.0
    ctp = np.cumsum(tp)
    precision = ctp / np.arange(1, tp.size + 1)
    recall = ctp / float(num_gt)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.diff(np.concatenate([[0.0], recall]))
    return float(np.sum(steps * envelope))


def _match(ious: np.ndarray, num_gt: int, iou_thresh: float) -> MatchResult:
    tp = greedy_match(ious, iou_thresh)
    n_tp = int(tp.sum())
    return MatchResult(ap=average_precision(tp, num_gt), tp=n_tp, fp=int(tp.size - n_tp), fn=num_gt - n_tp)


def _of_class(masks: Sequence[InstanceMask], cls: int) -> List[InstanceMask]:
    return [m for m in masks if m.label == cls]


def match_and_ap(preds: Sequence[InstanceMask], gts: Sequence[InstanceMask], cls: int,
                 iou_thresh: float) -> MatchResult:
    preds = _of_class(preds, cls)
    gts = _of_class(gts, cls)
    ranked = [preds[i] for i in rank_masks(preds)]
    return _match(mask_iou_matrix(ranked, gts), len(gts), iou_thresh)


@dataclass(frozen=True)
class ClassEvaluation:
    label: int
    num_gt: int
    num_pred: int
    results: Dict[float, MatchResult]


def evaluate_class_ious(label: int, ious: np.ndarray, thresholds: Sequence[float]) -> ClassEvaluation:
    num_pred, num_gt = ious.shape
    return ClassEvaluation(label, num_gt, num_pred, {t: _match(ious, num_gt, t) for t in thresholds})


def normalize_thresholds(thresholds: Optional[Sequence[float]]) -> List[float]:
    """Requested thresholds plus the ones every report needs, sorted."""
    wanted = set(DEFAULT_THRESHOLDS)
    if thresholds:
        wanted.update(round(float(t), 4) for t in thresholds)
    for t in wanted:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"IoU threshold {t} out of range (0, 1]")
    return sorted(wanted)


def evaluate(preds: Sequence[InstanceMask], gts: Sequence[InstanceMask],
             thresholds: Optional[Sequence[float]] = None, class_names: Optional[Sequence[str]] = None):
    """Per-class AP at every threshold plus mAP and precision/recall aggregates."""
    from common.eval.report import build_report

    thresholds = normalize_thresholds(thresholds)
    labels = sorted({m.label for m in gts} | {m.label for m in preds})
    per_class = []
    for cls in labels:
        p = _of_class(preds, cls)
        g = _of_class(gts, cls)
        ranked = [p[i] for i in rank_masks(p)]
        per_class.append(evaluate_class_ious(cls, mask_iou_matrix(ranked, g), thresholds))
    return build_report(per_class, thresholds, class_names)


def evaluate_boxes(pred_boxes: BoxAnnotationSet, pred_scores: Sequence[float], gt_boxes: BoxAnnotationSet,
                   thresholds: Optional[Sequence[float]] = None, class_names: Optional[Sequence[str]] = None):
    """Detection AP with box IoU, same matching rules as masks.

    Score ties are broken by larger volume, then lower index.
    """
    from common.eval.report import build_report

    thresholds = normalize_thresholds(thresholds)
    scores = np.asarray(pred_scores, dtype=np.float64)
    if scores.shape[0] != len(pred_boxes):
        raise SchemaError(f"{scores.shape[0]} scores for {len(pred_boxes)} boxes")
    pred_labels = pred_boxes.labels
    gt_labels = gt_boxes.labels
    labels = sorted(set(pred_labels.tolist()) | set(gt_labels.tolist()))
    per_class = []
    for cls in labels:
        p_idx = np.flatnonzero(pred_labels == cls)
        g_idx = np.flatnonzero(gt_labels == cls)
        p_idx = p_idx[np.lexsort((p_idx, -pred_boxes.volumes[p_idx], -scores[p_idx]))]
        p_lo, p_hi = pred_boxes.subset(p_idx).corner_arrays()
        g_lo, g_hi = gt_boxes.subset(g_idx).corner_arrays()
        ious = cross_iou(p_lo, p_hi, g_lo, g_hi)
        per_class.append(evaluate_class_ious(cls, ious, thresholds))
    return build_report(per_class, thresholds, class_names)


def gt_masks_from_scene(scene: SceneCloud) -> List[InstanceMask]:
    """GT instances as masks ordered by instance id, labelled by majority semantics."""
    if not scene.has_gt:
        raise SchemaError("scene has no GT instance masks")
    gt = scene.gt_instance_ids
    fg = np.flatnonzero(gt != NO_INSTANCE)
    if fg.size == 0:
        return []
    order = fg[np.argsort(gt[fg], kind='stable')]
    ids, starts = np.unique(gt[order], return_index=True)
    masks = []
    for points in np.split(order, starts[1:]):
        label = int(np.argmax(np.bincount(scene.gt_semantics[points])))
        masks.append(InstanceMask(points, label, 1.0))
    return masks
