"""The four training losses, evaluated on predictions and weak-label targets.

Instance losses average over the foreground set F, the semantic loss over the
decided set D. Undecided points are never read.
"""
from dataclasses import dataclass

import numpy as np

from common.geometry.aabb import iou_elementwise
from common.scene.models import BoxAnnotationSet, SceneCloud
from common.utils.errors import SchemaError
from common.weaklabel.association import Association
from common.weaklabel.targets import TrainingTargets

PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class VotePrediction:
    """Per-point network outputs."""

    offsets: np.ndarray    # (N, 3)
    sizes: np.ndarray      # (N, 3), positive
    iou: np.ndarray        # (N,), in (0, 1)
    sem_probs: np.ndarray  # (N, C), rows sum to 1

    def __post_init__(self):
        n = np.asarray(self.offsets).shape[0]
        for name in ('sizes', 'iou', 'sem_probs'):
            if np.asarray(getattr(self, name)).shape[0] != n:
                raise SchemaError(f"{name} must have {n} rows")
        probs = np.asarray(self.sem_probs, dtype=np.float64)
        if probs.size and np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-6):
            raise SchemaError("sem_probs rows must sum to 1")

    def predicted_centers(self, scene: SceneCloud) -> np.ndarray:
        return scene.positions + self.offsets


@dataclass(frozen=True)
class LossGradients:
    offsets: np.ndarray
    sizes: np.ndarray
    iou: np.ndarray
    sem_probs: np.ndarray


def normalize_scores(scores: np.ndarray) -> np.ndarray:
    """Turn nonnegative class scores into probability rows."""
    scores = np.asarray(scores, dtype=np.float64)
    if np.any(scores < 0):
        raise ValueError("class scores must be nonnegative")
    totals = scores.sum(axis=-1, keepdims=True)
    if np.any(totals <= 0):
        raise ValueError("every score row needs a positive entry")
    return scores / totals


def _foreground(assoc: Association) -> np.ndarray:
    fg = np.flatnonzero(assoc.foreground)
    if fg.size == 0:
        raise ValueError("no foreground points")
    return fg


def _decided(assoc: Association) -> np.ndarray:
    decided = np.flatnonzero(assoc.decided)
    if decided.size == 0:
        raise ValueError("no decided points")
    return decided


def bce(target: np.ndarray, prob: np.ndarray) -> np.ndarray:
    """Binary cross-entropy with a soft target, probabilities clamped."""
    p = np.clip(prob, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return -(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))


def score_targets(pred: VotePrediction, assoc: Association, scene: SceneCloud,
                  boxes: BoxAnnotationSet) -> np.ndarray:
    """IoU of each foreground point's predicted box with its associated box."""
    fg = _foreground(assoc)
    centers = scene.positions[fg] + np.asarray(pred.offsets)[fg]
    sizes = np.asarray(pred.sizes)[fg]
    box_idx = assoc.tags[fg]
    los_b, his_b = boxes.corner_arrays()
    return iou_elementwise(centers - sizes / 2.0, centers + sizes / 2.0, los_b[box_idx], his_b[box_idx])


def loss_offset(pred: VotePrediction, targets: TrainingTargets, assoc: Association) -> float:
    fg = _foreground(assoc)
    err = np.abs(targets.offsets[fg] - np.asarray(pred.offsets)[fg]).sum(axis=1)
    return float(np.sum(err) / fg.size)


def loss_size(pred: VotePrediction, targets: TrainingTargets, assoc: Association) -> float:
    fg = _foreground(assoc)
    err = np.abs(targets.sizes[fg] - np.asarray(pred.sizes)[fg]).sum(axis=1)
    return float(np.sum(err) / fg.size)


def loss_score(pred: VotePrediction, targets: TrainingTargets, assoc: Association,
               scene: SceneCloud, boxes: BoxAnnotationSet) -> float:
    fg = _foreground(assoc)
    t = score_targets(pred, assoc, scene, boxes)
    return float(np.sum(bce(t, np.asarray(pred.iou)[fg])) / fg.size)


def loss_sem(pred: VotePrediction, targets: TrainingTargets, assoc: Association) -> float:
    decided = _decided(assoc)
    probs = np.asarray(pred.sem_probs)[decided, targets.sem[decided]]
    return float(np.sum(-np.log(np.clip(probs, PROB_CLAMP, None))) / decided.size)


def loss_total(pred: VotePrediction, targets: TrainingTargets, assoc: Association,
               scene: SceneCloud, boxes: BoxAnnotationSet) -> float:
    """Unweighted sum of the four losses."""
    return (loss_offset(pred, targets, assoc)
            + loss_size(pred, targets, assoc)
            + loss_score(pred, targets, assoc, scene, boxes)
            + loss_sem(pred, targets, assoc))


def loss_gradients(pred: VotePrediction, targets: TrainingTargets, assoc: Association,
                   scene: SceneCloud, boxes: BoxAnnotationSet) -> LossGradients:
    """Analytic sub-gradients of each loss w.r.t. its own prediction head.

    The score gradient holds the IoU target fixed.
    """
    n = scene.num_points
    fg = _foreground(assoc)
    decided = _decided(assoc)

    g_offsets = np.zeros((n, 3))
    g_offsets[fg] = np.sign(np.asarray(pred.offsets)[fg] - targets.offsets[fg]) / fg.size

    g_sizes = np.zeros((n, 3))
    g_sizes[fg] = np.sign(np.asarray(pred.sizes)[fg] - targets.sizes[fg]) / fg.size

    g_iou = np.zeros(n)
    t = score_targets(pred, assoc, scene, boxes)
    p = np.asarray(pred.iou, dtype=np.float64)[fg]
    inside = (p > PROB_CLAMP) & (p < 1.0 - PROB_CLAMP)
    g_iou[fg] = np.where(inside, (p - t) / (p * (1.0 - p)), 0.0) / fg.size

    probs = np.asarray(pred.sem_probs, dtype=np.float64)
    g_sem = np.zeros_like(probs)
    cls = targets.sem[decided]
    picked = probs[decided, cls]
    g_sem[decided, cls] = np.where(picked > PROB_CLAMP, -1.0 / picked, 0.0) / decided.size

    return LossGradients(offsets=g_offsets, sizes=g_sizes, iou=g_iou, sem_probs=g_sem)
