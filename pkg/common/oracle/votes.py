"""Vote simulator standing in for the network's decoding heads."""
from typing import Optional

import numpy as np

from common.clustering.votes import VoteSet
from common.geometry.aabb import BOX_EPSILON, iou_elementwise
from common.losses.losses import PROB_CLAMP, VotePrediction
from common.oracle.params import VoteNoise
from common.scene.models import BoxAnnotationSet, SceneCloud
from common.scene.voxel import VoxelMap
from common.utils.logger import setup_logger
from common.weaklabel.association import Association, Strategy, associate

logger = setup_logger(__name__)


def _flip_semantics(labels: np.ndarray, flip: np.ndarray,
                    classes: np.ndarray, picks: np.ndarray) -> np.ndarray:
    """Replace flagged labels by a uniformly chosen different foreground class."""
    if classes.size < 2:
        return labels
    out = labels.copy()
    # index among the other classes, then skip over the original one
    pos = np.searchsorted(classes, labels)
    alt = (picks * (classes.size - 1)).astype(np.int64)
    alt = np.where(alt >= pos, alt + 1, alt)
    out[flip] = classes[alt[flip]]
    return out


def simulate_votes(scene: SceneCloud, boxes: BoxAnnotationSet, assoc: Association, noise: VoteNoise,
                   voxel_map: Optional[VoxelMap] = None) -> VoteSet:
    """Perturbed copies of each point's associated box.

    Undecided points vote with the SmallestBox rule. Background points cast a
    minimal box at their own position with background semantics. With a voxel
    map, one vote is cast per cell by its representative and expands to the
    whole cell.
    """
    n = scene.num_points
    rng = np.random.default_rng(noise.seed)
    center_noise = rng.normal(0.0, 1.0, size=(n, 3)) * noise.center_sigma
    size_noise = rng.normal(0.0, 1.0, size=(n, 3)) * noise.size_sigma
    score_noise = rng.normal(0.0, 1.0, size=n) * noise.score_noise_sigma
    flip = rng.random(n) < noise.sem_flip_prob
    picks = rng.random(n)

    tags = assoc.tags.copy()
    if np.any(assoc.undecided):
        fallback = associate(scene, boxes, Strategy.SMALLEST_BOX)
        tags[assoc.undecided] = fallback.tags[assoc.undecided]

    fg = tags >= 0
    background_class = scene.background_class
    centers = scene.positions.copy()
    sizes = np.full((n, 3), BOX_EPSILON)
    scores = np.full(n, PROB_CLAMP)
    semantics = np.full(n, background_class, dtype=np.int64)

    if np.any(fg):
        box_idx = tags[fg]
        true_centers = boxes.centers[box_idx]
        true_sizes = boxes.sizes[box_idx]
        centers[fg] = true_centers + center_noise[fg]
        sizes[fg] = true_sizes * np.exp(size_noise[fg])
        iou = iou_elementwise(centers[fg] - sizes[fg] / 2.0, centers[fg] + sizes[fg] / 2.0,
                              true_centers - true_sizes / 2.0, true_centers + true_sizes / 2.0)
        scores[fg] = np.clip(iou + score_noise[fg], PROB_CLAMP, 1.0 - PROB_CLAMP)
        classes = np.array(sorted(c for c in range(scene.num_classes) if c != background_class),
                           dtype=np.int64)
        semantics[fg] = _flip_semantics(boxes.labels[box_idx], flip[fg], classes, picks[fg])

    if voxel_map is not None:
        reps = voxel_map.representatives
        votes = VoteSet(centers[reps], sizes[reps], scores[reps], semantics[reps], voxel_map.members())
    else:
        votes = VoteSet.per_point(centers, sizes, scores, semantics)
    logger.debug(f"Simulated {len(votes)} votes ({int(np.sum(fg))} foreground points)")
    return votes


def votes_to_prediction(votes: VoteSet, scene: SceneCloud) -> VotePrediction:
    """Dense per-point prediction from votes (one-hot semantics)."""
    n = scene.num_points
    offsets = np.zeros((n, 3))
    sizes = np.ones((n, 3))
    iou = np.full(n, 0.5)
    probs = np.zeros((n, scene.num_classes))
    probs[:, scene.background_class] = 1.0
    for v, members in enumerate(votes.expansion):
        offsets[members] = votes.centers[v] - scene.positions[members]
        sizes[members] = votes.sizes[v]
        iou[members] = votes.scores[v]
        probs[members] = 0.0
        probs[members, votes.semantics[v]] = 1.0
    return VotePrediction(offsets=offsets, sizes=sizes, iou=iou, sem_probs=probs)
