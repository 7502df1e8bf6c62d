"""Point-to-box association.

Every point is tagged Background (in no box), Box(i) (index into the
annotation set) or Undecided. Points in a single box always take that box;
points in several boxes are resolved by the chosen strategy.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from common.geometry.aabb import CONTAINMENT_TOLERANCE, fit_aabb
from common.scene.models import NO_INSTANCE, BoxAnnotationSet, SceneCloud
from common.utils.errors import SchemaError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

BACKGROUND = -1
UNDECIDED = -2


class Strategy(str, Enum):
    DECIDED_ONLY = 'decided'
    CLOSEST_BOX = 'closest'
    SMALLEST_BOX = 'smallest'

    @classmethod
    def parse(cls, value) -> 'Strategy':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ', '.join(s.value for s in cls)
            raise ValueError(f"unknown strategy '{value}' (expected one of: {names})")


@dataclass(frozen=True)
class Association:
    """Per-point tags: box index >= 0, BACKGROUND or UNDECIDED."""

    tags: np.ndarray
    strategy: Strategy
    num_boxes: int

    def __len__(self) -> int:
        return self.tags.shape[0]

    @property
    def foreground(self) -> np.ndarray:
        """Mask of points associated with a box (the set F)."""
        return self.tags >= 0

    @property
    def decided(self) -> np.ndarray:
        """Mask of points that are not undecided (the set D)."""
        return self.tags != UNDECIDED

    @property
    def background(self) -> np.ndarray:
        return self.tags == BACKGROUND

    @property
    def undecided(self) -> np.ndarray:
        return self.tags == UNDECIDED


def _x_sorted(positions: np.ndarray):
    order = np.argsort(positions[:, 0], kind='stable')
    return order, positions[order, 0]


def associate(scene: SceneCloud, boxes: BoxAnnotationSet, strategy=Strategy.DECIDED_ONLY) -> Association:
    """Associate every scene point with background, one box, or undecided.

    Ties under ClosestBox go to the smaller volume, then the lower index;
    ties under SmallestBox go to the smaller center distance, then the lower
    index.
    """
    strategy = Strategy.parse(strategy)
    positions = scene.positions
    n = positions.shape[0]
    count = np.zeros(n, dtype=np.int64)
    chosen = np.full(n, BACKGROUND, dtype=np.int64)
    best_volume = np.full(n, np.inf)
    best_distance = np.full(n, np.inf)

    if len(boxes) and n:
        los, his = boxes.corner_arrays()
        los = los - CONTAINMENT_TOLERANCE
        his = his + CONTAINMENT_TOLERANCE
        volumes = boxes.volumes
        centers = boxes.centers
        order, xs = _x_sorted(positions)

        for i in range(len(boxes)):
            # candidates by x-range, then exact test on y/z
            start = np.searchsorted(xs, los[i, 0], side='left')
            stop = np.searchsorted(xs, his[i, 0], side='right')
            if start >= stop:
                continue
            cand = order[start:stop]
            pts = positions[cand]
            inside = np.all((pts[:, 1:] >= los[i, 1:]) & (pts[:, 1:] <= his[i, 1:]), axis=1)
            idx = cand[inside]
            if idx.size == 0:
                continue
            count[idx] += 1
            if strategy is Strategy.DECIDED_ONLY:
                chosen[idx] = np.where(chosen[idx] == BACKGROUND, i, chosen[idx])
                continue

            dist = np.linalg.norm(positions[idx] - centers[i], axis=1)
            vol = volumes[i]
            if strategy is Strategy.SMALLEST_BOX:
                better = (vol < best_volume[idx]) | ((vol == best_volume[idx]) & (dist < best_distance[idx]))
            else:
                better = (dist < best_distance[idx]) | ((dist == best_distance[idx]) & (vol < best_volume[idx]))
            win = idx[better]
            chosen[win] = i
            best_volume[win] = vol
            best_distance[win] = dist[better]

    tags = chosen
    if strategy is Strategy.DECIDED_ONLY:
        tags = np.where(count >= 2, UNDECIDED, chosen)
    tags.setflags(write=False)

    logger.debug(f"Associated {n} points with {len(boxes)} boxes ({strategy.value}): "
                 f"{int(np.sum(tags >= 0))} foreground, {int(np.sum(count >= 2))} in overlaps")
    return Association(tags=tags, strategy=strategy, num_boxes=len(boxes))


def undecided_fraction(assoc: Association) -> float:
    """Share of points tagged Undecided."""
    if len(assoc) == 0:
        return 0.0
    return float(np.count_nonzero(assoc.undecided)) / len(assoc)


def overlap_fraction(scene: SceneCloud, boxes: BoxAnnotationSet) -> float:
    """Share of points contained in two or more boxes, independent of strategy."""
    return undecided_fraction(associate(scene, boxes, Strategy.DECIDED_ONLY))


def boxes_from_instances(scene: SceneCloud) -> BoxAnnotationSet:
    """Fit one box per GT instance, ordered by instance id."""
    if not scene.has_gt:
        raise SchemaError("scene has no GT instance masks")
    boxes = []
    for inst in np.unique(scene.gt_instance_ids):
        if inst == NO_INSTANCE:
            continue
        members = scene.gt_instance_ids == inst
        labels = scene.gt_semantics[members]
        label = int(np.argmax(np.bincount(labels)))
        boxes.append(fit_aabb(scene.positions[members], label))
    return BoxAnnotationSet(tuple(boxes))


def associate_from_instances(scene: SceneCloud):
    """Dense association from GT masks: every instance point takes its own box.

    Returns the association together with the fitted boxes it indexes.
    """
    boxes = boxes_from_instances(scene)
    gt = scene.gt_instance_ids
    instance_ids = np.unique(gt[gt != NO_INSTANCE])
    tags = np.where(gt == NO_INSTANCE, BACKGROUND, np.searchsorted(instance_ids, gt)).astype(np.int64)
    tags.setflags(write=False)
    return Association(tags=tags, strategy=Strategy.SMALLEST_BOX, num_boxes=len(boxes)), boxes
