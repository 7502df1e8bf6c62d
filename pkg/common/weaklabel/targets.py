"""Training targets derived from box associations."""
from dataclasses import dataclass

import numpy as np

from common.scene.models import BoxAnnotationSet, SceneCloud
from common.weaklabel.association import Association

NO_CLASS = -1


@dataclass(frozen=True)
class TrainingTargets:
    """Dense per-point targets.

    ``offsets`` and ``sizes`` are meaningful on foreground points only (zero
    elsewhere); ``sem`` holds the class id on decided points, the background
    class where the point is in no box, and NO_CLASS on undecided points.
    """

    offsets: np.ndarray
    sizes: np.ndarray
    sem: np.ndarray
    foreground: np.ndarray
    decided: np.ndarray


def make_targets(assoc: Association, scene: SceneCloud, boxes: BoxAnnotationSet) -> TrainingTargets:
    n = scene.num_points
    offsets = np.zeros((n, 3))
    sizes = np.zeros((n, 3))
    sem = np.full(n, NO_CLASS, dtype=np.int64)

    fg = assoc.foreground
    if np.any(fg):
        box_idx = assoc.tags[fg]
        offsets[fg] = boxes.centers[box_idx] - scene.positions[fg]
        sizes[fg] = boxes.sizes[box_idx]
        sem[fg] = boxes.labels[box_idx]
    sem[assoc.background] = scene.background_class

    for arr in (offsets, sizes, sem):
        arr.setflags(write=False)
    return TrainingTargets(offsets=offsets, sizes=sizes, sem=sem,
                           foreground=fg, decided=assoc.decided)


def targets_to_dict(assoc: Association, targets: TrainingTargets, undecided: float) -> dict:
    fg = np.flatnonzero(targets.foreground)
    return {
        'strategy': assoc.strategy.value,
        'undecided_fraction': undecided,
        'association': assoc.tags.tolist(),
        'foreground': fg.tolist(),
        'offset': targets.offsets[fg].tolist(),
        'size': targets.sizes[fg].tolist(),
        'sem': targets.sem.tolist(),
    }
