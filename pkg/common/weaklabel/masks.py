from typing import List

import numpy as np

from common.instancer.mask import InstanceMask
from common.scene.models import BoxAnnotationSet
from common.weaklabel.association import Association


def labels_to_masks(assoc: Association, boxes: BoxAnnotationSet) -> List[InstanceMask]:
    """One mask per box that received points, ordered by box index, score 1."""
    tags = assoc.tags
    fg = np.flatnonzero(tags >= 0)
    if fg.size == 0:
        return []
    order = np.argsort(tags[fg], kind='stable')
    sorted_points = fg[order]
    sorted_tags = tags[sorted_points]
    box_ids, starts = np.unique(sorted_tags, return_index=True)
    groups = np.split(sorted_points, starts[1:])
    return [InstanceMask(points, boxes[int(b)].label, 1.0) for b, points in zip(box_ids, groups)]
