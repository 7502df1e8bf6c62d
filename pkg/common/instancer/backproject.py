"""Back-projection of vote clusters to point-level instance masks."""
from typing import List

import numpy as np

from common.clustering.votes import Clustering, VoteSet
from common.instancer.mask import InstanceMask
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


def majority_label(semantics: np.ndarray, weights: np.ndarray) -> int:
    """Weighted majority class; the lowest class id wins ties."""
    return int(np.argmax(np.bincount(semantics, weights=weights)))


def back_project(clustering: Clustering, votes: VoteSet) -> List[InstanceMask]:
    """One mask per cluster: the union of its members' expansion points.

    The label is the member semantics weighted by expansion size and the
    score is the representative's predicted IoU.
    """
    if not clustering.is_partition(len(votes)):
        raise ValueError("clustering is not a partition of the votes")

    weights = votes.expansion_sizes.astype(np.float64)
    masks = []
    for c in clustering:
        points = np.concatenate([votes.expansion[m] for m in c.members])
        label = majority_label(votes.semantics[c.members], weights[c.members])
        masks.append(InstanceMask(points, label, votes.scores[c.representative]))

    logger.debug(f"Back-projected {len(clustering)} clusters to masks")
    return masks
