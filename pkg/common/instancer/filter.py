import numpy as np

from common.clustering.votes import VoteSet
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


def filter_background(votes: VoteSet, background_class: int) -> VoteSet:
    """Drop votes predicting the background class, keeping survivor order."""
    keep = np.flatnonzero(votes.semantics != background_class)
    if keep.size == len(votes):
        return votes
    logger.debug(f"Filtered {len(votes) - keep.size} background votes, {keep.size} remain")
    return votes.subset(keep)
