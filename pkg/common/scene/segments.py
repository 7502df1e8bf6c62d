"""Segment-level vote aggregation."""
from typing import Optional

import numpy as np

from common.clustering.votes import VoteSet
from common.utils.errors import SchemaError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


def aggregate_votes_by_segment(votes: VoteSet, segment_ids: Optional[np.ndarray]) -> VoteSet:
    """One vote per segment.

    Center, size and score are arithmetic means over the segment's votes; the
    semantic class is the majority (ties to the lowest class id). Each output
    vote expands to the union of its members' points. Output order follows
    ascending segment id.
    """
    if segment_ids is None:
        raise ValueError("missing segment ids")
    segment_ids = np.asarray(segment_ids, dtype=np.int64).reshape(-1)
    if segment_ids.shape[0] != len(votes):
        raise SchemaError(f"got {segment_ids.shape[0]} segment ids for {len(votes)} votes")
    if len(votes) == 0:
        return VoteSet.empty()

    segments, inverse = np.unique(segment_ids, return_inverse=True)
    inverse = inverse.reshape(-1)
    num_segments = segments.shape[0]
    counts = np.bincount(inverse, minlength=num_segments).astype(np.float64)

    def mean(values: np.ndarray) -> np.ndarray:
        if values.ndim == 1:
            return np.bincount(inverse, weights=values, minlength=num_segments) / counts
        return np.stack([mean(values[:, k]) for k in range(values.shape[1])], axis=1)

    semantics = votes.semantics
    num_classes = int(semantics.max()) + 1
    tally = np.bincount(inverse * num_classes + semantics,
                        minlength=num_segments * num_classes).reshape(num_segments, num_classes)
    majority = np.argmax(tally, axis=1)

    lengths = votes.expansion_sizes
    flat = np.concatenate(votes.expansion)
    owner = np.repeat(inverse, lengths)
    order = np.lexsort((flat, owner))
    per_segment = np.bincount(owner, minlength=num_segments)
    expansion = tuple(np.split(flat[order], np.cumsum(per_segment)[:-1]))

    logger.debug(f"Aggregated {len(votes)} votes into {num_segments} segment votes")
    return VoteSet(
        centers=mean(votes.centers),
        sizes=mean(votes.sizes),
        scores=mean(votes.scores),
        semantics=majority,
        expansion=expansion,
    )
