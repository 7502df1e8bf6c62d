"""Spatial clustering baseline: connected components of the epsilon-ball graph."""
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from common.clustering.votes import Cluster, Clustering, VoteSet
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

CENTER_SPACE = 'center'
BOX_SPACE = 'box'


def vote_space(votes: VoteSet, space: str = CENTER_SPACE) -> np.ndarray:
    if space == CENTER_SPACE:
        return votes.centers
    if space == BOX_SPACE:
        return np.hstack([votes.centers, votes.sizes])
    raise ValueError(f"unknown vote space '{space}'")


def spatial_cluster(votes: VoteSet, radius: float, space: str = CENTER_SPACE) -> Clustering:
    """Join votes within Euclidean distance <= radius, transitively.

    ``space`` selects the vote coordinates: centers, or centers and sizes
    together. The representative is the highest-scoring member, ties by vote id.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    m = len(votes)
    if m == 0:
        return Clustering([])

    points = vote_space(votes, space)
    pairs = cKDTree(points).query_pairs(radius, output_type='ndarray')
    graph = coo_matrix((np.ones(pairs.shape[0]), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    _, labels = connected_components(graph, directed=False)

    order = np.lexsort((votes.vote_ids, -votes.scores))
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m)

    members_by_label = np.split(np.argsort(labels, kind='stable'), np.cumsum(np.bincount(labels))[:-1])
    clusters = []
    for members in members_by_label:
        rep = int(members[np.argmin(rank[members])])
        clusters.append(Cluster(rep, np.sort(members)))
    clusters.sort(key=lambda c: rank[c.representative])

    logger.debug(f"Spatial clustering (radius={radius}, space={space}) found {len(clusters)} clusters")
    return Clustering(clusters)
