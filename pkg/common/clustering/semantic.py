from typing import Callable

import numpy as np

from common.clustering.votes import Cluster, Clustering, VoteSet


def cluster_per_semantic(votes: VoteSet, inner: Callable[[VoteSet], Clustering]) -> Clustering:
    """Apply ``inner`` separately to the votes of each predicted class.

    Results are merged by ascending class id.
    """
    clusters = []
    for cls in np.unique(votes.semantics):
        idx = np.flatnonzero(votes.semantics == cls)
        for c in inner(votes.subset(idx)):
            clusters.append(Cluster(int(idx[c.representative]), idx[c.members]))
    return Clustering(clusters)
