"""Non-maximum clustering of box votes.

Votes are visited in descending score order (ties by ascending vote id). The
highest-scoring unclustered vote becomes a representative and absorbs every
still-unclustered vote whose box IoU with it exceeds tau. Clusters are
disjoint.
"""
from collections import defaultdict
from typing import Dict, Optional, Tuple

import numpy as np

from common.clustering.votes import Cluster, Clustering, VoteSet
from common.geometry.aabb import iou_corners
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_TAU = 0.3
# Below this many votes the linear scan beats building the grid.
GRID_MIN_VOTES = 256

_NEIGHBORHOOD = np.array([(dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)],
                         dtype=np.int64)


def check_tau(tau: float) -> None:
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0,1)")


def score_order(votes: VoteSet) -> np.ndarray:
    """Vote positions by descending score, ties by ascending vote id."""
    return np.lexsort((votes.vote_ids, -votes.scores))


class CenterGrid:
    """Uniform grid over vote centers with cells as large as the largest box diagonal.

    Two boxes that overlap at all have centers at most one cell apart per axis,
    so the 27 cells around a vote hold every vote it can overlap.
    """

    def __init__(self, centers: np.ndarray, sizes: np.ndarray):
        diagonals = np.linalg.norm(sizes, axis=1)
        self.cell = float(diagonals.max()) if diagonals.size else 1.0
        self.keys = np.floor(centers / self.cell).astype(np.int64)
        cells: Dict[Tuple[int, int, int], list] = defaultdict(list)
        for i, key in enumerate(map(tuple, self.keys.tolist())):
            cells[key].append(i)
        self.cells = {k: np.asarray(v, dtype=np.int64) for k, v in cells.items()}

    def candidates(self, i: int) -> np.ndarray:
        found = [self.cells.get(tuple(k)) for k in (self.keys[i] + _NEIGHBORHOOD).tolist()]
        found = [f for f in found if f is not None]
        return np.concatenate(found) if found else np.zeros(0, dtype=np.int64)


def nmc(votes: VoteSet, tau: float = DEFAULT_TAU, use_grid: Optional[bool] = None) -> Clustering:
    """Cluster box votes by volumetric similarity to score-ordered representatives."""
    check_tau(tau)
    m = len(votes)
    if m == 0:
        return Clustering([])
    if use_grid is None:
        use_grid = m >= GRID_MIN_VOTES

    los, his = votes.los, votes.his
    clustered = np.zeros(m, dtype=bool)
    grid = CenterGrid(votes.centers, votes.sizes) if use_grid else None
    remaining = np.arange(m)
    clusters = []

    for r in score_order(votes):
        if clustered[r]:
            continue
        if grid is not None:
            cand = grid.candidates(r)
            cand = cand[~clustered[cand]]
        else:
            cand = remaining
        ious = iou_corners(los[r], his[r], los[cand], his[cand])
        members = np.union1d(cand[ious > tau], [r])
        clustered[members] = True
        if grid is None:
            remaining = remaining[~clustered[remaining]]
        clusters.append(Cluster(int(r), members))

    logger.debug(f"NMC (tau={tau}, grid={use_grid}) grouped {m} votes into {len(clusters)} clusters")
    return Clustering(clusters)
