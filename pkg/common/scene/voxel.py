"""Voxel discretization keeping, per occupied cell, the point nearest the cell center."""
from dataclasses import dataclass

import numpy as np

from common.scene.models import SceneCloud
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

DEFAULT_CELL_SIZE = 0.02


@dataclass(frozen=True)
class VoxelMap:
    cell_size: float
    cells: np.ndarray            # (K, 3) integer cell index triples
    representatives: np.ndarray  # (K,) selected point index per cell
    inverse: np.ndarray          # (N,) cell of every original point

    def __len__(self) -> int:
        return self.cells.shape[0]

    def gather(self, values: np.ndarray) -> np.ndarray:
        """Per-point values sampled at the cell representatives."""
        return np.asarray(values)[self.representatives]

    def scatter(self, cell_values: np.ndarray) -> np.ndarray:
        """Per-cell values copied back to every original point."""
        return np.asarray(cell_values)[self.inverse]

    def members(self) -> tuple:
        """Original point indices of each cell, ascending."""
        if len(self) == 0:
            return ()
        order = np.argsort(self.inverse, kind='stable')
        counts = np.bincount(self.inverse, minlength=len(self))
        return tuple(np.split(order, np.cumsum(counts)[:-1]))


def voxelize(scene: SceneCloud, cell_size: float = DEFAULT_CELL_SIZE) -> VoxelMap:
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    positions = scene.positions
    if positions.shape[0] == 0:
        empty = np.zeros(0, dtype=np.int64)
        return VoxelMap(cell_size, np.zeros((0, 3), dtype=np.int64), empty, empty)

    keys = np.floor(positions / cell_size).astype(np.int64)
    cells, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    centers = (cells[inverse] + 0.5) * cell_size
    dist = np.sum((positions - centers) ** 2, axis=1)

    # cell, then distance to cell center, then point index
    order = np.lexsort((np.arange(positions.shape[0]), dist, inverse))
    first = np.ones(order.size, dtype=bool)
    first[1:] = inverse[order[1:]] != inverse[order[:-1]]
    representatives = order[first]

    logger.debug(f"Voxelized {positions.shape[0]} points into {cells.shape[0]} cells of {cell_size} m")
    return VoxelMap(float(cell_size), cells, representatives, inverse)
