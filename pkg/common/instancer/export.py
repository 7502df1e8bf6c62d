"""Mask export: boxes fitted to masks, JSON and colored PLY."""
from typing import List

import numpy as np

from common.geometry.aabb import BOX_EPSILON, fit_aabb
from common.instancer.mask import InstanceMask, masks_from_dict, masks_to_dict
from common.scene.io import read_json, write_colored_ply, write_json
from common.scene.models import BoxAnnotationSet, SceneCloud

UNASSIGNED_COLOR = (0.5, 0.5, 0.5)


def masks_to_boxes(masks: List[InstanceMask], scene: SceneCloud, epsilon: float = BOX_EPSILON) -> BoxAnnotationSet:
    """Axis-aligned box per mask, labelled with the mask's class."""
    return BoxAnnotationSet(tuple(fit_aabb(scene.positions[m.point_indices], m.label, epsilon) for m in masks))


def save_masks(path: str, masks: List[InstanceMask]) -> None:
    write_json(path, masks_to_dict(masks))


def load_masks(path: str) -> List[InstanceMask]:
    return masks_from_dict(read_json(path))


def save_masks_ply(path: str, masks: List[InstanceMask], scene: SceneCloud, seed: int = 0) -> None:
    """Write the scene with one random color per mask; unmasked points are grey."""
    rng = np.random.default_rng(seed)
    colors = np.tile(np.asarray(UNASSIGNED_COLOR), (scene.num_points, 1))
    palette = rng.random((len(masks), 3))
    for mask, color in zip(masks, palette):
        colors[mask.point_indices] = color
    write_colored_ply(path, scene.positions, colors)
