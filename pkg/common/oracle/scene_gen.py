"""Synthetic scenes: objects as uniform samples inside boxes, plus floor and walls."""
from typing import List, Tuple

import numpy as np

from common.geometry.aabb import fit_aabb
from common.oracle.params import SceneGenParams
from common.scene.models import NO_INSTANCE, BoxAnnotationSet, SceneCloud
from common.utils.errors import PlacementError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

Region = Tuple[np.ndarray, np.ndarray]

BACKGROUND_GRAY = 0.5
# Inner objects of a nested pair keep this share of the outer extent as margin.
NESTED_MARGIN = 0.05


class _Layout:
    """Places axis-aligned footprints in the room, keeping a gap between them."""

    def __init__(self, params: SceneGenParams, rng: np.random.Generator):
        self.params = params
        self.rng = rng
        self.room = np.asarray(params.room_extent, dtype=np.float64)
        self.placed: List[Region] = []

    def _separated(self, lo: np.ndarray, hi: np.ndarray) -> bool:
        gap = self.params.min_gap
        for plo, phi in self.placed:
            if not np.any((lo >= phi + gap) | (plo >= hi + gap)):
                return False
        return True

    def place(self, size: np.ndarray) -> Region:
        p = self.params
        low = np.array([p.min_gap, p.min_gap, p.floor_clearance])
        high = self.room - size - np.array([p.min_gap, p.min_gap, 0.0])
        high[2] = p.floor_clearance
        if np.any(high < low) or p.floor_clearance + size[2] > self.room[2]:
            raise PlacementError("placement failed")
        for _ in range(p.max_retries):
            lo = self.rng.uniform(low, high)
            hi = lo + size
            if self._separated(lo, hi):
                self.placed.append((lo, hi))
                return lo, hi
        raise PlacementError("placement failed")


def _class_pool(params: SceneGenParams) -> List[str]:
    return [c for c in params.class_names if c in params.class_size_ranges]


def _sample_size(rng: np.random.Generator, params: SceneGenParams, name: str) -> np.ndarray:
    lo, hi = params.class_size_ranges[name]
    return rng.uniform(np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64))


def _layout_objects(params: SceneGenParams, rng: np.random.Generator) -> List[Tuple[str, Region]]:
    """Class name and sampling region of every object, in instance order."""
    pool = _class_pool(params)
    layout = _Layout(params, rng)
    objects: List[Tuple[str, Region]] = []
    mode = params.overlap_mode
    k = 0
    while k < params.num_objects:
        name = pool[int(rng.integers(len(pool)))]
        size = _sample_size(rng, params, name)
        paired = mode != 'none' and k + 1 < params.num_objects

        if not paired:
            objects.append((name, layout.place(size)))
            k += 1
            continue

        if mode == 'touching':
            # same class, smaller partner sharing the +x face
            partner = size * rng.uniform(0.6, 0.85, size=3)
            footprint = np.array([size[0] + params.touch_gap + partner[0],
                                  max(size[1], partner[1]), max(size[2], partner[2])])
            lo, _ = layout.place(footprint)
            first = (lo.copy(), lo + size)
            second_lo = lo + np.array([size[0] + params.touch_gap, 0.0, 0.0])
            objects.append((name, first))
            objects.append((name, (second_lo, second_lo + partner)))
        else:
            outer = layout.place(size)
            inner_name = pool[int(rng.integers(len(pool)))]
            inner_size = size * rng.uniform(0.3, 0.5, size=3)
            o_lo, o_hi = outer
            if params.concentric:
                center = (o_lo + o_hi) / 2.0
            else:
                margin = NESTED_MARGIN * size
                center = rng.uniform(o_lo + margin + inner_size / 2.0, o_hi - margin - inner_size / 2.0)
            objects.append((name, outer))
            objects.append((inner_name, (center - inner_size / 2.0, center + inner_size / 2.0)))
        k += 2
    return objects


def _segment_ids(points: np.ndarray, origin: np.ndarray, segment_size: float, offset: int) -> Tuple[np.ndarray, int]:
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), offset
    keys = np.floor((points - origin) / segment_size).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    return inverse + offset, offset + int(inverse.max()) + 1


def _background(params: SceneGenParams, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Floor (z = 0) and wall points; returns positions and a surface id per point."""
    room = np.asarray(params.room_extent, dtype=np.float64)
    n = params.background_points
    n_floor = n // 2
    floor = rng.uniform([0.0, 0.0, 0.0], [room[0], room[1], 0.0], size=(n_floor, 3))
    walls = rng.uniform([0.0, 0.0, 0.0], room, size=(n - n_floor, 3))
    which = rng.integers(4, size=n - n_floor)
    walls[which == 0, 0] = 0.0
    walls[which == 1, 0] = room[0]
    walls[which == 2, 1] = 0.0
    walls[which == 3, 1] = room[1]
    positions = np.concatenate([floor, walls], axis=0)
    surface = np.concatenate([np.full(n_floor, 4), which]).astype(np.int64)
    return positions, surface


def gen_scene(params: SceneGenParams) -> Tuple[SceneCloud, BoxAnnotationSet]:
    """Generate a scene with GT masks and the boxes fitted to each object."""
    rng = np.random.default_rng(params.seed)
    objects = _layout_objects(params, rng)

    positions, colors, segments, instances, semantics = [], [], [], [], []
    boxes = []
    next_segment = 0
    for inst, (name, (lo, hi)) in enumerate(objects):
        label = params.class_names.index(name)
        pts = rng.uniform(lo, hi, size=(params.points_per_object, 3))
        color = rng.uniform(0.2, 1.0, size=3)
        seg, next_segment = _segment_ids(pts, lo, params.segment_size, next_segment)
        positions.append(pts)
        colors.append(np.tile(color, (pts.shape[0], 1)))
        segments.append(seg)
        instances.append(np.full(pts.shape[0], inst, dtype=np.int64))
        semantics.append(np.full(pts.shape[0], label, dtype=np.int64))
        if pts.shape[0]:
            boxes.append(fit_aabb(pts, label))

    background_class = params.class_names.index('background')
    bg, surface = _background(params, rng)
    keys_origin = np.zeros(3)
    bg_segments = np.zeros(0, dtype=np.int64)
    if bg.shape[0]:
        # one over-segmentation per surface, so segments never span walls
        bg_segments = np.zeros(bg.shape[0], dtype=np.int64)
        for s in range(5):
            members = np.flatnonzero(surface == s)
            if members.size:
                bg_segments[members], next_segment = _segment_ids(
                    bg[members], keys_origin, params.segment_size, next_segment)
    positions.append(bg)
    colors.append(np.full((bg.shape[0], 3), BACKGROUND_GRAY))
    segments.append(bg_segments)
    instances.append(np.full(bg.shape[0], NO_INSTANCE, dtype=np.int64))
    semantics.append(np.full(bg.shape[0], background_class, dtype=np.int64))

    scene = SceneCloud(
        positions=np.concatenate(positions, axis=0),
        class_names=list(params.class_names),
        colors=np.concatenate(colors, axis=0),
        segment_ids=np.concatenate(segments),
        gt_instance_ids=np.concatenate(instances),
        gt_semantics=np.concatenate(semantics),
    )
    logger.debug(f"Generated scene seed={params.seed} mode={params.overlap_mode}: "
                 f"{len(objects)} objects, {scene.num_points} points")
    return scene, BoxAnnotationSet(tuple(boxes))
