"""Scene data model: the point cloud and its box annotations."""
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np

from common.geometry.aabb import Aabb, corners
from common.utils.errors import SchemaError

BACKGROUND_NAME = 'background'
NO_INSTANCE = -1


def _readonly(arr: Optional[np.ndarray], dtype, width: Optional[int] = None) -> Optional[np.ndarray]:
    if arr is None:
        return None
    out = np.array(arr, dtype=dtype)
    if width is not None:
        if out.size == 0:
            out = out.reshape(0, width)
        if out.ndim != 2 or out.shape[1] != width:
            raise SchemaError(f"expected an (N, {width}) array, got shape {out.shape}")
    else:
        out = out.reshape(-1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SceneCloud:
    """Immutable point set with optional per-point attributes."""

    positions: np.ndarray
    class_names: List[str] = field(default_factory=lambda: [BACKGROUND_NAME])
    colors: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = None
    segment_ids: Optional[np.ndarray] = None
    gt_instance_ids: Optional[np.ndarray] = None
    gt_semantics: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, 'positions', _readonly(self.positions, np.float64, 3))
        object.__setattr__(self, 'colors', _readonly(self.colors, np.float64, 3))
        object.__setattr__(self, 'normals', _readonly(self.normals, np.float64, 3))
        object.__setattr__(self, 'segment_ids', _readonly(self.segment_ids, np.int64))
        object.__setattr__(self, 'gt_instance_ids', _readonly(self.gt_instance_ids, np.int64))
        object.__setattr__(self, 'gt_semantics', _readonly(self.gt_semantics, np.int64))
        object.__setattr__(self, 'class_names', list(self.class_names))
        self.validate()

    def validate(self) -> None:
        n = self.num_points
        if not np.all(np.isfinite(self.positions)):
            raise SchemaError("positions must be finite")
        for name in ('colors', 'normals', 'segment_ids', 'gt_instance_ids', 'gt_semantics'):
            arr = getattr(self, name)
            if arr is not None and arr.shape[0] != n:
                raise SchemaError(f"{name} has {arr.shape[0]} entries, expected {n}")
        if self.class_names.count(BACKGROUND_NAME) != 1:
            raise SchemaError("class_names must contain exactly one 'background' class")
        if self.colors is not None and n and (self.colors.min() < 0 or self.colors.max() > 1):
            raise SchemaError("colors must lie in [0, 1]")
        if self.normals is not None and n:
            lengths = np.linalg.norm(self.normals, axis=1)
            bad = np.flatnonzero(np.abs(lengths - 1.0) > 1e-3)
            if bad.size:
                raise SchemaError(f"normal {bad[0]} is not unit length")
        if self.gt_semantics is not None and n:
            if self.gt_semantics.min() < 0 or self.gt_semantics.max() >= self.num_classes:
                raise SchemaError("gt_semantics out of class range")
        if self.gt_instance_ids is not None and self.gt_semantics is not None:
            background = self.gt_semantics == self.background_class
            unassigned = self.gt_instance_ids == NO_INSTANCE
            mismatch = np.flatnonzero(background != unassigned)
            if mismatch.size:
                raise SchemaError(
                    f"point {mismatch[0]}: gt_instance_id must be -1 exactly on background points")

    @property
    def num_points(self) -> int:
        return self.positions.shape[0]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def background_class(self) -> int:
        return self.class_names.index(BACKGROUND_NAME)

    @property
    def has_gt(self) -> bool:
        return self.gt_instance_ids is not None and self.gt_semantics is not None


@dataclass(frozen=True)
class BoxAnnotationSet:
    """Ordered box annotations of one scene; may be empty."""

    boxes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'boxes', tuple(self.boxes))
        for i, b in enumerate(self.boxes):
            if not isinstance(b, Aabb):
                raise SchemaError(f"box {i} is not an Aabb")

    def __len__(self) -> int:
        return len(self.boxes)

    def __iter__(self) -> Iterator[Aabb]:
        return iter(self.boxes)

    def __getitem__(self, i: int) -> Aabb:
        return self.boxes[i]

    def validate_labels(self, background_class: int) -> None:
        for i, b in enumerate(self.boxes):
            if b.label == background_class:
                raise SchemaError(f"box {i} carries the background class")

    @property
    def labels(self) -> np.ndarray:
        return np.array([b.label for b in self.boxes], dtype=np.int64)

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.boxes], dtype=np.float64).reshape(-1, 3)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([b.size for b in self.boxes], dtype=np.float64).reshape(-1, 3)

    @property
    def volumes(self) -> np.ndarray:
        return np.prod(self.sizes, axis=1)

    def corner_arrays(self):
        return corners(self.boxes)

    def subset(self, indices: Sequence[int]) -> 'BoxAnnotationSet':
        return BoxAnnotationSet(tuple(self.boxes[i] for i in indices))
