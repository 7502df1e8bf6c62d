"""Axis-aligned box primitives.

Boxes are parameterized by center and size (width, height, depth) in meters.
Overlap computations work on corner intervals so that identical boxes give an
IoU of exactly 1.
"""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

Vec3 = Tuple[float, float, float]

# Minimum extent of fitted boxes (1 mm).
BOX_EPSILON = 1e-3

# Slack for closed containment, absorbs center/size round-off on box faces.
CONTAINMENT_TOLERANCE = 1e-9


def _as_vec3(value: Union[Sequence[float], np.ndarray], name: str) -> Vec3:
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box [center, size, label]."""

    center: Vec3
    size: Vec3
    label: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'center', _as_vec3(self.center, 'center'))
        object.__setattr__(self, 'size', _as_vec3(self.size, 'size'))
        if min(self.size) <= 0:
            raise ValueError(f"box size must be positive, got {self.size}")
        if int(self.label) < 0:
            raise ValueError(f"box label must be non-negative, got {self.label}")
        object.__setattr__(self, 'label', int(self.label))

    @classmethod
    def from_corners(cls, lo: Sequence[float], hi: Sequence[float], label: int = 0) -> 'Aabb':
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        return cls(center=(lo + hi) / 2.0, size=hi - lo, label=label)

    @property
    def min_corner(self) -> np.ndarray:
        return np.asarray(self.center) - np.asarray(self.size) / 2.0

    @property
    def max_corner(self) -> np.ndarray:
        return np.asarray(self.center) + np.asarray(self.size) / 2.0

    @property
    def volume(self) -> float:
        return volume(self)

    def translated(self, offset: Sequence[float]) -> 'Aabb':
        return Aabb(np.asarray(self.center) + np.asarray(offset, dtype=np.float64), self.size, self.label)

    def to_dict(self) -> dict:
        return {'center': list(self.center), 'size': list(self.size), 'label': self.label}


def volume(b: Aabb) -> float:
    """Product of the size components."""
    return float(b.size[0] * b.size[1] * b.size[2])


def corners(boxes: Iterable[Aabb]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack min and max corners of many boxes into two (M, 3) arrays."""
    boxes = list(boxes)
    if not boxes:
        return np.zeros((0, 3)), np.zeros((0, 3))
    centers = np.array([b.center for b in boxes], dtype=np.float64)
    sizes = np.array([b.size for b in boxes], dtype=np.float64)
    return centers - sizes / 2.0, centers + sizes / 2.0


def iou_corners(lo: np.ndarray, hi: np.ndarray, los: np.ndarray, his: np.ndarray) -> np.ndarray:
    """IoU of one box (lo, hi) against many boxes given by (M, 3) corner arrays."""
    inter_extent = np.minimum(hi, his) - np.maximum(lo, los)
    inter = np.prod(np.clip(inter_extent, 0.0, None), axis=-1)
    vol_a = np.prod(hi - lo)
    vol_b = np.prod(his - los, axis=-1)
    union = vol_a + vol_b - inter
    return inter / union


def cross_iou(los_a: np.ndarray, his_a: np.ndarray, los_b: np.ndarray, his_b: np.ndarray) -> np.ndarray:
    """(A, B) IoU matrix between two box sets given by corner arrays."""
    inter_extent = (np.minimum(his_a[:, None, :], his_b[None, :, :])
                    - np.maximum(los_a[:, None, :], los_b[None, :, :]))
    inter = np.prod(np.clip(inter_extent, 0.0, None), axis=-1)
    vols_a = np.prod(his_a - los_a, axis=-1)
    vols_b = np.prod(his_b - los_b, axis=-1)
    return inter / (vols_a[:, None] + vols_b[None, :] - inter)


def pairwise_iou(los: np.ndarray, his: np.ndarray) -> np.ndarray:
    """Full (M, M) IoU matrix for boxes given by corner arrays."""
    return cross_iou(los, his, los, his)


def iou_aabb(a: Aabb, b: Aabb) -> float:
    """Volumetric intersection-over-union of two boxes, in [0, 1]."""
    lo_a, hi_a = a.min_corner, a.max_corner
    lo_b, hi_b = b.min_corner, b.max_corner
    return float(iou_corners(lo_a, hi_a, lo_b[None, :], hi_b[None, :])[0])


def contains(b: Aabb, p: Sequence[float]) -> bool:
    """Closed containment: points on the box faces are inside.

    Faces are widened by ``CONTAINMENT_TOLERANCE`` (1e-9 m), so a point within
    that distance outside a face also counts as inside.
    """
    p = np.asarray(p, dtype=np.float64)
    return bool(np.all(p >= b.min_corner - CONTAINMENT_TOLERANCE)
                and np.all(p <= b.max_corner + CONTAINMENT_TOLERANCE))


def contains_points(b: Aabb, points: np.ndarray) -> np.ndarray:
    """Vectorized closed containment for an (N, 3) array, with the same face tolerance."""
    points = np.asarray(points, dtype=np.float64)
    lo = b.min_corner - CONTAINMENT_TOLERANCE
    hi = b.max_corner + CONTAINMENT_TOLERANCE
    return np.all((points >= lo) & (points <= hi), axis=1)


def fit_aabb(points: Union[Sequence[Sequence[float]], np.ndarray], label: int = 0,
             epsilon: float = BOX_EPSILON) -> Aabb:
    """Tightest axis-aligned box around the points.

    Degenerate extents are padded symmetrically to ``epsilon`` so the box keeps
    a positive volume.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("empty point set")
    pts = pts.reshape(-1, 3)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    extent = hi - lo
    thin = extent < epsilon
    if np.any(thin):
        mid = (lo + hi) / 2.0
        lo = np.where(thin, mid - epsilon / 2.0, lo)
        hi = np.where(thin, mid + epsilon / 2.0, hi)
    size = np.where(thin, epsilon, hi - lo)
    return Aabb(center=(lo + hi) / 2.0, size=size, label=label)


def iou_elementwise(los_a: np.ndarray, his_a: np.ndarray, los_b: np.ndarray, his_b: np.ndarray) -> np.ndarray:
    """Row-by-row IoU of two equally long (M, 3) corner arrays."""
    inter_extent = np.minimum(his_a, his_b) - np.maximum(los_a, los_b)
    inter = np.prod(np.clip(inter_extent, 0.0, None), axis=-1)
    vol_a = np.prod(his_a - los_a, axis=-1)
    vol_b = np.prod(his_b - los_b, axis=-1)
    return inter / (vol_a + vol_b - inter)
