from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from common.utils.errors import ParseError, SchemaError


@dataclass(frozen=True)
class InstanceMask:
    """A predicted instance: point set, semantic class and score."""

    point_indices: np.ndarray
    label: int
    score: float = 1.0

    def __post_init__(self):
        points = np.unique(np.asarray(self.point_indices, dtype=np.int64).reshape(-1))
        if points.size == 0:
            raise ValueError("instance mask must be nonempty")
        points.setflags(write=False)
        object.__setattr__(self, 'point_indices', points)
        object.__setattr__(self, 'label', int(self.label))
        object.__setattr__(self, 'score', float(self.score))

    def __len__(self) -> int:
        return self.point_indices.size

    def to_dict(self) -> Dict[str, Any]:
        return {'label': self.label, 'score': self.score, 'points': self.point_indices.tolist()}


def masks_to_dict(masks: List[InstanceMask]) -> Dict[str, Any]:
    return {'instances': [m.to_dict() for m in masks]}


def masks_from_dict(data: Dict[str, Any]) -> List[InstanceMask]:
    if not isinstance(data, dict) or 'instances' not in data:
        raise ParseError("missing instances list", field='instances')
    masks = []
    for i, rec in enumerate(data['instances']):
        for key in ('label', 'score', 'points'):
            if key not in rec:
                raise ParseError("missing instance field", field=key, index=i)
        try:
            masks.append(InstanceMask(rec['points'], rec['label'], rec['score']))
        except (TypeError, ValueError) as e:
            raise ParseError(str(e), field='points', index=i)
    return masks


def check_masks(masks: List[InstanceMask], num_points: int) -> None:
    """Every mask must index points of a scene with ``num_points`` points."""
    for i, m in enumerate(masks):
        if m.point_indices[0] < 0 or m.point_indices[-1] >= num_points:
            raise SchemaError(f"mask {i} indexes points outside the scene ({num_points} points)")
