"""Parameter models for the synthetic scene generator and the vote simulator.

Both accept JSON/YAML files whose keys match the field names exactly.
"""
from typing import Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from common.scene.models import BACKGROUND_NAME
from common.utils.config import load_mapping

Triple = Tuple[float, float, float]

DEFAULT_CLASSES = [BACKGROUND_NAME, 'chair', 'table', 'cabinet', 'box']
DEFAULT_SIZE_RANGES = {
    'chair': ((0.4, 0.4, 0.7), (0.6, 0.6, 1.0)),
    'table': ((0.8, 0.6, 0.6), (1.6, 1.0, 0.8)),
    'cabinet': ((0.5, 0.4, 0.8), (1.0, 0.6, 1.6)),
    'box': ((0.2, 0.2, 0.2), (0.4, 0.4, 0.4)),
}


class SceneGenParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    room_extent: Triple = (10.0, 10.0, 3.0)
    num_objects: int = Field(default=10, ge=0)
    class_names: List[str] = Field(default_factory=lambda: list(DEFAULT_CLASSES))
    class_size_ranges: Dict[str, Tuple[Triple, Triple]] = Field(
        default_factory=lambda: dict(DEFAULT_SIZE_RANGES))
    points_per_object: int = Field(default=2000, ge=0)
    background_points: int = Field(default=5000, ge=0)
    overlap_mode: Literal['none', 'nested', 'touching'] = 'none'
    seed: int = 0
    min_gap: float = Field(default=0.1, ge=0)
    floor_clearance: float = Field(default=0.05, gt=0)
    segment_size: float = Field(default=0.25, gt=0)
    concentric: bool = False
    touch_gap: float = Field(default=0.0, ge=0)
    max_retries: int = Field(default=500, ge=1)

    @field_validator('room_extent')
    @classmethod
    def _positive_extent(cls, v):
        if min(v) <= 0:
            raise ValueError("room_extent must be positive")
        return v

    @model_validator(mode='after')
    def _check_classes(self):
        if self.class_names.count(BACKGROUND_NAME) != 1:
            raise ValueError("class_names must contain exactly one 'background'")
        for name, (lo, hi) in self.class_size_ranges.items():
            if name not in self.class_names or name == BACKGROUND_NAME:
                raise ValueError(f"size range for unknown class '{name}'")
            if min(lo) <= 0 or any(a > b for a, b in zip(lo, hi)):
                raise ValueError(f"invalid size range for class '{name}'")
        if self.num_objects and not self.class_size_ranges:
            raise ValueError("class_size_ranges must not be empty")
        return self

    @classmethod
    def from_file(cls, path: str) -> 'SceneGenParams':
        return cls(**load_mapping(path))


class VoteNoise(BaseModel):
    model_config = ConfigDict(extra='forbid')

    center_sigma: float = Field(default=0.0, ge=0)
    size_sigma: float = Field(default=0.0, ge=0)
    score_noise_sigma: float = Field(default=0.0, ge=0)
    sem_flip_prob: float = Field(default=0.0, ge=0, le=1)
    seed: int = 0

    @classmethod
    def from_file(cls, path: str) -> 'VoteNoise':
        return cls(**load_mapping(path))
