"""Scene file formats.

scene-json is the canonical, self-describing container (points, optional
per-point attributes, GT masks and boxes). PLY is ingest-only for scenes and
is also used to export colored instance masks.
"""
import json
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from plyfile import PlyData, PlyElement

from common.geometry.aabb import Aabb
from common.scene.models import BACKGROUND_NAME, BoxAnnotationSet, SceneCloud
from common.utils.errors import ParseError, SchemaError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)

SCENE_JSON = 'scene-json'
PLY = 'ply'

_POINT_FIELDS = {
    'color': 'colors',
    'normal': 'normals',
    'segment_id': 'segment_ids',
    'gt_instance_id': 'gt_instance_ids',
    'gt_semantic': 'gt_semantics',
}


def detect_format(path: str) -> str:
    return PLY if path.lower().endswith('.ply') else SCENE_JSON


def read_json(path: str) -> Any:
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON in {path}: {e.msg} at line {e.lineno}")


def write_json(path: str, payload: Any) -> None:
    """Write JSON deterministically (fixed key order, exact float repr)."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=1)
        f.write('\n')


def _vector_rows(records: List[Any], field: str, width: int) -> np.ndarray:
    if not isinstance(records, list):
        raise ParseError("expected a list", field=field)
    for i, row in enumerate(records):
        if not isinstance(row, (list, tuple)) or len(row) != width:
            raise ParseError(f"expected {width} numbers", field=field, index=i)
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError("non-numeric value", field=field, index=i)
    return np.asarray(records, dtype=np.float64).reshape(-1, width)


def _int_rows(records: List[Any], field: str) -> np.ndarray:
    if not isinstance(records, list):
        raise ParseError("expected a list", field=field)
    for i, v in enumerate(records):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParseError("expected an integer", field=field, index=i)
    return np.asarray(records, dtype=np.int64)


def boxes_from_records(records: Any) -> BoxAnnotationSet:
    if not isinstance(records, list):
        raise ParseError("expected a list", field='boxes')
    boxes = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ParseError("expected an object", field='boxes', index=i)
        for key in ('center', 'size', 'label'):
            if key not in rec:
                raise ParseError("missing box field", field=key, index=i)
        center = _vector_rows([rec['center']], 'center', 3)[0]
        size = _vector_rows([rec['size']], 'size', 3)[0]
        label = rec['label']
        if isinstance(label, bool) or not isinstance(label, int):
            raise ParseError("expected an integer", field='label', index=i)
        try:
            boxes.append(Aabb(center, size, label))
        except ValueError as e:
            raise SchemaError(f"box {i}: {str(e)}")
    return BoxAnnotationSet(tuple(boxes))


def boxes_to_records(boxes: BoxAnnotationSet) -> List[Dict[str, Any]]:
    return [b.to_dict() for b in boxes]


def scene_from_dict(data: Dict[str, Any]) -> Tuple[SceneCloud, Optional[BoxAnnotationSet]]:
    if not isinstance(data, dict):
        raise ParseError("scene-json root must be an object")
    if 'points' not in data or not isinstance(data['points'], dict):
        raise ParseError("missing points object", field='points')
    class_names = data.get('class_names', [BACKGROUND_NAME])
    if not isinstance(class_names, list) or not all(isinstance(c, str) for c in class_names):
        raise ParseError("expected a list of strings", field='class_names')

    points = data['points']
    if 'position' not in points:
        raise ParseError("missing point field", field='position')
    kwargs: Dict[str, Any] = {'positions': _vector_rows(points['position'], 'position', 3)}
    for key, attr in _POINT_FIELDS.items():
        if key not in points:
            continue
        if key in ('color', 'normal'):
            kwargs[attr] = _vector_rows(points[key], key, 3)
        else:
            kwargs[attr] = _int_rows(points[key], key)

    scene = SceneCloud(class_names=class_names, **kwargs)
    boxes = None
    if 'boxes' in data:
        boxes = boxes_from_records(data['boxes'])
        boxes.validate_labels(scene.background_class)
    return scene, boxes


def scene_to_dict(scene: SceneCloud, boxes: Optional[BoxAnnotationSet] = None) -> Dict[str, Any]:
    points: Dict[str, Any] = {'position': scene.positions.tolist()}
    for key, attr in _POINT_FIELDS.items():
        arr = getattr(scene, attr)
        if arr is not None:
            points[key] = arr.tolist()
    payload: Dict[str, Any] = {'class_names': list(scene.class_names), 'points': points}
    if boxes is not None:
        payload['boxes'] = boxes_to_records(boxes)
    return payload


def _load_ply(path: str) -> SceneCloud:
    try:
        ply = PlyData.read(path)
    except Exception as e:
        raise ParseError(f"unreadable PLY {path}: {str(e)}")
    if 'vertex' not in [el.name for el in ply.elements]:
        raise ParseError("PLY has no vertex element", field='vertex')
    vertex = ply['vertex'].data
    names = vertex.dtype.names
    for axis in ('x', 'y', 'z'):
        if axis not in names:
            raise ParseError("missing vertex property", field=axis)
    positions = np.stack([vertex['x'], vertex['y'], vertex['z']], axis=1).astype(np.float64)
    colors = None
    if all(c in names for c in ('red', 'green', 'blue')):
        colors = np.stack([vertex['red'], vertex['green'], vertex['blue']], axis=1).astype(np.float64) / 255.0
    logger.debug(f"Read {positions.shape[0]} vertices from {path}")
    return SceneCloud(positions=positions, colors=colors)


def load_scene(path: str, fmt: Optional[str] = None) -> Tuple[SceneCloud, Optional[BoxAnnotationSet]]:
    """Load a scene (and its boxes when the format carries them)."""
    fmt = fmt or detect_format(path)
    if fmt == PLY:
        if not os.path.exists(path):
            raise FileNotFoundError(f"File not found: {path}")
        return _load_ply(path), None
    if fmt != SCENE_JSON:
        raise ValueError(f"Unknown scene format: {fmt}")
    scene, boxes = scene_from_dict(read_json(path))
    logger.debug(f"Loaded scene {path}: {scene.num_points} points, "
                 f"{0 if boxes is None else len(boxes)} boxes")
    return scene, boxes


def save_scene(path: str, scene: SceneCloud, boxes: Optional[BoxAnnotationSet] = None) -> None:
    write_json(path, scene_to_dict(scene, boxes))


def load_boxes(path: str) -> BoxAnnotationSet:
    """Boxes from a box file ({"boxes": [...]}) or from a scene-json."""
    data = read_json(path)
    if isinstance(data, list):
        return boxes_from_records(data)
    if not isinstance(data, dict) or 'boxes' not in data:
        raise ParseError("missing boxes list", field='boxes')
    return boxes_from_records(data['boxes'])


def save_boxes(path: str, boxes: BoxAnnotationSet) -> None:
    write_json(path, {'boxes': boxes_to_records(boxes)})


def write_colored_ply(path: str, positions: np.ndarray, colors: np.ndarray) -> None:
    """Binary little-endian PLY with float32 xyz and uchar rgb."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    vertex = np.empty(positions.shape[0], dtype=[('x', 'f4'), ('y', 'f4'), ('z', 'f4'),
                                                 ('red', 'u1'), ('green', 'u1'), ('blue', 'u1')])
    vertex['x'], vertex['y'], vertex['z'] = positions[:, 0], positions[:, 1], positions[:, 2]
    rgb = np.clip(np.round(colors * 255.0), 0, 255).astype(np.uint8)
    vertex['red'], vertex['green'], vertex['blue'] = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    el = PlyElement.describe(vertex, 'vertex')
    PlyData([el], text=False, byte_order='<').write(path)
