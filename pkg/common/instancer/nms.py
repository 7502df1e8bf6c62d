from typing import List, Sequence, Tuple

import numpy as np

from common.geometry.aabb import Aabb, iou_corners


def nms_corners(los: np.ndarray, his: np.ndarray, scores: np.ndarray, iou_thresh: float) -> np.ndarray:
    """Greedy NMS over corner arrays; returns kept indices in score order."""
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    keep = []
    while order.size:
        i = order[0]
        keep.append(int(i))
        rest = order[1:]
        ious = iou_corners(los[i], his[i], los[rest], his[rest])
        order = rest[ious <= iou_thresh]
    return np.asarray(keep, dtype=np.int64)


def nms(scored_boxes: Sequence[Tuple[Aabb, float]], iou_thresh: float) -> List[int]:
    """Keep a box iff its IoU with every previously kept box is <= iou_thresh.

    Boxes are visited by descending score, ties by index.
    """
    if not scored_boxes:
        return []
    los = np.array([b.min_corner for b, _ in scored_boxes], dtype=np.float64)
    his = np.array([b.max_corner for b, _ in scored_boxes], dtype=np.float64)
    scores = np.array([s for _, s in scored_boxes], dtype=np.float64)
    return nms_corners(los, his, scores, iou_thresh).tolist()
