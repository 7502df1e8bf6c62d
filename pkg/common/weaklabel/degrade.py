"""Synthetic annotation degradation: missing boxes and corner noise."""
import numpy as np

from common.geometry.aabb import BOX_EPSILON, Aabb
from common.scene.models import BoxAnnotationSet
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


def degrade_annotations(boxes: BoxAnnotationSet, drop_rate: float, corner_jitter_max: float,
                        seed: int, epsilon: float = BOX_EPSILON) -> BoxAnnotationSet:
    """Drop boxes and jitter the corners of the survivors.

    Draw order: one uniform per box for the drop decisions, then six
    uniforms per box (min corner xyz, max corner xyz), drawn for dropped boxes
    too so a box keeps its jitter across drop rates.
    """
    if not 0.0 <= drop_rate <= 1.0:
        raise ValueError("drop_rate must be in [0, 1]")
    if corner_jitter_max < 0:
        raise ValueError("corner_jitter_max must be non-negative")

    rng = np.random.default_rng(seed)
    keep = rng.random(len(boxes)) >= drop_rate
    survivors = [b for b, k in zip(boxes, keep) if k]
    if not survivors or corner_jitter_max == 0:
        return BoxAnnotationSet(tuple(survivors))

    unit = rng.uniform(-1.0, 1.0, size=(len(boxes), 2, 3))
    noise = unit[keep] * corner_jitter_max
    out = []
    for b, (d_lo, d_hi) in zip(survivors, noise):
        a = b.min_corner + d_lo
        c = b.max_corner + d_hi
        lo = np.minimum(a, c)
        hi = np.maximum(a, c)
        thin = (hi - lo) < epsilon
        mid = (lo + hi) / 2.0
        lo = np.where(thin, mid - epsilon / 2.0, lo)
        hi = np.where(thin, mid + epsilon / 2.0, hi)
        out.append(Aabb.from_corners(lo, hi, b.label))

    logger.debug(f"Degraded {len(boxes)} boxes: kept {len(out)}, jitter {corner_jitter_max} m")
    return BoxAnnotationSet(tuple(out))
