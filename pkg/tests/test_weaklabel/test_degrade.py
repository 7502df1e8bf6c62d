import numpy as np
import pytest

from common.geometry.aabb import Aabb
from common.scene.models import BoxAnnotationSet
from common.weaklabel.degrade import degrade_annotations


@pytest.fixture
def boxes():
    rng = np.random.default_rng(0)
    return BoxAnnotationSet(tuple(Aabb(rng.uniform(0, 10, 3), rng.uniform(1.0, 2.0, 3), 1 + i % 3)
                                  for i in range(40)))


def test_identity_without_degradation(boxes):
    assert degrade_annotations(boxes, 0.0, 0.0, seed=1) == boxes


def test_drop_everything(boxes):
    assert len(degrade_annotations(boxes, 1.0, 0.1, seed=1)) == 0


def test_deterministic(boxes):
    a = degrade_annotations(boxes, 0.3, 0.2, seed=5)
    b = degrade_annotations(boxes, 0.3, 0.2, seed=5)
    assert a == b
    assert a != degrade_annotations(boxes, 0.3, 0.2, seed=6)


def test_drops_are_nested_across_rates(boxes):
    few = degrade_annotations(boxes, 0.1, 0.0, seed=3)
    many = degrade_annotations(boxes, 0.5, 0.0, seed=3)
    assert set(many.boxes) <= set(few.boxes)


def test_jitter_is_bounded(boxes):
    jitter = 0.2
    out = degrade_annotations(boxes, 0.0, jitter, seed=2)
    assert len(out) == len(boxes)
    for before, after in zip(boxes, out):
        assert np.all(np.abs(after.min_corner - before.min_corner) <= jitter + 1e-9)
        assert np.all(np.abs(after.max_corner - before.max_corner) <= jitter + 1e-9)
        assert after.label == before.label


def test_thin_boxes_are_padded():
    tiny = BoxAnnotationSet((Aabb((0, 0, 0), (0.002, 0.002, 0.002), 1),))
    out = degrade_annotations(tiny, 0.0, 0.5, seed=0, epsilon=0.01)
    assert min(out[0].size) >= 0.01 - 1e-12


def test_invalid_parameters(boxes):
    with pytest.raises(ValueError):
        degrade_annotations(boxes, 1.5, 0.0, seed=0)
    with pytest.raises(ValueError):
        degrade_annotations(boxes, 0.0, -0.1, seed=0)


def test_jitter_direction_is_shared_across_rates(boxes):
    small = degrade_annotations(boxes, 0.0, 0.1, seed=4)
    large = degrade_annotations(boxes, 0.0, 0.2, seed=4)
    for before, a, b in zip(boxes, small, large):
        assert np.allclose(b.min_corner - before.min_corner, 2 * (a.min_corner - before.min_corner))
    dropped = degrade_annotations(boxes, 0.5, 0.1, seed=4)
    assert set(dropped.boxes) <= set(small.boxes)
