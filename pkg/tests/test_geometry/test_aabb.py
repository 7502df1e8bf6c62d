import numpy as np
import pytest

from common.geometry.aabb import (BOX_EPSILON, CONTAINMENT_TOLERANCE, Aabb, contains, contains_points, cross_iou,
                                  fit_aabb, iou_aabb, pairwise_iou, volume)


def unit(center, label=0):
    return Aabb(center, (1.0, 1.0, 1.0), label)


def random_box(rng, spread=1.0):
    return Aabb(rng.uniform(-spread, spread, 3), rng.uniform(0.2, 1.5, 3))


def test_iou_identical_boxes():
    assert iou_aabb(unit((0, 0, 0)), unit((0, 0, 0))) == 1.0


def test_iou_disjoint_boxes():
    assert iou_aabb(unit((0, 0, 0)), unit((5, 0, 0))) == 0.0


def test_iou_half_shifted_cubes():
    assert iou_aabb(unit((0, 0, 0)), unit((0.5, 0, 0))) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_iou_touching_faces_is_zero():
    assert iou_aabb(unit((0, 0, 0)), unit((1.0, 0, 0))) == 0.0


def test_iou_properties_on_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = random_box(rng), random_box(rng)
        v = iou_aabb(a, b)
        assert 0.0 <= v <= 1.0
        assert v == iou_aabb(b, a)
        assert iou_aabb(a, a) == 1.0

        t = rng.uniform(-10, 10, 3)
        assert iou_aabb(a.translated(t), b.translated(t)) == pytest.approx(v, abs=1e-12)

        k = rng.uniform(0.1, 10.0)
        pivot = rng.uniform(-1, 1, 3)
        scale = lambda box: Aabb(pivot + k * (np.asarray(box.center) - pivot), k * np.asarray(box.size))
        assert iou_aabb(scale(a), scale(b)) == pytest.approx(v, abs=1e-9)


def test_iou_agrees_with_monte_carlo():
    rng = np.random.default_rng(1)
    n = 20000
    for _ in range(100):
        a, b = random_box(rng, 0.5), random_box(rng, 0.5)
        lo = np.minimum(a.min_corner, b.min_corner)
        hi = np.maximum(a.max_corner, b.max_corner)
        samples = rng.uniform(lo, hi, size=(n, 3))
        in_a = contains_points(a, samples)
        in_b = contains_points(b, samples)
        union = np.count_nonzero(in_a | in_b)
        estimate = np.count_nonzero(in_a & in_b) / union
        exact = iou_aabb(a, b)
        sigma = np.sqrt(max(exact * (1 - exact), 1e-4) / union)
        assert abs(exact - estimate) < 4 * sigma


def test_cross_iou_matches_scalar_iou():
    rng = np.random.default_rng(2)
    boxes_a = [random_box(rng) for _ in range(4)]
    boxes_b = [random_box(rng) for _ in range(3)]
    los_a = np.array([b.min_corner for b in boxes_a])
    his_a = np.array([b.max_corner for b in boxes_a])
    los_b = np.array([b.min_corner for b in boxes_b])
    his_b = np.array([b.max_corner for b in boxes_b])
    matrix = cross_iou(los_a, his_a, los_b, his_b)
    assert matrix.shape == (4, 3)
    for i, a in enumerate(boxes_a):
        for j, b in enumerate(boxes_b):
            assert matrix[i, j] == pytest.approx(iou_aabb(a, b), abs=1e-12)
    assert np.allclose(np.diag(pairwise_iou(los_a, his_a)), 1.0)


def test_contains_is_closed():
    box = unit((0, 0, 0))
    assert contains(box, (0, 0, 0))
    assert contains(box, (0.5, 0, 0))
    assert not contains(box, (0.6, 0, 0))


def test_containment_tolerance_is_one_nanometer():
    box = unit((0, 0, 0))
    assert contains(box, (0.5 + 0.5 * CONTAINMENT_TOLERANCE, 0, 0))
    assert not contains(box, (0.5 + 10 * CONTAINMENT_TOLERANCE, 0, 0))
    points = np.array([[0, -0.5 - 0.5 * CONTAINMENT_TOLERANCE, 0], [0, 0, 0.5 + 1e-6]])
    assert contains_points(box, points).tolist() == [True, False]


def test_fit_two_corners():
    box = fit_aabb([(0, 0, 0), (1, 1, 1)], label=3)
    assert box.center == (0.5, 0.5, 0.5)
    assert box.size == (1.0, 1.0, 1.0)
    assert box.label == 3


def test_fit_single_point_pads_to_epsilon():
    box = fit_aabb([(0, 0, 0)])
    assert box.size == pytest.approx((BOX_EPSILON,) * 3)
    assert box.center == pytest.approx((0.0, 0.0, 0.0))


def test_fit_planar_points():
    box = fit_aabb([(0, 0, 0), (2, 0, 0), (1, 3, 0)])
    assert box.center == pytest.approx((1.0, 1.5, 0.0))
    assert box.size == pytest.approx((2.0, 3.0, BOX_EPSILON))


def test_fit_contains_every_point():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pts = rng.normal(size=(rng.integers(1, 40), 3)) * rng.uniform(0.01, 5.0)
        box = fit_aabb(pts)
        assert contains_points(box, pts).all()


def test_fit_empty_raises():
    with pytest.raises(ValueError, match="empty point set"):
        fit_aabb(np.zeros((0, 3)))


@pytest.mark.parametrize("size,expected", [
    ((1, 1, 1), 1.0),
    ((2, 3, 4), 24.0),
    ((0.1, 0.1, 0.1), 1e-3),
])
def test_volume(size, expected):
    assert volume(Aabb((0, 0, 0), size)) == pytest.approx(expected)


def test_invalid_boxes_rejected():
    with pytest.raises(ValueError):
        Aabb((0, 0, 0), (1, 0, 1))
    with pytest.raises(ValueError):
        Aabb((0, 0, 0), (1, 1, 1), label=-1)
    with pytest.raises(ValueError):
        Aabb((0, np.nan, 0), (1, 1, 1))
