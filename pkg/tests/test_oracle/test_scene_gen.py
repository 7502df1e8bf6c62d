import json

import numpy as np
import pytest
from pydantic import ValidationError

from common.geometry.aabb import BOX_EPSILON, fit_aabb, pairwise_iou
from common.oracle.params import SceneGenParams, VoteNoise
from common.oracle.scene_gen import gen_scene
from common.scene.models import NO_INSTANCE
from common.utils.errors import PlacementError
from common.weaklabel.association import overlap_fraction, undecided_fraction, associate


def params(**overrides):
    base = dict(room_extent=(6.0, 6.0, 3.0), num_objects=2, points_per_object=200,
                background_points=300, seed=1)
    base.update(overrides)
    return SceneGenParams(**base)


def test_no_objects_gives_background_only_scene():
    scene, boxes = gen_scene(params(num_objects=0))
    assert len(boxes) == 0
    assert scene.num_points == 300
    assert (scene.gt_instance_ids == NO_INSTANCE).all()
    assert (scene.gt_semantics == scene.background_class).all()


def test_disjoint_mode_has_no_overlaps():
    scene, boxes = gen_scene(params())
    assert len(boxes) == 2
    los, his = boxes.corner_arrays()
    iou = pairwise_iou(los, his)
    assert iou[0, 1] == 0.0
    assert undecided_fraction(associate(scene, boxes)) == 0.0


def test_background_lies_outside_boxes_in_disjoint_mode(generated_scene):
    scene, boxes = generated_scene
    assoc = associate(scene, boxes)
    background = scene.gt_instance_ids == NO_INSTANCE
    assert assoc.background[background].all()
    assert not assoc.background[~background].any()


def test_gt_boxes_fit_object_points(generated_scene):
    scene, boxes = generated_scene
    for k, box in enumerate(boxes):
        fitted = fit_aabb(scene.positions[scene.gt_instance_ids == k], box.label)
        assert np.allclose(fitted.min_corner, box.min_corner, atol=BOX_EPSILON)
        assert np.allclose(fitted.max_corner, box.max_corner, atol=BOX_EPSILON)
        assert box.label == int(scene.gt_semantics[scene.gt_instance_ids == k][0])


def test_nested_mode_places_inner_box_inside_outer():
    scene, boxes = gen_scene(params(overlap_mode='nested', num_objects=4))
    assert overlap_fraction(scene, boxes) > 0
    for outer, inner in ((boxes[0], boxes[1]), (boxes[2], boxes[3])):
        assert (inner.min_corner > outer.min_corner).all()
        assert (inner.max_corner < outer.max_corner).all()


def test_concentric_nesting_shares_centers():
    _, boxes = gen_scene(params(overlap_mode='nested', concentric=True, points_per_object=2000))
    # fitted boxes of uniform samples; centers agree up to sampling slack
    assert np.allclose(boxes[0].center, boxes[1].center, atol=0.05)


def test_touching_mode_pairs_share_a_face():
    _, boxes = gen_scene(params(overlap_mode='touching'))
    first, second = boxes[0], boxes[1]
    assert first.label == second.label
    assert first.max_corner[0] <= second.min_corner[0]
    assert second.min_corner[0] - first.max_corner[0] < 0.1


def test_generation_is_deterministic():
    a_scene, a_boxes = gen_scene(params(overlap_mode='nested', num_objects=3))
    b_scene, b_boxes = gen_scene(params(overlap_mode='nested', num_objects=3))
    assert np.array_equal(a_scene.positions, b_scene.positions)
    assert np.array_equal(a_scene.segment_ids, b_scene.segment_ids)
    assert np.array_equal(a_scene.colors, b_scene.colors)
    assert np.array_equal(a_boxes.centers, b_boxes.centers)

    c_scene, _ = gen_scene(params(overlap_mode='nested', num_objects=3, seed=2))
    assert not np.array_equal(a_scene.positions, c_scene.positions)


def test_segments_stay_inside_one_object(generated_scene):
    scene, _ = generated_scene
    for seg in np.unique(scene.segment_ids):
        assert np.unique(scene.gt_instance_ids[scene.segment_ids == seg]).size == 1


def test_placement_failure():
    p = params(room_extent=(1.0, 1.0, 1.0), class_names=['background', 'table'],
               class_size_ranges={'table': ((2.0, 2.0, 2.0), (3.0, 3.0, 3.0))})
    with pytest.raises(PlacementError, match="placement failed"):
        gen_scene(p)


def test_crowded_room_fails_after_retries():
    p = params(room_extent=(2.0, 2.0, 2.0), num_objects=40, max_retries=20)
    with pytest.raises(PlacementError, match="placement failed"):
        gen_scene(p)


@pytest.mark.parametrize('overrides', [
    {'num_objects': -1},
    {'points_per_object': -5},
    {'room_extent': (0.0, 1.0, 1.0)},
    {'overlap_mode': 'stacked'},
    {'class_names': ['chair', 'table']},
    {'class_size_ranges': {'sofa': ((1.0, 1.0, 1.0), (2.0, 2.0, 2.0))}},
    {'unknown_key': 1},
])
def test_invalid_scene_params(overrides):
    with pytest.raises(ValidationError):
        params(**overrides)


@pytest.mark.parametrize('overrides', [
    {'center_sigma': -0.1},
    {'sem_flip_prob': 1.5},
    {'seed': 'abc'},
    {'sigma': 0.1},
])
def test_invalid_noise_params(overrides):
    with pytest.raises(ValidationError):
        VoteNoise(**overrides)


def test_params_from_json_file(tmp_path):
    path = tmp_path / 'gen.json'
    path.write_text(json.dumps({'num_objects': 3, 'overlap_mode': 'nested', 'seed': 4}))
    p = SceneGenParams.from_file(str(path))
    assert p.num_objects == 3
    assert p.overlap_mode == 'nested'

    noise_path = tmp_path / 'noise.json'
    noise_path.write_text(json.dumps({'center_sigma': 0.05, 'seed': 9}))
    noise = VoteNoise.from_file(str(noise_path))
    assert noise.center_sigma == 0.05
    assert noise.size_sigma == 0.0
