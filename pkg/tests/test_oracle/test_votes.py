import numpy as np
import pytest

from common.losses.losses import PROB_CLAMP
from common.oracle.params import SceneGenParams, VoteNoise
from common.oracle.scene_gen import gen_scene
from common.oracle.votes import simulate_votes, votes_to_prediction
from common.scene.voxel import voxelize
from common.weaklabel.association import Strategy, associate


@pytest.fixture
def decided(generated_scene):
    scene, boxes = generated_scene
    return scene, boxes, associate(scene, boxes)


def test_zero_noise_votes_are_the_associated_boxes(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise())
    fg = assoc.foreground
    assert len(votes) == scene.num_points
    assert np.array_equal(votes.centers[fg], boxes.centers[assoc.tags[fg]])
    assert np.array_equal(votes.sizes[fg], boxes.sizes[assoc.tags[fg]])
    assert (votes.scores[fg] == 1.0 - PROB_CLAMP).all()
    assert np.array_equal(votes.semantics[fg], boxes.labels[assoc.tags[fg]])


def test_background_points_vote_background(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(center_sigma=0.1))
    bg = assoc.background
    assert (votes.semantics[bg] == scene.background_class).all()
    assert np.array_equal(votes.centers[bg], scene.positions[bg])
    assert (votes.scores[bg] == PROB_CLAMP).all()


def test_undecided_points_take_the_smallest_box(nested_scene):
    scene, boxes = nested_scene
    assoc = associate(scene, boxes, Strategy.DECIDED_ONLY)
    votes = simulate_votes(scene, boxes, assoc, VoteNoise())
    und = assoc.undecided
    assert und.any()
    # box 1 is the chair, inside the table
    assert (votes.centers[und] == boxes[1].center).all()
    assert (votes.semantics[und] == boxes[1].label).all()


def test_full_flip_never_keeps_the_class(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(sem_flip_prob=1.0, seed=3))
    fg = assoc.foreground
    own = boxes.labels[assoc.tags[fg]]
    assert not (votes.semantics[fg] == own).any()
    assert (votes.semantics[fg] != scene.background_class).all()


def test_flips_spread_over_other_classes(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(sem_flip_prob=1.0, seed=3))
    seen = set(votes.semantics[assoc.foreground].tolist())
    assert scene.background_class not in seen
    assert len(seen) >= 3


def test_center_noise_matches_half_normal_mean():
    sigma = 0.05
    p = SceneGenParams(room_extent=(8.0, 8.0, 3.0), num_objects=4, points_per_object=3000,
                       background_points=0, seed=2)
    scene, boxes = gen_scene(p)
    assoc = associate(scene, boxes)
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(center_sigma=sigma, seed=5))
    fg = assoc.foreground
    assert fg.sum() >= 10_000
    err = np.abs(votes.centers[fg] - boxes.centers[assoc.tags[fg]])
    expected = sigma * np.sqrt(2.0 / np.pi)
    assert err.mean() == pytest.approx(expected, rel=0.1)


def test_size_noise_keeps_sizes_positive(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(size_sigma=1.0, seed=1))
    assert (votes.sizes > 0).all()


def test_scores_stay_clamped(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(center_sigma=0.2, score_noise_sigma=2.0, seed=1))
    assert (votes.scores >= PROB_CLAMP).all()
    assert (votes.scores <= 1.0 - PROB_CLAMP).all()


def test_votes_are_deterministic(decided):
    scene, boxes, assoc = decided
    noise = VoteNoise(center_sigma=0.05, size_sigma=0.1, score_noise_sigma=0.05, sem_flip_prob=0.2, seed=8)
    a = simulate_votes(scene, boxes, assoc, noise)
    b = simulate_votes(scene, boxes, assoc, noise)
    assert a.to_dict() == b.to_dict()


def test_voxel_votes_expand_to_cells(decided):
    scene, boxes, assoc = decided
    voxel_map = voxelize(scene, 0.1)
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(), voxel_map)
    assert len(votes) == len(voxel_map)
    assert np.array_equal(votes.point_indices(), np.arange(scene.num_points))


def test_votes_to_prediction_roundtrip(decided):
    scene, boxes, assoc = decided
    votes = simulate_votes(scene, boxes, assoc, VoteNoise(center_sigma=0.05, seed=2))
    pred = votes_to_prediction(votes, scene)
    assert np.allclose(pred.predicted_centers(scene), votes.centers)
    assert np.array_equal(pred.sizes, votes.sizes)
    assert np.array_equal(pred.sem_probs.argmax(axis=1), votes.semantics)
