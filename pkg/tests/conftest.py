import json

import numpy as np
import pytest
import yaml
from click.testing import CliRunner

from cli.main import cli
from common.clustering.votes import VoteSet
from common.geometry.aabb import Aabb
from common.oracle.params import SceneGenParams
from common.oracle.scene_gen import gen_scene
from common.scene.io import save_scene
from common.scene.models import NO_INSTANCE, BoxAnnotationSet, SceneCloud

CLASSES = ['background', 'chair', 'table']
CHAIR, TABLE = 1, 2
UNIT = (1.0, 1.0, 1.0)


@pytest.fixture
def config_path(tmp_path):
    """YAML config with the default parameters and quiet logging."""
    config = {
        'log_level': 'WARNING',
        'defaults': {
            'tau': 0.3,
            'cell_size': 0.02,
            'nms_thresh': 0.25,
            'radius': 0.1,
            'box_epsilon': 0.001,
        },
    }
    path = tmp_path / 'test_config.yaml'
    with open(path, 'w') as f:
        yaml.dump(config, f)
    return str(path)


@pytest.fixture
def runner():
    return CliRunner()


def grid_points(lo, hi, step):
    """Regular grid of points inside [lo, hi] (inclusive of lo)."""
    axes = [np.arange(l, h, step) + step / 2.0 for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def build_scene(objects, background=None, class_names=CLASSES):
    """Scene from (points, label) objects plus background points, with GT."""
    positions, instances, semantics = [], [], []
    for inst, (pts, label) in enumerate(objects):
        positions.append(pts)
        instances.append(np.full(len(pts), inst))
        semantics.append(np.full(len(pts), label))
    if background is not None:
        positions.append(background)
        instances.append(np.full(len(background), NO_INSTANCE))
        semantics.append(np.full(len(background), class_names.index('background')))
    return SceneCloud(
        positions=np.concatenate(positions),
        class_names=class_names,
        gt_instance_ids=np.concatenate(instances),
        gt_semantics=np.concatenate(semantics),
    )


@pytest.fixture
def disjoint_scene():
    """A chair and a table far apart, each filling its box, plus floor points."""
    chair = grid_points((0.0, 0.0, 0.1), (0.5, 0.5, 0.9), 0.1)
    table = grid_points((2.0, 2.0, 0.1), (3.2, 2.8, 0.8), 0.1)
    floor = np.array([[x, y, 0.0] for x in np.arange(0.0, 4.0, 0.5) for y in np.arange(0.0, 4.0, 0.5)])
    scene = build_scene([(chair, CHAIR), (table, TABLE)], floor)
    boxes = BoxAnnotationSet((Aabb.from_corners(chair.min(0), chair.max(0), CHAIR),
                              Aabb.from_corners(table.min(0), table.max(0), TABLE)))
    return scene, boxes


@pytest.fixture
def nested_scene():
    """A chair fully inside the table's box; every chair point is in both boxes."""
    table = grid_points((0.0, 0.0, 0.0), (2.0, 2.0, 1.0), 0.1)
    chair = grid_points((0.6, 0.6, 0.2), (1.4, 1.4, 0.8), 0.05)
    scene = build_scene([(table, TABLE), (chair, CHAIR)])
    boxes = BoxAnnotationSet((Aabb.from_corners(table.min(0), table.max(0), TABLE),
                              Aabb.from_corners(chair.min(0), chair.max(0), CHAIR)))
    return scene, boxes


@pytest.fixture
def small_params():
    return SceneGenParams(room_extent=(6.0, 6.0, 3.0), num_objects=4, points_per_object=300,
                          background_points=400, seed=7)


@pytest.fixture
def generated_scene(small_params):
    return gen_scene(small_params)


def make_votes(centers, sizes, scores, semantics=None):
    """Per-point votes; semantics default to class 1."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    if semantics is None:
        semantics = np.ones(len(centers), dtype=np.int64)
    return VoteSet.per_point(centers, np.asarray(sizes, dtype=np.float64).reshape(-1, 3), scores, semantics)


def scene_like_votes(rng, m, objects=60):
    """Noisy votes around a few dozen boxes in a 10 m room."""
    box_centers = rng.uniform(0.0, 10.0, size=(objects, 3))
    box_sizes = rng.uniform(0.2, 1.5, size=(objects, 3))
    which = rng.integers(objects, size=m)
    centers = box_centers[which] + rng.normal(0.0, 0.08, size=(m, 3))
    sizes = box_sizes[which] * np.exp(rng.normal(0.0, 0.1, size=(m, 3)))
    return make_votes(centers, sizes, rng.uniform(0.05, 0.95, size=m))


@pytest.fixture
def scene_file(tmp_path, generated_scene):
    """Generated scene with its boxes, saved as scene-json."""
    scene, boxes = generated_scene
    path = str(tmp_path / 'scene.json')
    save_scene(path, scene, boxes)
    return path


@pytest.fixture
def gen_config(tmp_path):
    path = tmp_path / 'gen.json'
    path.write_text(json.dumps({'room_extent': [6.0, 6.0, 3.0], 'num_objects': 3, 'points_per_object': 250,
                                'background_points': 300}))
    return str(path)


@pytest.fixture
def sim_dir(tmp_path, runner, config_path, gen_config):
    """Two simulated scenes with noiseless votes."""
    out = str(tmp_path / 'sim')
    result = runner.invoke(cli, ['--config', config_path, 'simulate', '--gen-config', gen_config,
                                 '--count', '2', '--seed', '3', '--out', out])
    assert result.exit_code == 0, result.output
    return out
