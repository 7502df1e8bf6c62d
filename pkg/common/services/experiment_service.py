"""Experiment orchestration: the full pipeline, scene sets and sweeps."""
import csv
import glob
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from common.clustering.factory import BaseClusterer, ClustererFactory
from common.clustering.nmc import DEFAULT_TAU, check_tau
from common.clustering.votes import Clustering, VoteSet
from common.eval.metrics import evaluate, gt_masks_from_scene
from common.eval.quality import label_quality
from common.eval.report import EvalReport
from common.instancer.backproject import back_project
from common.instancer.baseline import DEFAULT_NMS_THRESH, detector_baseline
from common.instancer.filter import filter_background
from common.instancer.mask import InstanceMask
from common.oracle.params import SceneGenParams, VoteNoise
from common.oracle.scene_gen import gen_scene
from common.oracle.votes import simulate_votes
from common.scene.io import load_scene
from common.scene.models import BoxAnnotationSet, SceneCloud
from common.scene.segments import aggregate_votes_by_segment
from common.scene.voxel import DEFAULT_CELL_SIZE, voxelize
from common.utils.errors import SchemaError
from common.utils.logger import setup_logger
from common.weaklabel.association import Association, associate
from common.weaklabel.degrade import degrade_annotations

logger = setup_logger(__name__)

SCENE_PATTERN = 'scene_*.json'

METHOD_BOXES_NMC = 'boxes_nmc'
METHOD_CENTERS_SC = 'centers_sc'
METHOD_BOXES_SC = 'boxes_sc'
METHOD_DETECTOR = 'detector'
CLUSTER_METHODS = (METHOD_BOXES_NMC, METHOD_CENTERS_SC, METHOD_BOXES_SC)


class PipelineOptions(BaseModel):
    """Knobs of the label -> vote -> cluster -> segment -> eval chain."""

    model_config = ConfigDict(extra='forbid')

    strategy: Literal['decided', 'closest', 'smallest'] = 'decided'
    algo: Literal['nmc', 'sc'] = 'nmc'
    tau: float = DEFAULT_TAU
    radius: float = Field(default=0.1, gt=0)
    space: Literal['center', 'box'] = 'center'
    per_semantic: bool = False
    cell_size: Optional[float] = Field(default=DEFAULT_CELL_SIZE, gt=0)
    use_segments: bool = True
    nms_thresh: float = Field(default=DEFAULT_NMS_THRESH, gt=0, lt=1)
    thresholds: Optional[List[float]] = None

    @field_validator('tau')
    @classmethod
    def _tau_range(cls, v):
        check_tau(v)
        return v

    def clusterer(self) -> BaseClusterer:
        return ClustererFactory.create_clusterer(self.algo, tau=self.tau, radius=self.radius,
                                                 space=self.space, per_semantic=self.per_semantic)


@dataclass(frozen=True)
class PipelineResult:
    assoc: Association
    votes: VoteSet
    clustering: Clustering
    masks: List[InstanceMask]
    report: Optional[EvalReport]


def derive_seeds(seed: int, count: int) -> List[int]:
    """Independent per-scene seeds, stable for a given (seed, count)."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1)[0]) for c in children]


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> List:
    """Map in input order; results do not depend on ``jobs``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))


def scene_votes(scene: SceneCloud, boxes: BoxAnnotationSet, noise: VoteNoise,
                options: PipelineOptions) -> Tuple[Association, VoteSet]:
    """Weak labels and oracle votes, voxel-level and segment-averaged if configured."""
    assoc = associate(scene, boxes, options.strategy)
    voxel_map = voxelize(scene, options.cell_size) if options.cell_size else None
    votes = simulate_votes(scene, boxes, assoc, noise, voxel_map)
    if options.use_segments and scene.segment_ids is not None:
        reps = voxel_map.representatives if voxel_map is not None else np.arange(scene.num_points)
        votes = aggregate_votes_by_segment(votes, scene.segment_ids[reps])
    return assoc, votes


def cluster_masks(votes: VoteSet, scene: SceneCloud, clusterer: BaseClusterer) -> Tuple[VoteSet, Clustering,
                                                                                         List[InstanceMask]]:
    votes = filter_background(votes, scene.background_class)
    clustering = clusterer(votes)
    return votes, clustering, back_project(clustering, votes)


def run_pipeline(scene: SceneCloud, boxes: BoxAnnotationSet, noise: VoteNoise,
                 options: Optional[PipelineOptions] = None) -> PipelineResult:
    options = options or PipelineOptions()
    assoc, votes = scene_votes(scene, boxes, noise, options)
    votes, clustering, masks = cluster_masks(votes, scene, options.clusterer())
    report = None
    if scene.has_gt:
        report = evaluate(masks, gt_masks_from_scene(scene), options.thresholds, scene.class_names)
    logger.info(f"Pipeline: {len(votes)} votes, {len(clustering)} clusters, {len(masks)} masks")
    return PipelineResult(assoc, votes, clustering, masks, report)


def generate_scene_set(params: SceneGenParams, count: int, seed: int, jobs: int = 1
                       ) -> List[Tuple[SceneCloud, BoxAnnotationSet]]:
    seeds = derive_seeds(seed, count)
    return parallel_map(lambda s: gen_scene(params.model_copy(update={'seed': s})), seeds, jobs)


def load_scene_set(scene_dir: str) -> List[Tuple[SceneCloud, BoxAnnotationSet]]:
    paths = sorted(glob.glob(os.path.join(scene_dir, SCENE_PATTERN)))
    if not paths:
        raise FileNotFoundError(f"No scenes matching {SCENE_PATTERN} in {scene_dir}")
    scenes = []
    for path in paths:
        scene, boxes = load_scene(path)
        if boxes is None or not scene.has_gt:
            raise SchemaError(f"{path} needs boxes and GT masks")
        scenes.append((scene, boxes))
    return scenes


def _scene_noise(noise: VoteNoise, count: int) -> List[VoteNoise]:
    return [noise.model_copy(update={'seed': s}) for s in derive_seeds(noise.seed, count)]


def sweep_tau(scenes: Sequence[Tuple[SceneCloud, BoxAnnotationSet]], taus: Sequence[float], noise: VoteNoise,
              options: Optional[PipelineOptions] = None, jobs: int = 1) -> List[Dict[str, float]]:
    """Mean mAP over the scene set for every tau; votes are simulated once per scene."""
    options = options or PipelineOptions()
    for tau in taus:
        check_tau(tau)
    noises = _scene_noise(noise, len(scenes))

    def run(i: int) -> List[EvalReport]:
        scene, boxes = scenes[i]
        _, votes = scene_votes(scene, boxes, noises[i], options)
        gts = gt_masks_from_scene(scene)
        reports = []
        for tau in taus:
            clusterer = options.model_copy(update={'algo': 'nmc', 'tau': tau}).clusterer()
            _, _, masks = cluster_masks(votes, scene, clusterer)
            reports.append(evaluate(masks, gts, options.thresholds, scene.class_names))
        return reports

    per_scene = parallel_map(run, list(range(len(scenes))), jobs)
    rows = []
    for k, tau in enumerate(taus):
        reports = [r[k] for r in per_scene]
        rows.append({'tau': tau, **_mean_metrics(reports)})
    return rows


def sweep_degrade(scenes: Sequence[Tuple[SceneCloud, BoxAnnotationSet]], jitters: Sequence[float],
                  drops: Sequence[float], seed: int, strategy='decided',
                  thresholds: Optional[Sequence[float]] = None, jobs: int = 1) -> List[Dict[str, float]]:
    """Label quality of degraded boxes over the jitter x drop grid.

    Every grid point reuses the same per-scene seed, so the drop decisions
    and the jitter directions are shared across the grid.
    """
    seeds = derive_seeds(seed, len(scenes))

    def run(i: int) -> List[EvalReport]:
        scene, boxes = scenes[i]
        return [label_quality(scene, degrade_annotations(boxes, drop, jitter, seeds[i]), strategy, thresholds)
                for jitter in jitters for drop in drops]

    per_scene = parallel_map(run, list(range(len(scenes))), jobs)
    rows = []
    grid = [(jitter, drop) for jitter in jitters for drop in drops]
    for k, (jitter, drop) in enumerate(grid):
        rows.append({'jitter': jitter, 'drop': drop, **_mean_metrics([r[k] for r in per_scene])})
    return rows


def method_masks(method: str, votes: VoteSet, scene: SceneCloud, options: PipelineOptions,
                 per_semantic: bool = False, radius: Optional[float] = None) -> List[InstanceMask]:
    if method == METHOD_DETECTOR:
        return detector_baseline(votes, scene, options.nms_thresh, options.strategy)
    if method == METHOD_BOXES_NMC:
        update = {'algo': 'nmc'}
    elif method == METHOD_CENTERS_SC:
        update = {'algo': 'sc', 'space': 'center'}
    elif method == METHOD_BOXES_SC:
        update = {'algo': 'sc', 'space': 'box'}
    else:
        raise ValueError(f"Unsupported method: {method}")
    update['per_semantic'] = per_semantic
    if radius is not None:
        update['radius'] = radius
    return cluster_masks(votes, scene, options.model_copy(update=update).clusterer())[2]


def compare_methods(scenes: Sequence[Tuple[SceneCloud, BoxAnnotationSet]], noise: VoteNoise,
                    options: Optional[PipelineOptions] = None, radii: Optional[Sequence[float]] = None,
                    jobs: int = 1) -> List[Dict]:
    """Score every clustering method and the detector baseline on shared votes.

    Spatial clustering radii are tuned on the whole scene set: the radius with
    the best mean mAP@50 is kept per method variant.
    """
    options = options or PipelineOptions()
    radii = list(radii) if radii else [options.radius]
    noises = _scene_noise(noise, len(scenes))
    variants = [(m, ps) for m in CLUSTER_METHODS for ps in (False, True)]

    def run(i: int) -> Dict[Tuple, List[EvalReport]]:
        scene, boxes = scenes[i]
        _, votes = scene_votes(scene, boxes, noises[i], options)
        gts = gt_masks_from_scene(scene)

        def score(masks):
            return evaluate(masks, gts, options.thresholds, scene.class_names)

        out = {}
        for method, per_sem in variants:
            candidates = radii if method != METHOD_BOXES_NMC else [None]
            out[(method, per_sem)] = [score(method_masks(method, votes, scene, options, per_sem, r))
                                      for r in candidates]
        out[(METHOD_DETECTOR, False)] = [score(method_masks(METHOD_DETECTOR, votes, scene, options))]
        return out

    per_scene = parallel_map(run, list(range(len(scenes))), jobs)

    rows = []
    for method, per_sem in variants + [(METHOD_DETECTOR, False)]:
        key = (method, per_sem)
        n_candidates = len(per_scene[0][key]) if per_scene else 0
        best = 0
        if n_candidates > 1:
            means = [np.mean([s[key][c].map50 for s in per_scene]) for c in range(n_candidates)]
            best = int(np.argmax(means))
        radius = radii[best] if method in (METHOD_CENTERS_SC, METHOD_BOXES_SC) else ''
        name = f"{method}_per_sem" if per_sem else method
        for i, s in enumerate(per_scene):
            rows.append({'scene': i, 'method': name, 'radius': radius, **_metrics(s[key][best])})
    return rows


def _metrics(report: EvalReport) -> Dict[str, float]:
    s = report.summary()
    return {'mAP25': s['mAP25'], 'mAP50': s['mAP50'], 'mAP': s['mAP']}


def _mean_metrics(reports: Sequence[EvalReport]) -> Dict[str, float]:
    rows = [_metrics(r) for r in reports]
    return {k: float(np.mean([r[k] for r in rows])) for k in ('mAP25', 'mAP50', 'mAP')}


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def write_csv(path: str, fieldnames: List[str], rows: Sequence[Dict]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _format(v) for k, v in row.items()})
