import os
from typing import Optional

import click

from cli.run_config import DataFileError, config_defaults, load_params, parse_grid, resolve
from common.clustering.io import save_votes
from common.eval.report import save_report, save_table
from common.instancer.export import save_masks
from common.oracle.params import SceneGenParams, VoteNoise
from common.scene.io import load_boxes, load_scene, save_scene
from common.services.experiment_service import (PipelineOptions, compare_methods, derive_seeds,
                                                generate_scene_set, load_scene_set, parallel_map,
                                                run_pipeline, scene_votes, sweep_degrade as run_sweep_degrade,
                                                sweep_tau as run_sweep_tau, write_csv)
from common.utils.errors import DataError, SchemaError
from common.utils.logger import setup_logger
from common.weaklabel.association import boxes_from_instances

logger = setup_logger(__name__)

STRATEGIES = click.Choice(['decided', 'closest', 'smallest'])


def _pipeline_options(ctx, run, cell_size: Optional[float], segments: bool, **extra) -> PipelineOptions:
    if cell_size is None:
        cell_size = config_defaults(ctx)['cell_size']
    fields = dict(strategy=run.strategy or 'decided', cell_size=cell_size or None, use_segments=segments,
                  thresholds=run.thresholds)
    for key in ('tau', 'radius', 'nms_thresh'):
        if getattr(run, key) is not None:
            fields[key] = getattr(run, key)
    fields.update(extra)
    return load_params(PipelineOptions, None, ctx, **fields)


def _noise(ctx, noise_path: Optional[str], seed: Optional[int]) -> VoteNoise:
    return load_params(VoteNoise, noise_path, ctx, seed=seed)


@click.command()
@click.option('--gen-config', 'gen_path', type=str, help='Scene generator parameters (JSON/YAML)')
@click.option('--noise-config', 'noise_path', type=str, help='Vote noise parameters (JSON/YAML)')
@click.option('--seed', type=int, default=0, show_default=True, help='Base seed for the scene set')
@click.option('--count', type=click.IntRange(min=1), default=1, show_default=True, help='Number of scenes')
@click.option('--strategy', type=STRATEGIES, default='decided', show_default=True, help='Association strategy')
@click.option('--cell-size', type=float, default=None, help='Voxel size in meters, 0 for per-point votes (default 0.02)')
@click.option('--segments/--no-segments', default=True, show_default=True, help='Average votes over segments')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True, help='Parallel scenes')
@click.option('--out', 'out_dir', type=str, required=True, help='Output directory')
@click.pass_context
def simulate(ctx, gen_path: str, noise_path: str, seed: int, count: int, strategy: str, cell_size: float,
             segments: bool, jobs: int, out_dir: str):
    """Generate synthetic scenes and oracle votes."""
    gen = load_params(SceneGenParams, gen_path, ctx)
    noise = _noise(ctx, noise_path, None)
    run = resolve(ctx, 'simulate', output=out_dir, strategy=strategy, gen=gen, noise=noise, seed=seed,
                  extra={'count': count, 'cell_size': cell_size, 'segments': segments})
    options = _pipeline_options(ctx, run, cell_size, segments)
    try:
        scenes = generate_scene_set(gen, count, seed, jobs)
        noise_seeds = derive_seeds(noise.seed, count)

        def votes_for(i):
            scene, boxes = scenes[i]
            return scene_votes(scene, boxes, noise.model_copy(update={'seed': noise_seeds[i]}), options)[1]

        votes = parallel_map(votes_for, list(range(count)), jobs)
        for i, ((scene, boxes), v) in enumerate(zip(scenes, votes)):
            save_scene(os.path.join(out_dir, f"scene_{i:03d}.json"), scene, boxes)
            save_votes(os.path.join(out_dir, f"votes_{i:03d}.json"), v, scene.background_class)
        click.echo(f"Wrote {count} scenes and vote sets to {out_dir}")

    except DataError as e:
        logger.error(f"Failed to simulate: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to simulate: {str(e)}")
        raise click.ClickException(str(e))


@click.command()
@click.option('--scene', 'scene_path', type=str, help='Scene with GT masks (scene-json or ply)')
@click.option('--boxes', 'boxes_path', type=str, help='Box file (default: scene boxes, or boxes fitted to GT)')
@click.option('--noise', 'noise_path', type=str, help='Vote noise parameters (default: noiseless)')
@click.option('--seed', type=int, default=None, help='Override the noise seed')
@click.option('--strategy', type=STRATEGIES, default='decided', show_default=True, help='Association strategy')
@click.option('--algo', type=click.Choice(['nmc', 'sc']), default='nmc', show_default=True)
@click.option('--tau', type=float, default=None, help='NMC IoU threshold (default 0.3)')
@click.option('--radius', type=float, default=None, help='Spatial clustering radius (default 0.1)')
@click.option('--space', type=click.Choice(['center', 'box']), default='center', show_default=True)
@click.option('--per-semantic', is_flag=True, help='Cluster each predicted class separately')
@click.option('--cell-size', type=float, default=None, help='Voxel size in meters, 0 for per-point votes (default 0.02)')
@click.option('--segments/--no-segments', default=True, show_default=True, help='Average votes over segments')
@click.option('--out', 'out_path', type=str, required=True, help='Output report JSON')
@click.option('--masks', 'masks_path', type=str, help='Also write the predicted masks')
@click.option('--table', 'table_path', type=str, help='Also write an aligned text table')
@click.pass_context
def pipeline(ctx, scene_path, boxes_path, noise_path, seed, strategy, algo, tau, radius, space, per_semantic,
             cell_size, segments, out_path, masks_path, table_path):
    """Run labels, oracle votes, clustering, back-projection and evaluation on one scene."""
    noise = _noise(ctx, noise_path, seed)
    run = resolve(ctx, 'pipeline', inputs={'scene': scene_path, 'boxes': boxes_path}, output=out_path,
                  strategy=strategy, tau=tau, radius=radius, noise=noise, seed=noise.seed,
                  extra={'algo': algo, 'space': space, 'per_semantic': per_semantic, 'cell_size': cell_size,
                         'segments': segments})
    options = _pipeline_options(ctx, run, cell_size, segments, algo=algo, space=space, per_semantic=per_semantic)
    try:
        scene, scene_boxes = load_scene(scene_path)
        if not scene.has_gt:
            raise SchemaError("scene has no GT instance masks")
        if boxes_path:
            boxes = load_boxes(boxes_path)
        else:
            boxes = scene_boxes if scene_boxes is not None else boxes_from_instances(scene)
        result = run_pipeline(scene, boxes, noise, options)
        save_report(out_path, result.report)
        if masks_path:
            save_masks(masks_path, result.masks)
        if table_path:
            save_table(table_path, result.report)
        click.echo(result.report.to_table(), nl=False)

    except DataError as e:
        logger.error(f"Failed to run pipeline: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to run pipeline: {str(e)}")
        raise click.ClickException(str(e))


@click.command(name='sweep-tau')
@click.option('--scene-dir', type=str, help='Directory of scene_*.json files')
@click.option('--taus', type=str, default='0.1:0.1:0.9', show_default=True, help='start:step:stop or a list')
@click.option('--noise', 'noise_path', type=str, help='Vote noise parameters (default: noiseless)')
@click.option('--seed', type=int, default=None, help='Override the noise seed')
@click.option('--strategy', type=STRATEGIES, default='decided', show_default=True, help='Association strategy')
@click.option('--cell-size', type=float, default=None, help='Voxel size in meters, 0 for per-point votes (default 0.02)')
@click.option('--segments/--no-segments', default=True, show_default=True, help='Average votes over segments')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True, help='Parallel scenes')
@click.option('--out', 'out_path', type=str, required=True, help='Output CSV')
@click.pass_context
def sweep_tau(ctx, scene_dir, taus, noise_path, seed, strategy, cell_size, segments, jobs, out_path):
    """Mean mAP of the NMC pipeline over a range of tau values."""
    values = parse_grid(taus, '--taus')
    noise = _noise(ctx, noise_path, seed)
    run = resolve(ctx, 'sweep-tau', inputs={'scene_dir': scene_dir}, output=out_path, strategy=strategy,
                  noise=noise, seed=noise.seed, extra={'taus': values, 'cell_size': cell_size,
                                                       'segments': segments, 'jobs': jobs})
    for value in values:
        if not 0.0 < value < 1.0:
            raise click.UsageError("tau must be in (0,1)", ctx=ctx)
    options = _pipeline_options(ctx, run, cell_size, segments)
    try:
        rows = run_sweep_tau(load_scene_set(scene_dir), values, noise, options, jobs)
        write_csv(out_path, ['tau', 'mAP25', 'mAP50'], rows)
        click.echo(f"Wrote {len(rows)} rows to {out_path}")

    except DataError as e:
        logger.error(f"Failed to sweep tau: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to sweep tau: {str(e)}")
        raise click.ClickException(str(e))


@click.command(name='sweep-degrade')
@click.option('--scene-dir', type=str, help='Directory of scene_*.json files')
@click.option('--jitters', type=str, default='0,0.05,0.1,0.2', show_default=True,
              help='Corner jitter values in meters')
@click.option('--drops', type=str, default='0,0.05,0.1', show_default=True, help='Box drop rates')
@click.option('--seed', type=int, default=0, show_default=True, help='Degradation seed')
@click.option('--strategy', type=STRATEGIES, default='decided', show_default=True, help='Association strategy')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True, help='Parallel scenes')
@click.option('--out', 'out_path', type=str, required=True, help='Output CSV')
@click.pass_context
def sweep_degrade(ctx, scene_dir, jitters, drops, seed, strategy, jobs, out_path):
    """Weak-label quality under dropped and jittered boxes."""
    jitter_values = parse_grid(jitters, '--jitters')
    drop_values = parse_grid(drops, '--drops')
    run = resolve(ctx, 'sweep-degrade', inputs={'scene_dir': scene_dir}, output=out_path, strategy=strategy,
                  seed=seed, extra={'jitters': jitter_values, 'drops': drop_values, 'jobs': jobs})
    if any(j < 0 for j in jitter_values) or any(not 0.0 <= d <= 1.0 for d in drop_values):
        raise click.UsageError("jitters must be >= 0 and drops in [0, 1]", ctx=ctx)
    try:
        rows = run_sweep_degrade(load_scene_set(scene_dir), jitter_values, drop_values, seed, run.strategy,
                                 run.thresholds, jobs)
        write_csv(out_path, ['jitter', 'drop', 'mAP25', 'mAP50', 'mAP'], rows)
        click.echo(f"Wrote {len(rows)} rows to {out_path}")

    except DataError as e:
        logger.error(f"Failed to sweep degradation: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to sweep degradation: {str(e)}")
        raise click.ClickException(str(e))


@click.command()
@click.option('--scene-dir', type=str, help='Directory of scene_*.json files')
@click.option('--noise', 'noise_path', type=str, help='Vote noise parameters (default: noiseless)')
@click.option('--seed', type=int, default=None, help='Override the noise seed')
@click.option('--tau', type=float, default=None, help='NMC IoU threshold (default 0.3)')
@click.option('--radii', type=str, default='0.05,0.1,0.2,0.4', show_default=True,
              help='Spatial clustering radii tried per method; the best on the set is reported')
@click.option('--nms', 'nms_thresh', type=float, default=None, help='Detector NMS threshold (default 0.25)')
@click.option('--strategy', type=STRATEGIES, default='decided', show_default=True, help='Association strategy')
@click.option('--cell-size', type=float, default=None, help='Voxel size in meters, 0 for per-point votes (default 0.02)')
@click.option('--segments/--no-segments', default=True, show_default=True, help='Average votes over segments')
@click.option('--jobs', type=click.IntRange(min=1), default=1, show_default=True, help='Parallel scenes')
@click.option('--out', 'out_path', type=str, required=True, help='Output CSV')
@click.pass_context
def compare(ctx, scene_dir, noise_path, seed, tau, radii, nms_thresh, strategy, cell_size, segments, jobs,
            out_path):
    """Compare box NMC, spatial clustering and the detector baseline."""
    radius_values = parse_grid(radii, '--radii')
    noise = _noise(ctx, noise_path, seed)
    run = resolve(ctx, 'compare', inputs={'scene_dir': scene_dir}, output=out_path, strategy=strategy, tau=tau,
                  nms_thresh=nms_thresh, noise=noise, seed=noise.seed,
                  extra={'radii': radius_values, 'cell_size': cell_size, 'segments': segments, 'jobs': jobs})
    if any(r <= 0 for r in radius_values):
        raise click.UsageError("radius must be positive", ctx=ctx)
    options = _pipeline_options(ctx, run, cell_size, segments)
    try:
        rows = compare_methods(load_scene_set(scene_dir), noise, options, radius_values, jobs)
        write_csv(out_path, ['scene', 'method', 'radius', 'mAP25', 'mAP50', 'mAP'], rows)
        click.echo(f"Wrote {len(rows)} rows to {out_path}")

    except DataError as e:
        logger.error(f"Failed to compare methods: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to compare methods: {str(e)}")
        raise click.ClickException(str(e))
