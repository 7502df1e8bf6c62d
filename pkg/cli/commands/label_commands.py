import click

from cli.run_config import DataFileError, config_defaults, resolve
from common.scene.io import load_boxes, load_scene, save_boxes, write_json
from common.utils.errors import DataError
from common.utils.logger import setup_logger
from common.weaklabel.association import (associate, associate_from_instances, boxes_from_instances,
                                          undecided_fraction)
from common.weaklabel.degrade import degrade_annotations
from common.weaklabel.targets import make_targets, targets_to_dict

logger = setup_logger(__name__)

STRATEGIES = click.Choice(['decided', 'closest', 'smallest'])


@click.command()
@click.option('--scene', 'scene_path', type=str, help='Scene file (scene-json or ply)')
@click.option('--boxes-from', type=click.Choice(['file', 'scene']), default='scene', show_default=True,
              help='Take boxes from --boxes or from the scene (fitted to GT masks if it carries none)')
@click.option('--boxes', 'boxes_path', type=str, help='Box file, with --boxes-from file')
@click.option('--strategy', type=STRATEGIES, default='decided', show_default=True,
              help='How points in several boxes are resolved')
@click.option('--dense', is_flag=True, help='Associate from GT instance masks instead of boxes')
@click.option('--out', 'out_path', type=str, required=True, help='Output labels JSON')
@click.pass_context
def genlabels(ctx, scene_path: str, boxes_from: str, boxes_path: str, strategy: str, dense: bool, out_path: str):
    """Generate weak labels and training targets from box annotations."""
    inputs = {'scene': scene_path}
    if boxes_from == 'file':
        inputs['boxes'] = boxes_path
    run = resolve(ctx, 'genlabels', inputs=inputs, output=out_path, strategy=strategy,
                  extra={'boxes_from': boxes_from, 'dense': dense})
    try:
        scene, scene_boxes = load_scene(scene_path)
        if dense:
            assoc, boxes = associate_from_instances(scene)
        else:
            if boxes_from == 'file':
                boxes = load_boxes(boxes_path)
            else:
                boxes = scene_boxes if scene_boxes is not None else boxes_from_instances(scene)
            boxes.validate_labels(scene.background_class)
            assoc = associate(scene, boxes, run.strategy)

        targets = make_targets(assoc, scene, boxes)
        undecided = undecided_fraction(assoc)
        write_json(out_path, targets_to_dict(assoc, targets, undecided))
        click.echo(f"Labels written to {out_path}: {int(assoc.foreground.sum())} foreground points, "
                   f"undecided fraction {undecided:.4f}")

    except DataError as e:
        logger.error(f"Failed to generate labels: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to generate labels: {str(e)}")
        raise click.ClickException(str(e))


@click.command()
@click.option('--boxes', 'boxes_path', type=str, required=True, help='Box file or scene-json with boxes')
@click.option('--drop', type=float, default=0.0, show_default=True, help='Probability of dropping each box')
@click.option('--jitter', type=float, default=0.0, show_default=True,
              help='Maximum corner perturbation in meters')
@click.option('--seed', type=int, default=0, show_default=True, help='Random seed')
@click.option('--out', 'out_path', type=str, required=True, help='Output box file')
@click.pass_context
def degrade(ctx, boxes_path: str, drop: float, jitter: float, seed: int, out_path: str):
    """Drop and jitter box annotations."""
    resolve(ctx, 'degrade', inputs={'boxes': boxes_path}, output=out_path, seed=seed,
            extra={'drop': drop, 'jitter': jitter})
    if not 0.0 <= drop <= 1.0:
        raise click.UsageError("--drop must be in [0, 1]", ctx=ctx)
    if jitter < 0:
        raise click.UsageError("--jitter must be non-negative", ctx=ctx)
    try:
        boxes = load_boxes(boxes_path)
        epsilon = config_defaults(ctx)['box_epsilon']
        degraded = degrade_annotations(boxes, drop, jitter, seed, epsilon)
        save_boxes(out_path, degraded)
        click.echo(f"Kept {len(degraded)} of {len(boxes)} boxes, written to {out_path}")

    except DataError as e:
        logger.error(f"Failed to degrade boxes: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to degrade boxes: {str(e)}")
        raise click.ClickException(str(e))
