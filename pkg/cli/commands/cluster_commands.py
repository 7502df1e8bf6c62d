from typing import Optional

import click

from cli.run_config import DataFileError, resolve
from common.clustering.factory import ClustererFactory
from common.clustering.io import load_clustering, load_votes, save_clustering
from common.instancer.backproject import back_project
from common.instancer.baseline import detector_baseline
from common.instancer.export import save_masks, save_masks_ply
from common.instancer.filter import filter_background
from common.scene.io import load_scene
from common.utils.errors import DataError, ParseError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


def _votes_for_clustering(path: str, background_class: Optional[int] = None, required: bool = False):
    """Votes with background predictions removed.

    The background class comes from the option, else from the votes file. Without
    either, votes are kept as they are unless ``required`` is set.
    """
    votes, declared = load_votes(path)
    if background_class is None:
        background_class = declared
    if background_class is None:
        if required:
            raise ParseError("votes file names no background class; pass --background-class",
                             field='background_class')
        return votes
    return filter_background(votes, background_class)


@click.command()
@click.option('--votes', 'votes_path', type=str, help='Votes JSON')
@click.option('--tau', type=float, default=None, help='NMC IoU threshold, exclusive (default 0.3)')
@click.option('--algo', type=click.Choice(['nmc', 'sc']), default='nmc', show_default=True,
              help='Non-maximum clustering or spatial (epsilon-ball) clustering')
@click.option('--radius', type=float, default=None, help='Spatial clustering radius in meters (default 0.1)')
@click.option('--space', type=click.Choice(['center', 'box']), default='center', show_default=True,
              help='Spatial clustering on centers or on center+size vectors')
@click.option('--per-semantic', is_flag=True, help='Cluster each predicted class separately')
@click.option('--background-class', type=int, default=None,
              help='Class id of background votes (default: the one the votes file declares)')
@click.option('--out', 'out_path', type=str, required=True, help='Output clusters JSON')
@click.pass_context
def cluster(ctx, votes_path: str, tau: float, algo: str, radius: float, space: str, per_semantic: bool,
            background_class: Optional[int], out_path: str):
    """Cluster box votes into instances."""
    run = resolve(ctx, 'cluster', inputs={'votes': votes_path}, output=out_path, tau=tau, radius=radius,
                  extra={'algo': algo, 'space': space, 'per_semantic': per_semantic,
                         'background_class': background_class})
    try:
        clusterer = ClustererFactory.create_clusterer(algo, tau=run.tau, radius=run.radius, space=space,
                                                      per_semantic=per_semantic)
        votes = _votes_for_clustering(votes_path, background_class)
        clustering = clusterer(votes)
        save_clustering(out_path, clustering, votes, run.tau if algo == 'nmc' else None)
        click.echo(f"{len(clustering)} clusters from {len(votes)} votes written to {out_path}")

    except DataError as e:
        logger.error(f"Failed to cluster votes: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to cluster votes: {str(e)}")
        raise click.ClickException(str(e))


@click.command()
@click.option('--votes', 'votes_path', type=str, help='Votes JSON the clusters were computed on')
@click.option('--clusters', 'clusters_path', type=str, help='Clusters JSON')
@click.option('--out', 'out_path', type=str, required=True, help='Output masks JSON')
@click.option('--ply', 'ply_path', type=str, help='Also write a colored PLY (needs --scene)')
@click.option('--scene', 'scene_path', type=str, help='Scene providing point positions for --ply')
@click.option('--background-class', type=int, default=None,
              help='Class id of background votes (default: the one the votes file declares)')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed for mask colors')
@click.pass_context
def segment(ctx, votes_path: str, clusters_path: str, out_path: str, ply_path: str, scene_path: str,
            background_class: Optional[int], seed: int):
    """Back-project vote clusters to instance masks."""
    resolve(ctx, 'segment', inputs={'votes': votes_path, 'clusters': clusters_path, 'scene': scene_path},
            output=out_path, seed=seed, extra={'ply': ply_path, 'background_class': background_class})
    if ply_path and not scene_path:
        raise click.UsageError("--ply requires --scene", ctx=ctx)
    try:
        votes = _votes_for_clustering(votes_path, background_class, required=True)
        clustering = load_clustering(clusters_path, votes)
        masks = back_project(clustering, votes)
        save_masks(out_path, masks)
        if ply_path:
            scene, _ = load_scene(scene_path)
            save_masks_ply(ply_path, masks, scene, seed)
        click.echo(f"{len(masks)} masks written to {out_path}")

    except DataError as e:
        logger.error(f"Failed to segment: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to segment: {str(e)}")
        raise click.ClickException(str(e))


@click.command()
@click.option('--votes', 'votes_path', type=str, help='Votes JSON')
@click.option('--scene', 'scene_path', type=str, help='Scene to segment')
@click.option('--nms', 'nms_thresh', type=float, default=None, help='NMS IoU threshold (default 0.25)')
@click.option('--strategy', type=click.Choice(['decided', 'closest', 'smallest']), default='decided',
              show_default=True, help='Association strategy for the detected boxes')
@click.option('--out', 'out_path', type=str, required=True, help='Output masks JSON')
@click.pass_context
def baseline(ctx, votes_path: str, scene_path: str, nms_thresh: float, strategy: str, out_path: str):
    """Detector baseline: NMS over votes, then segment by box containment."""
    run = resolve(ctx, 'baseline', inputs={'votes': votes_path, 'scene': scene_path}, output=out_path,
                  nms_thresh=nms_thresh, strategy=strategy)
    try:
        votes, _ = load_votes(votes_path)
        scene, _ = load_scene(scene_path)
        masks = detector_baseline(votes, scene, run.nms_thresh, run.strategy)
        save_masks(out_path, masks)
        click.echo(f"{len(masks)} masks written to {out_path}")

    except DataError as e:
        logger.error(f"Failed to run detector baseline: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to run detector baseline: {str(e)}")
        raise click.ClickException(str(e))
