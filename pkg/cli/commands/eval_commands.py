import click

from cli.run_config import DataFileError, resolve
from common.eval.metrics import evaluate, evaluate_boxes, gt_masks_from_scene
from common.eval.report import save_report, save_table
from common.instancer.export import load_masks, masks_to_boxes
from common.instancer.mask import check_masks
from common.scene.io import load_scene
from common.utils.errors import DataError
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


@click.command(name='eval')
@click.option('--pred', 'pred_path', type=str, help='Predicted masks JSON')
@click.option('--scene', 'scene_path', type=str, help='Scene with GT instance masks')
@click.option('--detection-proxy', is_flag=True, help='Score boxes fitted to the masks instead of the masks')
@click.option('--threshold', 'thresholds', type=float, multiple=True,
              help='Extra IoU threshold (repeatable); 0.25 and 0.50:0.05:0.95 are always reported')
@click.option('--out', 'out_path', type=str, required=True, help='Output report JSON')
@click.option('--table', 'table_path', type=str, help='Also write an aligned text table')
@click.pass_context
def eval_masks(ctx, pred_path: str, scene_path: str, detection_proxy: bool, thresholds, out_path: str,
               table_path: str):
    """Evaluate predicted instance masks against GT."""
    run = resolve(ctx, 'eval', inputs={'pred': pred_path, 'scene': scene_path}, output=out_path,
                  thresholds=list(thresholds), extra={'detection_proxy': detection_proxy})
    try:
        scene, _ = load_scene(scene_path)
        preds = load_masks(pred_path)
        check_masks(preds, scene.num_points)
        gts = gt_masks_from_scene(scene)
        if detection_proxy:
            report = evaluate_boxes(masks_to_boxes(preds, scene), [m.score for m in preds],
                                    masks_to_boxes(gts, scene), run.thresholds, scene.class_names)
        else:
            report = evaluate(preds, gts, run.thresholds, scene.class_names)
        save_report(out_path, report)
        if table_path:
            save_table(table_path, report)
        click.echo(report.to_table(), nl=False)

    except DataError as e:
        logger.error(f"Failed to evaluate: {str(e)}")
        raise DataFileError(str(e))
    except Exception as e:
        logger.error(f"Failed to evaluate: {str(e)}")
        raise click.ClickException(str(e))
