from typing import Optional, Sequence

from common.eval.metrics import evaluate, gt_masks_from_scene
from common.eval.report import EvalReport
from common.scene.models import BoxAnnotationSet, SceneCloud
from common.weaklabel.association import associate
from common.weaklabel.masks import labels_to_masks


def label_quality(scene: SceneCloud, boxes: BoxAnnotationSet, strategy,
                  thresholds: Optional[Sequence[float]] = None) -> EvalReport:
    """Score the masks implied by box weak labels against the GT masks."""
    masks = labels_to_masks(associate(scene, boxes, strategy), boxes)
    return evaluate(masks, gt_masks_from_scene(scene), thresholds, scene.class_names)
