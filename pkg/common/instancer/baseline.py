"""Detector baseline: NMS over box votes, then containment-based segmentation."""
from typing import List

from common.clustering.votes import VoteSet
from common.instancer.filter import filter_background
from common.instancer.mask import InstanceMask
from common.instancer.nms import nms_corners
from common.scene.models import BoxAnnotationSet, SceneCloud
from common.utils.logger import setup_logger
from common.weaklabel.association import Strategy, associate
from common.weaklabel.masks import labels_to_masks

logger = setup_logger(__name__)

DEFAULT_NMS_THRESH = 0.25


def detect_boxes(votes: VoteSet, nms_thresh: float = DEFAULT_NMS_THRESH):
    """Detected boxes (labelled with the vote's class) and their vote scores."""
    kept = nms_corners(votes.los, votes.his, votes.scores, nms_thresh)
    boxes = BoxAnnotationSet(tuple(votes.box(i) for i in kept))
    return boxes, votes.scores[kept]


def detector_baseline(votes: VoteSet, scene: SceneCloud, nms_thresh: float = DEFAULT_NMS_THRESH,
                      strategy=Strategy.DECIDED_ONLY) -> List[InstanceMask]:
    """Segment the scene by containment in the boxes surviving NMS.

    Background votes are not detections and are removed before NMS.
    """
    votes = filter_background(votes, scene.background_class)
    if len(votes) == 0:
        return []
    boxes, scores = detect_boxes(votes, nms_thresh)
    assoc = associate(scene, boxes, strategy)

    masks = []
    owners = assoc.tags
    for mask in labels_to_masks(assoc, boxes):
        box_index = int(owners[mask.point_indices[0]])
        masks.append(InstanceMask(mask.point_indices, mask.label, scores[box_index]))

    logger.info(f"Detector baseline: {len(boxes)} detections, {len(masks)} masks")
    return masks
