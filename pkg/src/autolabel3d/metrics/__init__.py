"""Evaluation and loss math for oriented 3D boxes."""

from .evalap import (
    DEFAULT_THRESHOLDS,
    Detection,
    EvalResult,
    GroundTruth,
    ScaleGrid,
    evaluate_ap,
    evaluate_relative,
    fit_global_scale,
)
from .iou import MonteCarloIoU, intersection_volume, iou3d, iou3d_oracle, points_in_box, scale_box
from .losses import (
    ATTRIBUTE_GROUPS,
    BoxAttributes,
    DisentangledLosses,
    attributes_from_box,
    box_from_attributes,
    chamfer_box,
    disentangled_losses,
    uncertainty_loss,
)

__all__ = [
    "DEFAULT_THRESHOLDS",
    "Detection",
    "EvalResult",
    "GroundTruth",
    "ScaleGrid",
    "evaluate_ap",
    "evaluate_relative",
    "fit_global_scale",
    "MonteCarloIoU",
    "intersection_volume",
    "iou3d",
    "iou3d_oracle",
    "points_in_box",
    "scale_box",
    "ATTRIBUTE_GROUPS",
    "BoxAttributes",
    "DisentangledLosses",
    "attributes_from_box",
    "box_from_attributes",
    "chamfer_box",
    "disentangled_losses",
    "uncertainty_loss",
]
