"""Planarity and plane-orientation errors over annotated planar regions.

For a masked region, both depth maps are lifted to 3-D point clouds and a
plane is robustly fitted to each. The planarity error is the population
standard deviation, in meters, of the signed distances between the predicted
inlier points and the predicted plane; the orientation error is the angle in
degrees between the two camera-facing plane normals. When scaling is enabled
the prediction is first rescaled to the ground truth by the median ratio over
the whole image's valid pixels, so the metrics are invariant to the global
scale of the prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import MetricConfig
from ..core import CameraIntrinsics, DepthMap, PLANE_LABELS, SemanticMask, valid_pixels
from ..geometry import (
    DegenerateGeometryError,
    Plane,
    backproject,
    fit_plane,
    median_scale,
    signed_distance,
)


@dataclass(frozen=True)
class PlanarityResult:
    label: str
    instance_id: int
    eps_plan: float  # meters
    eps_orie: float  # degrees
    pred_plane: Plane
    gt_plane: Plane
    point_count: int


def planarity_error(pred: DepthMap, gt: DepthMap, mask: SemanticMask,
                    intrinsics: CameraIntrinsics,
                    config: MetricConfig) -> PlanarityResult:
    joint = valid_pixels(pred, gt)
    if config.scaling_enabled:
        _, pred = median_scale(pred, gt, joint)

    region = mask.bits & joint
    if np.count_nonzero(region) < 3:
        raise DegenerateGeometryError(
            f"mask {mask.label}/{mask.instance_id} selects fewer than 3 valid pixels")

    cloud_pred = backproject(pred, intrinsics, region)
    cloud_gt = backproject(gt, intrinsics, region)
    pred_plane, inliers = fit_plane(cloud_pred, config)
    gt_plane, _ = fit_plane(cloud_gt, config)

    distances = signed_distance(pred_plane, cloud_pred.points[inliers])
    eps_plan = float(np.std(distances))

    cos_angle = float(np.clip(pred_plane.normal @ gt_plane.normal, -1.0, 1.0))
    eps_orie = math.degrees(math.acos(cos_angle))

    return PlanarityResult(
        label=mask.label,
        instance_id=mask.instance_id,
        eps_plan=eps_plan,
        eps_orie=eps_orie,
        pred_plane=pred_plane,
        gt_plane=gt_plane,
        point_count=len(cloud_pred),
    )


@dataclass(frozen=True)
class PlanarityAggregate:
    """Unweighted means over plane instances, combined and per label."""

    combined_plan: float
    combined_orie: float
    per_label: dict[str, tuple[float, float]]
    instance_count: int


def aggregate_planarity(results: list[PlanarityResult]) -> PlanarityAggregate:
    if not results:
        raise ValueError("cannot aggregate an empty result list")
    per_label = {}
    for label in PLANE_LABELS:
        group = [r for r in results if r.label == label]
        if group:
            per_label[label] = (
                float(np.mean([r.eps_plan for r in group])),
                float(np.mean([r.eps_orie for r in group])),
            )
    return PlanarityAggregate(
        combined_plan=float(np.mean([r.eps_plan for r in results])),
        combined_orie=float(np.mean([r.eps_orie for r in results])),
        per_label=per_label,
        instance_count=len(results),
    )
