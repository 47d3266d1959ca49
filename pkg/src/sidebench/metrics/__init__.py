from .standard import (
    BinnedErrors,
    BinStats,
    GlobalMetrics,
    binned_errors,
    global_metrics,
    log_rms,
    rel_error,
    rms,
    srel,
    threshold_accuracy,
)
from .planarity import PlanarityAggregate, PlanarityResult, aggregate_planarity, planarity_error
from .boundary import DbeResult, DistanceMap, dbe, distance_transform, extract_depth_edges
from .dde import DdeResult, dde

__all__ = [
    "BinnedErrors", "BinStats", "GlobalMetrics", "binned_errors",
    "global_metrics", "log_rms", "rel_error", "rms", "srel",
    "threshold_accuracy", "PlanarityAggregate", "PlanarityResult",
    "aggregate_planarity", "planarity_error", "DbeResult", "DistanceMap",
    "dbe", "distance_transform", "extract_depth_edges", "DdeResult", "dde",
]
