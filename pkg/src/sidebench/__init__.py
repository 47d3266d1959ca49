"""sidebench: quality metrics and a batch CLI for single-image depth maps."""

__version__ = "0.1.0"

from .config import MetricConfig, RansacConfig, load_config
from .core import (
    CameraIntrinsics,
    DepthMap,
    EdgeMap,
    RgbImage,
    SemanticMask,
    valid_pixels,
)
from .geometry import (
    DegenerateGeometryError,
    Plane,
    PointCloud,
    backproject,
    fit_plane,
    fit_plane_tls,
    median_scale,
    signed_distance,
)

__all__ = [
    "__version__",
    "MetricConfig", "RansacConfig", "load_config",
    "CameraIntrinsics", "DepthMap", "EdgeMap", "RgbImage", "SemanticMask",
    "valid_pixels",
    "DegenerateGeometryError", "Plane", "PointCloud", "backproject",
    "fit_plane", "fit_plane_tls", "median_scale", "signed_distance",
]
