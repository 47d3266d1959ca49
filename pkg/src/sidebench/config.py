"""Evaluation configuration and the flat key=value config-file format."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

SCALING_MODES = ("none", "median_ratio")


@dataclass(frozen=True)
class RansacConfig:
    """Parameters of the robust plane fit."""

    iterations: int = 500
    inlier_threshold: float = 0.01  # meters
    seed: int = 42

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("ransac iterations must be >= 1")
        if self.inlier_threshold <= 0:
            raise ValueError("ransac inlier threshold must be positive")


@dataclass(frozen=True)
class MetricConfig:
    """Knobs shared by all metrics.

    delta_base      base of the threshold-accuracy ratios (sigma_i = delta_base**i)
    bin_width       width of the depth slices for distance-binned errors, meters
    dt_truncation   chamfer truncation threshold theta, pixels
    dde_ref_depth   fronto-parallel reference plane depth, meters
    max_depth       full-scale value of 16-bit PNG depth encoding, meters
    scaling_mode    "median_ratio" rescales predictions to ground truth before
                    planarity and directed-depth metrics; "none" disables it
    edge_high_thresh / edge_low_thresh
                    hysteresis thresholds (meters of depth gradient) for the
                    fallback edge detector used when no predicted edge map is
                    supplied
    """

    delta_base: float = 1.25
    bin_width: float = 1.0
    dt_truncation: float = 10.0
    dde_ref_depth: float = 3.0
    max_depth: float = 50.0
    scaling_mode: str = "median_ratio"
    edge_high_thresh: float = 0.5
    edge_low_thresh: float = 0.2
    ransac: RansacConfig = field(default_factory=RansacConfig)

    def __post_init__(self) -> None:
        if self.delta_base <= 1:
            raise ValueError("delta_base must be > 1")
        for name in ("bin_width", "dt_truncation", "dde_ref_depth", "max_depth",
                     "edge_high_thresh", "edge_low_thresh"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.edge_low_thresh > self.edge_high_thresh:
            raise ValueError("edge_low_thresh must not exceed edge_high_thresh")
        if self.scaling_mode not in SCALING_MODES:
            raise ValueError(f"scaling_mode must be one of {SCALING_MODES}")

    @property
    def scaling_enabled(self) -> bool:
        return self.scaling_mode == "median_ratio"

    def as_dict(self) -> dict:
        """Flat key/value view, as used in config files and report echoes."""
        out = {}
        for f in fields(self):
            if f.name == "ransac":
                out["ransac_iterations"] = self.ransac.iterations
                out["ransac_inlier_threshold"] = self.ransac.inlier_threshold
                out["ransac_seed"] = self.ransac.seed
            else:
                out[f.name] = getattr(self, f.name)
        return out


_INT_KEYS = {"ransac_iterations", "ransac_seed"}
_STR_KEYS = {"scaling_mode"}
_FLOAT_KEYS = {
    "delta_base", "bin_width", "dt_truncation", "dde_ref_depth", "max_depth",
    "edge_high_thresh", "edge_low_thresh", "ransac_inlier_threshold",
}


def load_config(path: str | Path) -> MetricConfig:
    """Parse a flat key=value config file into a MetricConfig.

    Blank lines and lines starting with '#' are ignored. Keys mirror the
    MetricConfig fields, with the ransac block flattened to ransac_iterations,
    ransac_inlier_threshold and ransac_seed.
    """
    values: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key in _INT_KEYS:
            values[key] = int(raw)
        elif key in _FLOAT_KEYS:
            values[key] = float(raw)
        elif key in _STR_KEYS:
            values[key] = raw
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return config_from_dict(values)


def config_from_dict(values: dict) -> MetricConfig:
    values = dict(values)
    ransac = RansacConfig(
        iterations=int(values.pop("ransac_iterations", RansacConfig.iterations)),
        inlier_threshold=float(values.pop("ransac_inlier_threshold",
                                          RansacConfig.inlier_threshold)),
        seed=int(values.pop("ransac_seed", RansacConfig.seed)),
    )
    return MetricConfig(ransac=ransac, **values)
