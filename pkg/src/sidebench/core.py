"""Domain types for depth maps, images, masks and edge maps.

All types are immutable after construction (backing arrays are frozen), so
instances can be shared freely across threads. Invalid depth pixels are
represented twice over: by NaN in the value array and by a False bit in the
explicit validity field. Metric code consumes only the validity field and
never compares against sentinel values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PLANE_LABELS = ("wall", "floor", "table")
MASK_LABELS = PLANE_LABELS + ("transparent", "invalid")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DepthMap:
    """Dense per-pixel metric depth with explicit validity.

    values : (h, w) float64, meters; NaN at invalid pixels
    valid  : (h, w) bool
    """

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("depth map must be a non-empty 2-D array")
        if values.shape != valid.shape:
            raise ValueError("depth values and validity field differ in shape")
        picked = values[valid]
        if picked.size and not np.all(np.isfinite(picked) & (picked > 0.0)):
            raise ValueError("valid depth values must be finite and positive")
        values = np.where(valid, values, np.nan)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "valid", _frozen(valid))

    @classmethod
    def from_values(cls, values) -> "DepthMap":
        """Build a DepthMap, flagging non-finite and non-positive entries invalid."""
        arr = np.asarray(values, dtype=np.float64)
        with np.errstate(invalid="ignore"):
            valid = np.isfinite(arr) & (arr > 0.0)
        return cls(arr, valid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RgbImage:
    """Color image with three channels per pixel, each in [0, 1].

    pixels : (h, w, 3) float64
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ValueError("rgb image must be a non-empty (h, w, 3) array")
        if not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("rgb channel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", _frozen(pixels))

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


@dataclass(frozen=True)
class SemanticMask:
    """Binary region mask with a semantic label and an instance id."""

    label: str
    instance_id: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.label not in MASK_LABELS:
            raise ValueError(f"unknown mask label {self.label!r}")
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.size == 0:
            raise ValueError("mask must be a non-empty 2-D boolean array")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape


@dataclass(frozen=True)
class EdgeMap:
    """Binary depth-discontinuity map (True = edge pixel)."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.size == 0:
            raise ValueError("edge map must be a non-empty 2-D boolean array")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters mapping pixels to 3-D rays (pixel units)."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        for name in ("fx", "fy", "cx", "cy"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (np.isfinite(self.cx) and np.isfinite(self.cy)
                and self.cx >= 0 and self.cy >= 0):
            raise ValueError("principal point must be finite and non-negative")

    def check_image(self, height: int, width: int) -> None:
        """Verify the principal point falls inside an image of the given size."""
        if not (self.cx < width and self.cy < height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside {width}x{height} image")


def valid_pixels(pred: DepthMap, gt: DepthMap,
                 exclude: SemanticMask | None = None) -> np.ndarray:
    """Joint validity field: both depths valid and not flagged for exclusion.

    The popcount of the returned field is the pixel count T that normalizes
    every global metric.
    """
    if pred.shape != gt.shape:
        raise ValueError(f"dimension mismatch: pred {pred.shape} vs gt {gt.shape}")
    field = pred.valid & gt.valid
    if exclude is not None:
        if exclude.shape != gt.shape:
            raise ValueError(
                f"dimension mismatch: mask {exclude.shape} vs depth {gt.shape}")
        field = field & ~exclude.bits
    return field
