"""Reading and writing of depth maps, masks, edge maps and RGB images.

Depth files come in two flavors, auto-detected by extension:

* ``.png``  16-bit grayscale PNG. A raw value decodes as
  ``depth = raw / 65535 * max_depth`` and raw 0 marks an invalid pixel.
  Encoding rounds to the nearest raw value and clamps valid pixels to the
  range [1, 65535], so a valid value never collapses onto the invalid marker;
  depths below half a quantization step therefore decode to one full step.
* ``.pfm``  single-channel PFM (float32, bottom-up rows). Values load
  verbatim; non-finite or non-positive entries become invalid.

Masks and edge maps are 8-bit grayscale PNGs where any non-zero pixel is a
set bit. RGB images are 8-bit three-channel PNGs mapped linearly to [0, 1].
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .config import MetricConfig
from .core import CameraIntrinsics, DepthMap, EdgeMap, RgbImage, SemanticMask

PNG_MAX_RAW = 65535


def load_depth(path: str | Path, config: MetricConfig) -> DepthMap:
    """Load a depth map from a 16-bit PNG or a PFM file."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        return _load_depth_png(path, config.max_depth)
    if suffix == ".pfm":
        return _load_depth_pfm(path)
    raise ValueError(f"unsupported depth file extension: {path.name}")


def save_depth(depth: DepthMap, path: str | Path, config: MetricConfig) -> None:
    """Write a depth map as 16-bit PNG or PFM, chosen by extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        _save_depth_png(depth, path, config.max_depth)
    elif suffix == ".pfm":
        _save_depth_pfm(depth, path)
    else:
        raise ValueError(f"unsupported depth file extension: {path.name}")


def _load_depth_png(path: Path, max_depth: float) -> DepthMap:
    with Image.open(path) as img:
        if img.mode not in ("I", "I;16"):
            raise ValueError(
                f"{path}: expected 16-bit grayscale PNG, got mode {img.mode!r}")
        raw = np.asarray(img, dtype=np.int64)
    if raw.ndim != 2 or raw.size == 0:
        raise ValueError(f"{path}: depth image has zero dimension")
    if raw.min() < 0 or raw.max() > PNG_MAX_RAW:
        raise ValueError(f"{path}: raw values outside the 16-bit range")
    values = raw.astype(np.float64) / PNG_MAX_RAW * max_depth
    return DepthMap(values, raw > 0)


def _save_depth_png(depth: DepthMap, path: Path, max_depth: float) -> None:
    picked = depth.values[depth.valid]
    if picked.size and picked.max() > max_depth:
        raise ValueError(
            f"depth {picked.max():.6g} m exceeds the encodable maximum {max_depth} m")
    raw = np.zeros(depth.shape, dtype=np.uint16)
    scaled = np.rint(depth.values[depth.valid] / max_depth * PNG_MAX_RAW)
    raw[depth.valid] = np.clip(scaled, 1, PNG_MAX_RAW).astype(np.uint16)
    Image.fromarray(raw).save(path)  # uint16 maps to mode I;16


def _load_depth_pfm(path: Path) -> DepthMap:
    with open(path, "rb") as f:
        header = f.readline().rstrip()
        if header == b"PF":
            raise ValueError(f"{path}: color PFM not supported for depth maps")
        if header != b"Pf":
            raise ValueError(f"{path}: not a PFM file")
        dims = f.readline().split()
        if len(dims) != 2:
            raise ValueError(f"{path}: malformed PFM dimension line")
        width, height = int(dims[0]), int(dims[1])
        if width <= 0 or height <= 0:
            raise ValueError(f"{path}: depth image has zero dimension")
        scale = float(f.readline())
        endian = "<" if scale < 0 else ">"
        data = np.frombuffer(f.read(width * height * 4), dtype=endian + "f4")
        if data.size != width * height:
            raise ValueError(f"{path}: truncated PFM payload")
    # PFM rows are stored bottom-up
    values = np.flipud(data.reshape(height, width)).astype(np.float64)
    return DepthMap.from_values(values)


def _save_depth_pfm(depth: DepthMap, path: Path) -> None:
    values = np.where(depth.valid, depth.values, 0.0).astype(np.float32)
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{depth.width} {depth.height}\n".encode())
        f.write(b"-1.0\n")
        f.write(np.flipud(values).astype("<f4").tobytes())


def _load_bits(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode != "L":
            raise ValueError(
                f"{path}: expected 8-bit grayscale PNG, got mode {img.mode!r}")
        arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{path}: mask image has zero dimension")
    return arr > 0


def load_mask(path: str | Path, label: str, instance_id: int = 0) -> SemanticMask:
    """Load an 8-bit mask PNG; any pixel > 0 is a set bit."""
    return SemanticMask(label, instance_id, _load_bits(Path(path)))


def load_edges(path: str | Path) -> EdgeMap:
    """Load an 8-bit edge PNG; any pixel > 0 is an edge pixel."""
    return EdgeMap(_load_bits(Path(path)))


def _save_bits(bits: np.ndarray, path: Path) -> None:
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8)).save(path)


def save_mask(mask: SemanticMask, path: str | Path) -> None:
    _save_bits(mask.bits, Path(path))


def save_edges(edges: EdgeMap, path: str | Path) -> None:
    _save_bits(edges.bits, Path(path))


def load_rgb(path: str | Path) -> RgbImage:
    """Load an 8-bit RGB PNG as channel values in [0, 1]."""
    with Image.open(path) as img:
        if img.mode != "RGB":
            img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.float64)
    return RgbImage(arr / 255.0)


def save_rgb(image: RgbImage, path: str | Path) -> None:
    raw = np.clip(np.rint(image.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(raw).save(path)


def load_intrinsics(path: str | Path) -> CameraIntrinsics:
    """Read a key=value calibration file with fx, fy, cx and cy entries."""
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, raw = line.partition("=")
        values[key.strip()] = float(raw)
    try:
        return CameraIntrinsics(fx=values["fx"], fy=values["fy"],
                                cx=values["cx"], cy=values["cy"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing intrinsics key {exc}") from exc


def save_intrinsics(intrinsics: CameraIntrinsics, path: str | Path) -> None:
    Path(path).write_text(
        f"fx={intrinsics.fx!r}\nfy={intrinsics.fy!r}\n"
        f"cx={intrinsics.cx!r}\ncy={intrinsics.cy!r}\n")
