"""Analytic scene renderer with closed-form ground truth.

A scene is a set of planar surfaces, each owning a region of the pixel grid;
every pixel must be covered by exactly one surface. The renderer intersects
each pixel's camera ray with its surface's plane, giving depth maps whose
plane parameters, masks and edge locations are known analytically. Scenes
serialize to the standard dataset layout so the batch CLI runs end-to-end on
synthetic data, and a small family of analytic perturbations turns a render
into a "prediction" with known metric values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import MetricConfig
from .core import CameraIntrinsics, DepthMap, EdgeMap, PLANE_LABELS, RgbImage, SemanticMask
from .geometry import Plane
from .io import save_depth, save_edges, save_intrinsics, save_mask, save_rgb

EDGE_DEPTH_STEP = 1e-6  # meters; smaller inter-surface steps produce no edge

REGION_KINDS = ("all", "rect", "rest")


@dataclass(frozen=True)
class Region:
    """Pixel-region predicate: the whole frame, a half-open rectangle, or the
    remainder not claimed by any other region."""

    kind: str
    x0: int = 0
    x1: int = 0
    y0: int = 0
    y1: int = 0

    def __post_init__(self) -> None:
        if self.kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")

    def bits(self, height: int, width: int) -> np.ndarray:
        if self.kind == "all":
            return np.ones((height, width), dtype=bool)
        if self.kind == "rect":
            out = np.zeros((height, width), dtype=bool)
            out[self.y0:self.y1, self.x0:self.x1] = True
            return out
        raise ValueError("'rest' regions are resolved by the renderer")


@dataclass(frozen=True)
class Surface:
    plane: Plane
    region: Region
    label: str | None = None  # optional plane-mask label

    def __post_init__(self) -> None:
        if self.label is not None and self.label not in PLANE_LABELS:
            raise ValueError(f"surface label must be one of {PLANE_LABELS}")


@dataclass(frozen=True)
class SceneSpec:
    intrinsics: CameraIntrinsics
    width: int
    height: int
    surfaces: tuple[Surface, ...]

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("scene dimensions must be positive")
        if not self.surfaces:
            raise ValueError("scene needs at least one surface")
        rest = [s for s in self.surfaces if s.region.kind == "rest"]
        if len(rest) > 1:
            raise ValueError("at most one 'rest' region per scene")
        object.__setattr__(self, "surfaces", tuple(self.surfaces))


@dataclass(frozen=True)
class RenderedScene:
    depth: DepthMap
    masks: tuple[SemanticMask, ...]
    edges: EdgeMap
    surface_ids: np.ndarray  # (h, w) index into SceneSpec.surfaces


def render(spec: SceneSpec) -> RenderedScene:
    """Render a scene to a depth map, per-surface plane masks and an edge map.

    Depth at pixel (u, v) owned by plane (eta, d) is -d / (eta . r) for the
    ray r = ((u-cx)/fx, (v-cy)/fy, 1). Edge pixels are those whose
    4-neighborhood spans two surfaces with a depth step above 1e-6 m.
    """
    h, w = spec.height, spec.width
    spec.intrinsics.check_image(h, w)

    surface_ids = np.full((h, w), -1, dtype=np.int64)
    claimed = np.zeros((h, w), dtype=np.int64)
    rest_index = None
    for i, surface in enumerate(spec.surfaces):
        if surface.region.kind == "rest":
            rest_index = i
            continue
        bits = surface.region.bits(h, w)
        claimed += bits
        surface_ids[bits] = i
    if rest_index is not None:
        surface_ids[claimed == 0] = rest_index
        claimed[claimed == 0] = 1
    if (claimed != 1).any():
        raise ValueError("every pixel must be covered by exactly one surface")

    u = np.arange(w, dtype=np.float64)
    v = np.arange(h, dtype=np.float64)
    rx = (u[None, :] - spec.intrinsics.cx) / spec.intrinsics.fx
    ry = (v[:, None] - spec.intrinsics.cy) / spec.intrinsics.fy

    depth = np.empty((h, w), dtype=np.float64)
    for i, surface in enumerate(spec.surfaces):
        owned = surface_ids == i
        if not owned.any():
            continue
        eta = surface.plane.normal
        denom = (eta[0] * rx + eta[1] * ry + eta[2])[owned]
        if np.any(np.abs(denom) < 1e-300):
            raise ValueError(f"surface {i}: ray parallel to its plane")
        z = -surface.plane.offset / denom
        if np.any(z <= 0):
            raise ValueError(f"surface {i}: plane behind the camera over its region")
        depth[owned] = z

    edges = np.zeros((h, w), dtype=bool)
    step_r = (surface_ids[:, :-1] != surface_ids[:, 1:]) & (
        np.abs(depth[:, :-1] - depth[:, 1:]) > EDGE_DEPTH_STEP)
    edges[:, :-1] |= step_r
    edges[:, 1:] |= step_r
    step_d = (surface_ids[:-1, :] != surface_ids[1:, :]) & (
        np.abs(depth[:-1, :] - depth[1:, :]) > EDGE_DEPTH_STEP)
    edges[:-1, :] |= step_d
    edges[1:, :] |= step_d

    masks = []
    instance_counter: dict[str, int] = {}
    for i, surface in enumerate(spec.surfaces):
        if surface.label is None:
            continue
        instance = instance_counter.get(surface.label, 0)
        instance_counter[surface.label] = instance + 1
        masks.append(SemanticMask(surface.label, instance, surface_ids == i))

    return RenderedScene(
        depth=DepthMap.from_values(depth),
        masks=tuple(masks),
        edges=EdgeMap(edges),
        surface_ids=surface_ids,
    )


def fronto_parallel_scene(depth_m: float, width: int, height: int,
                          intrinsics: CameraIntrinsics | None = None,
                          label: str | None = None) -> SceneSpec:
    """Convenience: a single plane z = depth_m filling the frame."""
    if intrinsics is None:
        intrinsics = CameraIntrinsics(fx=width, fy=width,
                                      cx=(width - 1) / 2, cy=(height - 1) / 2)
    plane = Plane.from_normal_offset([0.0, 0.0, -1.0], depth_m)
    return SceneSpec(intrinsics, width, height,
                     (Surface(plane, Region("all"), label=label),))


# ---------------------------------------------------------------------------
# analytic perturbations (for building predictions with known metric values)
# ---------------------------------------------------------------------------

def uniform_scale(depth: DepthMap, factor: float) -> DepthMap:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return DepthMap(np.where(depth.valid, depth.values * factor, np.nan), depth.valid)


def additive_offset(depth: DepthMap, offset_m: float) -> DepthMap:
    shifted = depth.values + offset_m
    if np.any(shifted[depth.valid] <= 0):
        raise ValueError("offset drives depth non-positive")
    return DepthMap(np.where(depth.valid, shifted, np.nan), depth.valid)


def sinusoidal_ripple(depth: DepthMap, amplitude: float, wavelength: float) -> DepthMap:
    """Add amplitude * sin(2*pi*u / wavelength) along the column axis."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    u = np.arange(depth.width, dtype=np.float64)
    ripple = amplitude * np.sin(2.0 * np.pi * u / wavelength)[None, :]
    out = depth.values + ripple
    if np.any(out[depth.valid] <= 0):
        raise ValueError("ripple drives depth non-positive")
    return DepthMap(np.where(depth.valid, out, np.nan), depth.valid)


def side_flip_about(depth: DepthMap, ref_m: float, fraction: float,
                    seed: int) -> DepthMap:
    """Reflect depth about ref_m for a seeded subset of the valid pixels.

    Exactly round(fraction * valid_count) pixels flip sides, which gives
    exact expected directed-depth fractions.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    idx = np.flatnonzero(depth.valid)
    k = int(round(fraction * idx.size))
    out = depth.values.copy()
    if k:
        rng = np.random.default_rng(seed)
        chosen = idx[rng.choice(idx.size, size=k, replace=False)]
        flat = out.ravel()
        flat[chosen] = 2.0 * ref_m - flat[chosen]
        if np.any(flat[chosen] <= 0):
            raise ValueError("reflection drives depth non-positive")
    return DepthMap(np.where(depth.valid, out, np.nan), depth.valid)


# ---------------------------------------------------------------------------
# scene files and dataset serialization
# ---------------------------------------------------------------------------

def load_scene(path: str | Path) -> SceneSpec:
    """Read a JSON scene description.

    Schema: {"width", "height", "intrinsics": {fx, fy, cx, cy},
    "surfaces": [{"normal": [x, y, z], "offset": d,
                  "region": {"kind", ...bounds}, "label": optional}]}
    """
    data = json.loads(Path(path).read_text())
    intr = data["intrinsics"]
    surfaces = []
    for s in data["surfaces"]:
        region_data = dict(s["region"])
        region = Region(kind=region_data.pop("kind"), **region_data)
        plane = Plane.from_normal_offset(s["normal"], s["offset"])
        surfaces.append(Surface(plane, region, label=s.get("label")))
    return SceneSpec(
        intrinsics=CameraIntrinsics(fx=intr["fx"], fy=intr["fy"],
                                    cx=intr["cx"], cy=intr["cy"]),
        width=int(data["width"]),
        height=int(data["height"]),
        surfaces=tuple(surfaces),
    )


_PALETTE = np.array([
    [0.8, 0.3, 0.3], [0.3, 0.8, 0.3], [0.3, 0.3, 0.8], [0.8, 0.8, 0.3],
    [0.8, 0.3, 0.8], [0.3, 0.8, 0.8], [0.6, 0.6, 0.6], [0.9, 0.6, 0.2],
])


def flat_shaded_rgb(scene: RenderedScene) -> RgbImage:
    """One flat color per surface region."""
    colors = _PALETTE[scene.surface_ids % len(_PALETTE)]
    return RgbImage(colors)


def write_scene(scene_id: str, spec: SceneSpec, dataset_dir: str | Path,
                config: MetricConfig) -> RenderedScene:
    """Render a scene and write it into the dataset directory layout.

    Also records the camera calibration as intrinsics.txt at the dataset
    root; all scenes of one dataset are expected to share it.
    """
    rendered = render(spec)
    root = Path(dataset_dir)
    for sub in ("rgb", "depth", "edges"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    save_rgb(flat_shaded_rgb(rendered), root / "rgb" / f"{scene_id}.png")
    save_depth(rendered.depth, root / "depth" / f"{scene_id}.png", config)
    save_edges(rendered.edges, root / "edges" / f"{scene_id}.png")
    save_intrinsics(spec.intrinsics, root / "intrinsics.txt")
    for mask in rendered.masks:
        mask_dir = root / "masks" / mask.label
        mask_dir.mkdir(parents=True, exist_ok=True)
        save_mask(mask, mask_dir / f"{scene_id}_{mask.instance_id}.png")
    return rendered
