"""Back-projection, robust plane fitting and scale alignment.

Planes use the convention ``normal . p + offset = 0`` with the unit normal
oriented toward the camera origin (``normal . c < 0`` for the plane centroid
c, equivalently offset > 0 for planes in front of the camera). With this
orientation the signed distance of a point farther from the camera than the
plane comes out negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MetricConfig
from .core import CameraIntrinsics, DepthMap

_UNIT_TOL = 1e-9


class DegenerateGeometryError(ValueError):
    """Raised when a fit is requested on rank-deficient or empty input."""


@dataclass(frozen=True)
class PointCloud:
    """3-D points in the camera frame plus their source pixel indices.

    points        : (n, 3) float64, +z forward
    pixel_indices : (n,) int64 flat row-major indices into the source map
    """

    points: np.ndarray
    pixel_indices: np.ndarray

    def __post_init__(self) -> None:
        points = np.ascontiguousarray(self.points, dtype=np.float64).reshape(-1, 3)
        indices = np.ascontiguousarray(self.pixel_indices, dtype=np.int64).reshape(-1)
        if points.shape[0] != indices.shape[0]:
            raise ValueError("points and pixel indices differ in length")
        if points.size and not np.all(np.isfinite(points)):
            raise ValueError("point coordinates must be finite")
        points.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "pixel_indices", indices)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Plane:
    """Unit-normal plane: normal . p + offset = 0."""

    normal: np.ndarray
    offset: float

    def __post_init__(self) -> None:
        normal = np.asarray(self.normal, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(normal) - 1.0) > _UNIT_TOL:
            raise ValueError("plane normal must be a unit vector")
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_normal_offset(cls, normal, offset: float) -> "Plane":
        """Normalize and orient toward the camera origin (offset >= 0)."""
        normal = np.asarray(normal, dtype=np.float64).reshape(3)
        norm = np.linalg.norm(normal)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("plane normal must be non-zero and finite")
        normal = normal / norm
        offset = float(offset) / norm
        if offset < 0 or (offset == 0 and _leading_sign(normal) < 0):
            normal, offset = -normal, -offset
        return cls(normal, offset)


def _leading_sign(vec: np.ndarray) -> float:
    for component in vec:
        if component != 0:
            return float(np.sign(component))
    return 1.0


def signed_distance(plane: Plane, points: np.ndarray) -> np.ndarray | float:
    """Signed point-plane distance ``normal . p + offset``.

    Accepts a single 3-vector or an (n, 3) array. With camera-facing normals
    the side away from the camera is negative.
    """
    points = np.asarray(points, dtype=np.float64)
    result = points @ plane.normal + plane.offset
    if points.ndim == 1:
        return float(result)
    return result


def backproject(depth: DepthMap, intrinsics: CameraIntrinsics,
                mask: np.ndarray) -> PointCloud:
    """Lift the masked valid pixels of a depth map into 3-D camera space.

    A pixel (u, v) with depth z maps to (z(u-cx)/fx, z(v-cy)/fy, z). Points
    come out in row-major pixel order; an empty selection yields an empty
    cloud.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != depth.shape:
        raise ValueError(f"dimension mismatch: mask {mask.shape} vs depth {depth.shape}")
    intrinsics.check_image(depth.height, depth.width)
    sel = mask & depth.valid
    idx = np.flatnonzero(sel)
    z = depth.values.ravel()[idx]
    u = idx % depth.width
    v = idx // depth.width
    x = z * (u - intrinsics.cx) / intrinsics.fx
    y = z * (v - intrinsics.cy) / intrinsics.fy
    return PointCloud(np.column_stack([x, y, z]), idx)


def fit_plane_tls(points: np.ndarray) -> Plane:
    """Total-least-squares plane through a point set.

    The normal is the eigenvector of the centered scatter matrix with the
    smallest eigenvalue; this minimizes the sum of squared orthogonal
    distances. Raises DegenerateGeometryError for fewer than three points or
    (near-)collinear input.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] < 3:
        raise DegenerateGeometryError("plane fit needs at least 3 points")
    centroid = points.mean(axis=0)
    centered = points - centroid
    scatter = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(scatter)
    # two vanishing eigenvalues mean the points sit on a line
    if eigvals[1] <= 1e-12 * max(eigvals[2], 1e-300):
        raise DegenerateGeometryError("points are collinear; plane is underdetermined")
    normal = eigvecs[:, 0]
    return Plane.from_normal_offset(normal, -normal @ centroid)


# clouds up to this size score every candidate against every point; larger
# clouds pre-rank candidates on a seeded subset and fully score the finalists
_FULL_SCORING_LIMIT = 4096
_FINALISTS = 8


def _consensus_counts(points: np.ndarray, normals: np.ndarray,
                      offsets: np.ndarray, threshold: float) -> np.ndarray:
    """Inlier count per candidate plane, chunked to bound the matrix size."""
    n = points.shape[0]
    counts = np.zeros(normals.shape[0], dtype=np.int64)
    chunk = max(1, int(4e6) // max(n, 1))
    for start in range(0, normals.shape[0], chunk):
        stop = min(start + chunk, normals.shape[0])
        dist = points @ normals[start:stop].T
        dist += offsets[start:stop]
        np.abs(dist, out=dist)
        counts[start:stop] = np.count_nonzero(dist <= threshold, axis=0)
    return counts


def fit_plane(cloud: PointCloud, config: MetricConfig) -> tuple[Plane, np.ndarray]:
    """Robust plane fit: seeded RANSAC over 3-point samples plus TLS refinement.

    Candidates are consensus-scored with the configured inlier threshold; on
    clouds beyond a few thousand points the scoring runs in two stages (seeded
    subset, then full counts for the leading candidates) to stay linear in
    practice. Ties resolve to the earliest draw. Returns the refined plane and
    the inlier flags of the cloud's points with respect to it. Deterministic
    for a fixed config seed.
    """
    points = cloud.points
    n = len(cloud)
    if n < 3:
        raise DegenerateGeometryError("plane fit needs at least 3 points")
    ransac = config.ransac
    rng = np.random.default_rng(ransac.seed)
    draws = rng.integers(0, n, size=(ransac.iterations, 3))

    p0 = points[draws[:, 0]]
    normals = np.cross(points[draws[:, 1]] - p0, points[draws[:, 2]] - p0)
    lengths = np.linalg.norm(normals, axis=1)
    usable = lengths > 0
    # degenerate samples get NaN planes; their distances compare False below
    normals = np.where(usable[:, None], normals, np.nan) / np.where(
        usable, lengths, 1.0)[:, None]
    offsets = -np.einsum("ij,ij->i", normals, p0)

    if n <= _FULL_SCORING_LIMIT:
        counts = _consensus_counts(points, normals, offsets, ransac.inlier_threshold)
        best = int(np.argmax(counts))
        best_count = int(counts[best])
    else:
        subset = points[rng.choice(n, size=_FULL_SCORING_LIMIT, replace=False)]
        subset_counts = _consensus_counts(subset, normals, offsets,
                                          ransac.inlier_threshold)
        order = np.lexsort((np.arange(subset_counts.size), -subset_counts))
        finalists = order[:_FINALISTS]
        finalist_counts = _consensus_counts(points, normals[finalists],
                                            offsets[finalists],
                                            ransac.inlier_threshold)
        ranked = np.lexsort((finalists, -finalist_counts))
        best = int(finalists[ranked[0]])
        best_count = int(finalist_counts[ranked[0]])
    if best_count < 3:
        raise DegenerateGeometryError("RANSAC found no 3-point consensus")

    consensus = np.abs(points @ normals[best] + offsets[best]) <= ransac.inlier_threshold
    plane = fit_plane_tls(points[consensus])
    inliers = np.abs(signed_distance(plane, points)) <= ransac.inlier_threshold
    return plane, inliers


def median_scale(pred: DepthMap, gt: DepthMap,
                 valid: np.ndarray) -> tuple[float, DepthMap]:
    """Rescale a prediction by the median of gt/pred over the valid pixels.

    The even-count median is the arithmetic mean of the two middle values.
    Returns the scale and the scaled prediction; the median of
    gt / (scale * pred) over the same pixels is 1 by construction.
    """
    valid = np.asarray(valid, dtype=bool)
    if valid.shape != pred.shape or pred.shape != gt.shape:
        raise ValueError("dimension mismatch between depth maps and validity field")
    if not valid.any():
        raise ValueError("median scaling needs at least one valid pixel")
    if not (pred.valid[valid].all() and gt.valid[valid].all()):
        raise ValueError("validity field selects pixels invalid in an input map")
    scale = float(np.median(gt.values[valid] / pred.values[valid]))
    scaled = DepthMap(np.where(pred.valid, pred.values * scale, np.nan), pred.valid)
    return scale, scaled
