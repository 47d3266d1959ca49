"""Global error statistics and their distance-binned variants.

Conventions pinned for test exactness: the threshold metric uses a strict
inequality, the log RMS uses base-10 logarithms, and binned standard
deviations are population (not sample) statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import MetricConfig
from ..core import DepthMap


def _gather(pred: DepthMap, gt: DepthMap, valid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    valid = np.asarray(valid, dtype=bool)
    if valid.shape != pred.shape or pred.shape != gt.shape:
        raise ValueError("dimension mismatch between depth maps and validity field")
    if not valid.any():
        raise ValueError("no valid pixels (T = 0)")
    return pred.values[valid], gt.values[valid]


def threshold_accuracy(pred: DepthMap, gt: DepthMap, valid: np.ndarray,
                       i: int, config: MetricConfig) -> float:
    """Fraction of pixels with max(y/y*, y*/y) strictly below delta_base**i."""
    if i < 1:
        raise ValueError("threshold exponent must be >= 1")
    y, ystar = _gather(pred, gt, valid)
    ratio = np.maximum(y / ystar, ystar / y)
    return float(np.mean(ratio < config.delta_base ** i))


def rel_error(pred: DepthMap, gt: DepthMap, valid: np.ndarray) -> float:
    """Mean absolute relative difference |y - y*| / y*."""
    y, ystar = _gather(pred, gt, valid)
    return float(np.mean(np.abs(y - ystar) / ystar))


def srel(pred: DepthMap, gt: DepthMap, valid: np.ndarray) -> float:
    """Mean squared relative difference |y - y*|^2 / y*."""
    y, ystar = _gather(pred, gt, valid)
    return float(np.mean(np.abs(y - ystar) ** 2 / ystar))


def rms(pred: DepthMap, gt: DepthMap, valid: np.ndarray) -> float:
    """Linear root-mean-square error, meters."""
    y, ystar = _gather(pred, gt, valid)
    return float(np.sqrt(np.mean((y - ystar) ** 2)))


def log_rms(pred: DepthMap, gt: DepthMap, valid: np.ndarray) -> float:
    """Root-mean-square of base-10 log differences."""
    y, ystar = _gather(pred, gt, valid)
    return float(np.sqrt(np.mean((np.log10(y) - np.log10(ystar)) ** 2)))


@dataclass(frozen=True)
class GlobalMetrics:
    rel: float
    srel: float
    rms: float
    log_rms: float
    delta: tuple[float, float, float]


def global_metrics(pred: DepthMap, gt: DepthMap, valid: np.ndarray,
                   config: MetricConfig) -> GlobalMetrics:
    """All five global statistics in one pass."""
    return GlobalMetrics(
        rel=rel_error(pred, gt, valid),
        srel=srel(pred, gt, valid),
        rms=rms(pred, gt, valid),
        log_rms=log_rms(pred, gt, valid),
        delta=tuple(threshold_accuracy(pred, gt, valid, i, config) for i in (1, 2, 3)),
    )


@dataclass(frozen=True)
class BinStats:
    """Per-bin statistics; empty bins carry count 0 and None stats."""

    count: int
    mean_rel: float | None
    std_rel: float | None
    mean_abs: float | None
    rms: float | None


@dataclass(frozen=True)
class BinnedErrors:
    """Statistics per ground-truth depth slice of configurable width.

    bin_edges has n_bins + 1 entries and partitions [0, max gt depth); pixel
    p falls into bin floor(gt_p / bin_width).
    """

    bin_width: float
    bins: tuple[BinStats, ...]

    @property
    def bin_edges(self) -> np.ndarray:
        return np.arange(len(self.bins) + 1) * self.bin_width

    @property
    def total_count(self) -> int:
        return sum(b.count for b in self.bins)


def binned_errors(pred: DepthMap, gt: DepthMap, valid: np.ndarray,
                  config: MetricConfig) -> BinnedErrors:
    """Assign valid pixels to 1-D depth bins and compute per-bin statistics."""
    y, ystar = _gather(pred, gt, valid)
    indices = np.floor(ystar / config.bin_width).astype(np.int64)
    n_bins = int(indices.max()) + 1
    rel_pix = np.abs(y - ystar) / ystar
    abs_pix = np.abs(y - ystar)
    sq_pix = (y - ystar) ** 2

    bins = []
    for b in range(n_bins):
        in_bin = indices == b
        count = int(np.count_nonzero(in_bin))
        if count == 0:
            bins.append(BinStats(0, None, None, None, None))
            continue
        r = rel_pix[in_bin]
        bins.append(BinStats(
            count=count,
            mean_rel=float(np.mean(r)),
            std_rel=float(np.std(r)),
            mean_abs=float(np.mean(abs_pix[in_bin])),
            rms=float(np.sqrt(np.mean(sq_pix[in_bin]))),
        ))
    return BinnedErrors(bin_width=config.bin_width, bins=tuple(bins))
