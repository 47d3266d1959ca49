"""Directed depth error against a fronto-parallel reference plane.

Pixels are classified by which side of the reference depth they fall on
(depth == reference counts as in-front). eps_plus is the fraction predicted
behind while the ground truth is in front (too far), eps_minus the reverse
(too close), and eps0 the remainder. eps0 is computed as
``1.0 - (eps_plus + eps_minus)``, which makes the float identity
``(eps_plus + eps_minus) + eps0 == 1.0`` hold exactly; the integer counts are
carried alongside and always sum to the valid-pixel total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import MetricConfig
from ..core import DepthMap
from ..geometry import median_scale


@dataclass(frozen=True)
class DdeResult:
    eps0: float
    eps_plus: float
    eps_minus: float
    ref_depth: float
    n_plus: int
    n_minus: int
    total: int

    @property
    def n0(self) -> int:
        return self.total - self.n_plus - self.n_minus


def dde(pred: DepthMap, gt: DepthMap, valid: np.ndarray,
        config: MetricConfig) -> DdeResult:
    valid = np.asarray(valid, dtype=bool)
    if valid.shape != pred.shape or pred.shape != gt.shape:
        raise ValueError("dimension mismatch between depth maps and validity field")
    total = int(np.count_nonzero(valid))
    if total == 0:
        raise ValueError("no valid pixels (T = 0)")
    if config.scaling_enabled:
        _, pred = median_scale(pred, gt, valid)

    ref = config.dde_ref_depth
    pred_behind = pred.values[valid] > ref
    gt_behind = gt.values[valid] > ref
    n_plus = int(np.count_nonzero(pred_behind & ~gt_behind))
    n_minus = int(np.count_nonzero(~pred_behind & gt_behind))

    eps_plus = n_plus / total
    eps_minus = n_minus / total
    return DdeResult(
        eps0=1.0 - (eps_plus + eps_minus),
        eps_plus=eps_plus,
        eps_minus=eps_minus,
        ref_depth=ref,
        n_plus=n_plus,
        n_minus=n_minus,
        total=total,
    )
