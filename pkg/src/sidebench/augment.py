"""Deterministic image augmentations for robustness probing.

Geometric kinds (the flips) change pixel positions and therefore have a
paired ground-truth transform; all photometric kinds leave the ground truth
untouched. Stochastic kinds draw from a generator seeded per augmentation,
so outputs are bit-reproducible given (image, parameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .core import DepthMap, EdgeMap, RgbImage, SemanticMask

KINDS = (
    "flip_h", "flip_v", "channel_swap", "hue_shift", "saturation_scale",
    "gamma", "histogram_stretch", "gaussian_blur", "gaussian_noise",
    "salt_pepper",
)

_CHANNELS = {"R": 0, "G": 1, "B": 2}

# intensity ladders for the sweep presets
BLUR_SIGMAS = (0.1, 1.0, 1.7783, 3.1623, 5.6234, 10.0)
NOISE_VARIANCES = (1e-5, 1e-3, 1e-2, 1e-1, 0.31623, 1.0)
SALT_PEPPER_FRACTIONS = (0.0, 0.005, 0.016, 0.05, 0.16, 0.5)


@dataclass(frozen=True)
class Augmentation:
    """One augmentation: a kind plus its scalar parameter, if any.

    amount carries the kind-specific value (gamma exponent, hue offset in
    degrees, saturation factor, blur sigma in pixels, noise variance on the
    [0, 1] intensity scale, or salt-and-pepper pixel fraction). order names
    the source channels per output position for channel_swap, e.g. "GBR".
    """

    kind: str
    amount: float | None = None
    order: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        needs_amount = self.kind in (
            "hue_shift", "saturation_scale", "gamma", "gaussian_blur",
            "gaussian_noise", "salt_pepper")
        if needs_amount and self.amount is None:
            raise ValueError(f"{self.kind} requires an amount")
        if self.kind == "channel_swap":
            if self.order is None or sorted(self.order) != ["B", "G", "R"]:
                raise ValueError("channel_swap requires an order permuting 'RGB'")
        if self.kind == "gamma" and self.amount <= 0:
            raise ValueError("gamma must be positive")
        if self.kind == "gaussian_blur" and self.amount <= 0:
            raise ValueError("blur sigma must be positive")
        if self.kind == "gaussian_noise" and self.amount < 0:
            raise ValueError("noise variance must be non-negative")
        if self.kind == "saturation_scale" and self.amount < 0:
            raise ValueError("saturation factor must be non-negative")
        if self.kind == "salt_pepper" and not 0.0 <= self.amount <= 1.0:
            raise ValueError("salt-and-pepper fraction must lie in [0, 1]")


def apply(image: RgbImage, aug: Augmentation) -> RgbImage:
    """Apply one augmentation to an RGB image."""
    p = image.pixels
    if aug.kind == "flip_h":
        return RgbImage(p[:, ::-1, :])
    if aug.kind == "flip_v":
        return RgbImage(p[::-1, :, :])
    if aug.kind == "channel_swap":
        return RgbImage(p[:, :, [_CHANNELS[c] for c in aug.order]])
    if aug.kind == "hue_shift":
        h, s, v = _rgb_to_hsv(p)
        return RgbImage(_hsv_to_rgb(np.mod(h + aug.amount, 360.0), s, v))
    if aug.kind == "saturation_scale":
        h, s, v = _rgb_to_hsv(p)
        return RgbImage(_hsv_to_rgb(h, np.clip(s * aug.amount, 0.0, 1.0), v))
    if aug.kind == "gamma":
        return RgbImage(p ** aug.amount)
    if aug.kind == "histogram_stretch":
        return RgbImage(_histogram_stretch(p))
    if aug.kind == "gaussian_blur":
        return RgbImage(_gaussian_blur(p, aug.amount))
    if aug.kind == "gaussian_noise":
        rng = np.random.default_rng(aug.seed)
        noisy = p + rng.normal(0.0, np.sqrt(aug.amount), size=p.shape)
        return RgbImage(np.clip(noisy, 0.0, 1.0))
    if aug.kind == "salt_pepper":
        return RgbImage(_salt_pepper(p, aug.amount, aug.seed))
    raise AssertionError(f"unhandled kind {aug.kind}")


def paired_gt_transform(gt: DepthMap, aug: Augmentation) -> DepthMap:
    """Transform the ground truth to match an augmented input image."""
    if aug.kind == "flip_h":
        return DepthMap(gt.values[:, ::-1], gt.valid[:, ::-1])
    if aug.kind == "flip_v":
        return DepthMap(gt.values[::-1, :], gt.valid[::-1, :])
    return gt


def paired_mask_transform(mask: SemanticMask, aug: Augmentation) -> SemanticMask:
    if aug.kind == "flip_h":
        return SemanticMask(mask.label, mask.instance_id, mask.bits[:, ::-1])
    if aug.kind == "flip_v":
        return SemanticMask(mask.label, mask.instance_id, mask.bits[::-1, :])
    return mask


def paired_edges_transform(edges: EdgeMap, aug: Augmentation) -> EdgeMap:
    if aug.kind == "flip_h":
        return EdgeMap(edges.bits[:, ::-1])
    if aug.kind == "flip_v":
        return EdgeMap(edges.bits[::-1, :])
    return edges


def _rgb_to_hsv(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB -> HSV with hue in degrees [0, 360)."""
    r, g, b = p[..., 0], p[..., 1], p[..., 2]
    v = p.max(axis=-1)
    c = v - p.min(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(
            c == 0, 0.0,
            np.where(v == r, np.mod((g - b) / c, 6.0),
                     np.where(v == g, (b - r) / c + 2.0, (r - g) / c + 4.0)))
        s = np.where(v == 0, 0.0, c / v)
    return h * 60.0, s, v


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    c = v * s
    hp = np.mod(h, 360.0) / 60.0
    x = c * (1.0 - np.abs(np.mod(hp, 2.0) - 1.0))
    zero = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    r = np.choose(sector, [c, x, zero, zero, x, c])
    g = np.choose(sector, [x, c, c, x, zero, zero])
    b = np.choose(sector, [zero, zero, x, c, c, x])
    m = v - c
    return np.clip(np.stack([r + m, g + m, b + m], axis=-1), 0.0, 1.0)


def _histogram_stretch(p: np.ndarray) -> np.ndarray:
    # map the 1st/99th luminance percentiles to 0/1, clamped
    lum = 0.299 * p[..., 0] + 0.587 * p[..., 1] + 0.114 * p[..., 2]
    lo, hi = np.percentile(lum, [1.0, 99.0])
    if hi - lo < 1e-12:
        return p
    return np.clip((p - lo) / (hi - lo), 0.0, 1.0)


def _gaussian_blur(p: np.ndarray, sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    kernel /= kernel.sum()
    out = np.empty_like(p)
    for ch in range(3):
        tmp = ndimage.convolve1d(p[..., ch], kernel, axis=0, mode="nearest")
        out[..., ch] = ndimage.convolve1d(tmp, kernel, axis=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def _salt_pepper(p: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    h, w, _ = p.shape
    n = h * w
    k = int(round(fraction * n))
    if k == 0:
        return p.copy()
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n, size=k, replace=False)
    out = p.reshape(n, 3).copy()
    out[chosen[: k - k // 2]] = 1.0  # salt
    out[chosen[k - k // 2:]] = 0.0  # pepper
    return out.reshape(h, w, 3)


# Single-intensity presets; keys are the ASCII-safe CLI names, values
# pair a display label with the augmentation.
SINGLE_PRESETS: dict[str, tuple[str, Augmentation]] = {
    "LR": ("LR", Augmentation("flip_h")),
    "UD": ("UD", Augmentation("flip_v")),
    "gamma0.2": ("gamma=0.2", Augmentation("gamma", amount=0.2)),
    "gamma2": ("gamma=2", Augmentation("gamma", amount=2.0)),
    "norm": ("Norm.", Augmentation("histogram_stretch")),
    "GBR": ("GBR", Augmentation("channel_swap", order="GBR")),
    "BRG": ("BRG", Augmentation("channel_swap", order="BRG")),
    "hue+9": ("+9deg", Augmentation("hue_shift", amount=9.0)),
    "hue+90": ("+90deg", Augmentation("hue_shift", amount=90.0)),
    "satx0.9": ("x0.9", Augmentation("saturation_scale", amount=0.9)),
    "satx0": ("x0", Augmentation("saturation_scale", amount=0.0)),
}

# Intensity-sweep presets; each expands to one output tree per step.
SWEEP_PRESETS: dict[str, tuple[str, str, tuple[float, ...]]] = {
    "GB": ("gaussian_blur", "sigma", BLUR_SIGMAS),
    "GN": ("gaussian_noise", "var", NOISE_VARIANCES),
    "SP": ("salt_pepper", "frac", SALT_PEPPER_FRACTIONS),
}


def resolve_preset(name: str, seed: int = 0) -> list[tuple[str, Augmentation]]:
    """Expand a preset name into (variant name, augmentation) pairs.

    Single-intensity presets yield one pair named after the preset; sweeps
    yield one pair per intensity, suffixed with the parameter value.
    """
    if name in SINGLE_PRESETS:
        _, aug = SINGLE_PRESETS[name]
        return [(name, replace(aug, seed=seed))]
    if name in SWEEP_PRESETS:
        kind, param, amounts = SWEEP_PRESETS[name]
        return [(f"{name}_{param}{amount:g}", Augmentation(kind, amount=amount, seed=seed))
                for amount in amounts]
    known = sorted(SINGLE_PRESETS) + sorted(SWEEP_PRESETS)
    raise ValueError(f"unknown preset {name!r}; known presets: {', '.join(known)}")
