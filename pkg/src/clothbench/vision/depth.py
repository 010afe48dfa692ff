"""Depth-image processing for training and inference.

The standard pipeline rescales each depth image to [0, 1] and flips it so
that points nearer the camera (higher cloth) map toward 1; per-image min-max
makes the result invariant to camera height.  Training additionally injects
Gaussian noise and a box blur.  A "naive" mode (noise only, constant-offset
height alignment at inference) is kept selectable for ablations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ValidationError


class MaskMode(str, Enum):
    GROUND_TRUTH = "ground-truth"
    COLOR_THRESHOLD = "color-threshold"


class DepthMode(str, Enum):
    STANDARD = "standard"  # rescale + flip (+ noise/blur in training)
    NAIVE = "naive"  # noise only in training; offset alignment at inference


@dataclass(frozen=True)
class VisionConfig:
    depth_noise_sigma: float = 0.02
    blur_kernel: int = 3
    erosion_radius: int = 3
    mask_mode: MaskMode = MaskMode.GROUND_TRUTH
    depth_mode: DepthMode = DepthMode.STANDARD
    # HSV sampling ranges for domain randomisation: (low, high) per channel.
    fabric_hue: tuple = (0.0, 1.0)
    fabric_sat: tuple = (0.45, 0.95)
    fabric_val: tuple = (0.45, 0.95)
    background_hue: tuple = (0.0, 1.0)
    background_sat: tuple = (0.0, 0.35)
    background_val: tuple = (0.12, 0.4)
    min_hue_separation: float = 0.08  # circular hue distance, in [0, 0.5]

    def validate(self) -> "VisionConfig":
        if self.blur_kernel % 2 != 1 or self.blur_kernel < 1:
            raise ValidationError("blur_kernel", "must be odd and >= 1")
        if self.erosion_radius < 0:
            raise ValidationError("erosion_radius", "must be >= 0")
        if self.depth_noise_sigma < 0:
            raise ValidationError("depth_noise_sigma", "must be >= 0")
        if not 0 <= self.min_hue_separation <= 0.5:
            raise ValidationError("min_hue_separation", "must be in [0, 0.5]")
        return self


def box_blur(img: np.ndarray, kernel: int) -> np.ndarray:
    """Separable box blur with edge clamping."""
    if kernel <= 1:
        return img.copy()
    pad = kernel // 2
    out = np.pad(img, pad, mode="edge")
    csum = np.cumsum(out, axis=0)
    csum = np.vstack([np.zeros((1, csum.shape[1])), csum])
    out = (csum[kernel:] - csum[:-kernel]) / kernel
    csum = np.cumsum(out, axis=1)
    csum = np.hstack([np.zeros((csum.shape[0], 1)), csum])
    return (csum[:, kernel:] - csum[:, :-kernel]) / kernel


def rescale_flip(raw_depth: np.ndarray) -> np.ndarray:
    """Per-image min-max rescale, flipped so nearer maps toward 1.

    A degenerate flat image (max == min) maps to all zeros.
    """
    lo = float(np.min(raw_depth))
    hi = float(np.max(raw_depth))
    if hi - lo < 1e-12:
        return np.zeros_like(raw_depth)
    return (hi - raw_depth) / (hi - lo)


def process_depth(
    raw_depth: np.ndarray,
    cfg: VisionConfig,
    train: bool,
    rng: np.random.Generator | None = None,
    camera_height: float | None = None,
    reference_height: float | None = None,
) -> np.ndarray:
    """Raw metric depth -> unit-interval processed depth.

    Standard mode: rescale+flip; in training additionally Gaussian noise and
    box blur, clamped to [0, 1].  Naive mode: depth normalised by camera
    height (noise only in training); at inference a constant offset aligns
    the mean height to ``reference_height`` when one is provided.
    """
    if not np.all(np.isfinite(raw_depth)):
        raise ValueError("raw_depth must be finite")
    if cfg.depth_mode == DepthMode.NAIVE:
        if camera_height is None:
            camera_height = float(np.max(raw_depth))
        d = raw_depth.copy()
        if not train and reference_height is not None:
            d = d + (reference_height - camera_height)
            camera_height = reference_height
        out = d / camera_height
        if train:
            if rng is None:
                raise ValueError("training-mode processing needs an rng")
            out = out + rng.normal(0.0, cfg.depth_noise_sigma, out.shape)
        return np.clip(out, 0.0, 1.0)

    out = rescale_flip(raw_depth)
    if train:
        if rng is None:
            raise ValueError("training-mode processing needs an rng")
        out = out + rng.normal(0.0, cfg.depth_noise_sigma, out.shape)
        out = box_blur(out, cfg.blur_kernel)
    return np.clip(out, 0.0, 1.0)
