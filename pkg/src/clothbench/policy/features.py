"""Observation-to-feature pipeline: channel stacking, patch-mean pooling,
per-channel normalisation, and right-angle augmentation.

Pooling to the 8x8 patch grid happens before augmentation; right-angle
rotations and flips commute exactly with block-mean pooling, so augmenting
the pooled grid equals augmenting the image, at a fraction of the cost.
"""

from __future__ import annotations

import numpy as np

POOL_GRID = 8

CHANNEL_SETS = {
    "rgbd": ("rgb", "depth", "mask"),
    "rgb": ("rgb", "mask"),
    "depth": ("depth", "mask"),
}


def channel_count(channels: str) -> int:
    parts = CHANNEL_SETS[channels]
    return sum(3 if p == "rgb" else 1 for p in parts)


def obs_channels(obs, channels: str = "rgbd") -> np.ndarray:
    """Stack the configured observation channels as (C, H, W) floats."""
    parts = []
    for name in CHANNEL_SETS[channels]:
        if name == "rgb":
            parts.append(np.moveaxis(obs.rgb.astype(np.float64) / 255.0, 2, 0))
        elif name == "depth":
            parts.append(obs.depth[None, :, :])
        else:
            parts.append(obs.mask.astype(np.float64)[None, :, :])
    return np.concatenate(parts, axis=0)


def pool_grid(stack: np.ndarray, grid: int = POOL_GRID) -> np.ndarray:
    """Block-mean pooling of (C, H, W) down to (C, grid, grid).

    H and W must be multiples of the grid; the encoder therefore sees a
    fixed-size input regardless of the camera resolution.
    """
    c, h, w = stack.shape
    if h % grid or w % grid:
        raise ValueError(f"image size {h}x{w} not divisible by pool grid {grid}")
    fh, fw = h // grid, w // grid
    return stack.reshape(c, grid, fh, grid, fw).mean(axis=(2, 4))


def pooled_features(obs, channels: str = "rgbd") -> np.ndarray:
    return pool_grid(obs_channels(obs, channels))


# -------------------------------------------------------------- statistics


def channel_stats(pooled: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean/std over a stack of pooled grids (N, C, g, g)."""
    mean = pooled.mean(axis=(0, 2, 3))
    std = pooled.std(axis=(0, 2, 3))
    std = np.where(std < 1e-6, 1.0, std)
    return mean, std


def normalize_pooled(pooled: np.ndarray, mean: np.ndarray, std: np.ndarray):
    return (pooled - mean[:, None, None]) / std[:, None, None]


# ------------------------------------------------------------ augmentation

N_AUGMENTS = 8  # 4 right-angle rotations x optional horizontal flip


def augment_grid(grid: np.ndarray, rot_k: int, flip: bool) -> np.ndarray:
    """Rotate (CCW, in right angles) then flip horizontally; last two axes."""
    out = np.rot90(grid, k=rot_k % 4, axes=(-2, -1))
    if flip:
        out = np.flip(out, axis=-1)
    return np.ascontiguousarray(out)


def augment_uv(uv: np.ndarray, rot_k: int, flip: bool) -> np.ndarray:
    """Apply the identical planar transform to (..., 2) uv coordinates."""
    u = uv[..., 0].copy()
    v = uv[..., 1].copy()
    for _ in range(rot_k % 4):
        u, v = v, 1.0 - u
    if flip:
        u = 1.0 - u
    return np.stack([u, v], axis=-1)


def augment_actions(actions: np.ndarray, rot_k: int, flip: bool) -> np.ndarray:
    """actions: (..., 4) rows of (pick_u, pick_v, place_u, place_v)."""
    pick = augment_uv(actions[..., 0:2], rot_k, flip)
    place = augment_uv(actions[..., 2:4], rot_k, flip)
    return np.concatenate([pick, place], axis=-1)


class ActionNormalizer:
    """Per-dimension min-max mapping of raw action rows onto [-1, 1]."""

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        span = self.hi - self.lo
        self.degenerate = span < 1e-9
        self.span = np.where(self.degenerate, 1.0, span)

    @classmethod
    def fit(cls, actions: np.ndarray) -> "ActionNormalizer":
        flat = actions.reshape(-1, actions.shape[-1])
        return cls(flat.min(axis=0), flat.max(axis=0))

    def normalize(self, a: np.ndarray) -> np.ndarray:
        out = 2.0 * (a - self.lo) / self.span - 1.0
        return np.where(self.degenerate, 0.0, out)

    def denormalize(self, n: np.ndarray) -> np.ndarray:
        out = (n + 1.0) / 2.0 * self.span + self.lo
        return np.where(self.degenerate, self.lo, out)
