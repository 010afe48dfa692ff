"""Observation assembly: render, segment, process depth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import Camera
from .depth import MaskMode, VisionConfig, process_depth
from .masks import cloth_mask
from .render import BACKGROUND_COLOR, render_topdown


@dataclass
class Observation:
    rgb: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float in [0, 1]
    mask: np.ndarray  # (H, W) bool
    raw_depth: np.ndarray  # (H, W) metres from camera, kept for tests

    def copy(self) -> "Observation":
        return Observation(
            self.rgb.copy(), self.depth.copy(), self.mask.copy(), self.raw_depth.copy()
        )


def observe(
    positions: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    face_colors: np.ndarray,
    cfg: VisionConfig,
    train: bool = False,
    rng: np.random.Generator | None = None,
    background=BACKGROUND_COLOR,
    reference_height: float | None = None,
) -> Observation:
    out = render_topdown(positions, faces, camera, face_colors, background)
    mask = cloth_mask(out.mask, out.rgb, cfg.mask_mode, fabric_color=face_colors[0])
    depth = process_depth(
        out.raw_depth,
        cfg,
        train=train,
        rng=rng,
        camera_height=camera.height_above_table,
        reference_height=reference_height,
    )
    return Observation(rgb=out.rgb, depth=depth, mask=mask, raw_depth=out.raw_depth)
