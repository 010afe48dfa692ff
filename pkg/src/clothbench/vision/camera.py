"""Orthographic top-down camera and the pixel/world coordinate mapping.

World frame: table centre at the origin, x to the right, y increasing
downwards in the image, z up.  Normalised image coordinates (u, v) are in
[0, 1]^2 with u horizontal and v vertical; pixel (row, col) has its centre at
u = (col + 0.5) / W, v = (row + 0.5) / H.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class Camera:
    height_above_table: float = 0.75
    image_size: int = 128
    view_size: float = 0.5  # side of the square viewed region, metres

    def validate(self) -> "Camera":
        if self.image_size < 32:
            raise ValidationError("image_size", "must be >= 32")
        if self.view_size <= 0:
            raise ValidationError("view_size", "must be > 0")
        if self.height_above_table <= 0:
            raise ValidationError("height_above_table", "must be > 0")
        return self

    @property
    def metres_per_pixel(self) -> float:
        return self.view_size / self.image_size

    # ------------------------------------------------------------ mappings

    def uv_to_world(self, uv) -> np.ndarray:
        """Normalised image coordinates -> table-plane metres."""
        uv = np.asarray(uv, dtype=float)
        return (uv - 0.5) * self.view_size

    def world_to_uv(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        return xy / self.view_size + 0.5

    def uv_to_pixel(self, uv) -> tuple[int, int]:
        """Normalised (u, v) -> integer (row, col), clamped to the image."""
        u, v = float(uv[0]), float(uv[1])
        col = int(np.floor(u * self.image_size))
        row = int(np.floor(v * self.image_size))
        last = self.image_size - 1
        return min(max(row, 0), last), min(max(col, 0), last)

    def pixel_to_uv(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) / self.image_size, (row + 0.5) / self.image_size)

    def pixel_to_world(self, row: int, col: int) -> np.ndarray:
        return self.uv_to_world(self.pixel_to_uv(row, col))

    def world_to_pixel(self, xy) -> tuple[int, int]:
        return self.uv_to_pixel(self.world_to_uv(xy))

    @property
    def table_bounds(self) -> tuple[float, float]:
        """Half-extents (x, y) of the viewed table region."""
        half = self.view_size / 2.0
        return half, half

    def clamp_world(self, xy) -> np.ndarray:
        half = self.view_size / 2.0
        return np.clip(np.asarray(xy, dtype=float), -half, half)
