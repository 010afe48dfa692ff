"""Cloth state: the single source of ground truth for the simulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ClothParams, ValidationError

# Default fabric/table colours (RGB in [0,1]); overridden by domain
# randomisation during data collection.
DEFAULT_FACE_COLOR = (0.82, 0.35, 0.26)
DEFAULT_BACK_COLOR = (0.30, 0.42, 0.78)


@dataclass
class ClothState:
    """Particle grid positions/velocities plus gripper attachment bookkeeping.

    ``face_colors`` holds (top, bottom) RGB triples.  The realistic towel
    environment uses the same colour on both faces; the idealised variant
    renders the two faces distinctly.
    """

    positions: np.ndarray  # (n, 3) metres
    velocities: np.ndarray  # (n, 3) m/s
    attached: frozenset = frozenset()
    face_colors: np.ndarray = field(
        default_factory=lambda: np.array([DEFAULT_FACE_COLOR, DEFAULT_FACE_COLOR])
    )

    def copy(self) -> "ClothState":
        return ClothState(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            attached=self.attached,
            face_colors=self.face_colors.copy(),
        )

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    def kinetic_energy(self, mass: float) -> float:
        return float(0.5 * mass * np.sum(self.velocities**2))

    def with_face_colors(self, top, bottom=None) -> "ClothState":
        out = self.copy()
        bottom = top if bottom is None else bottom
        out.face_colors = np.array([top, bottom], dtype=float)
        return out

    @property
    def same_face_colors(self) -> bool:
        return bool(np.array_equal(self.face_colors[0], self.face_colors[1]))


def grid_positions(params: ClothParams, pose=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Flat particle grid at a planar pose (x, y, yaw), resting on the ground."""
    rows, cols, h = params.rows, params.cols, params.spacing
    r = np.arange(rows) - (rows - 1) / 2.0
    c = np.arange(cols) - (cols - 1) / 2.0
    yy, xx = np.meshgrid(r * h, c * h, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    x0, y0, yaw = pose
    if yaw != 0.0:
        rot = np.array([[np.cos(yaw), -np.sin(yaw)], [np.sin(yaw), np.cos(yaw)]])
        pts = pts @ rot.T
    pts = pts + np.array([x0, y0])
    out = np.zeros((rows * cols, 3))
    out[:, :2] = pts
    return out


def init_cloth(params: ClothParams, pose=(0.0, 0.0, 0.0)) -> ClothState:
    """Flat towel at rest on the ground plane at the given planar pose."""
    params.validate()
    pos = grid_positions(params, pose)
    return ClothState(positions=pos, velocities=np.zeros_like(pos))


def flattened_reference(params: ClothParams):
    """Canonical flat grid and its projected area (the NC denominator)."""
    params.validate()
    ref = grid_positions(params)
    return ref, params.rest_area


def validate_state(state: ClothState, params: ClothParams) -> None:
    if state.positions.shape != (params.n_particles, 3):
        raise ValidationError("positions", "shape mismatch with params grid")
    if not np.all(np.isfinite(state.positions)):
        raise ValidationError("positions", "must be finite")
