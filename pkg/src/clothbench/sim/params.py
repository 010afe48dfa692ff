"""Parameter records for the cloth simulator and the grasp model."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

from ..errors import ValidationError

__all__ = ["ClothParams", "GraspConfig", "GraspMode", "ValidationError"]


@dataclass(frozen=True)
class ClothParams:
    """Mass-spring grid parameters for a rectangular towel.

    The grid has ``rows x cols`` particles spaced ``spacing`` metres apart at
    rest, connected by structural, shear and bend springs.  ``self_stiction``
    couples near-contact non-adjacent particles, mimicking soft fabrics whose
    layers cling to each other.
    """

    rows: int = 13
    cols: int = 13
    spacing: float = 0.018
    particle_mass: float = 0.004
    stiffness_structural: float = 120.0
    stiffness_shear: float = 40.0
    stiffness_bend: float = 3.0
    damping: float = 12.0
    ground_friction: float = 0.38
    self_stiction: float = 0.9
    gravity: float = 9.81
    substeps: int = 10
    settle_ke_threshold: float = 1e-7
    dt: float = 0.0035
    thickness: float = 0.002
    max_settle_substeps: int = 9000

    def validate(self) -> "ClothParams":
        if self.rows < 2:
            raise ValidationError("rows", "must be >= 2")
        if self.cols < 2:
            raise ValidationError("cols", "must be >= 2")
        if self.spacing <= 0:
            raise ValidationError("spacing", "must be > 0")
        if self.particle_mass <= 0:
            raise ValidationError("particle_mass", "must be > 0")
        for name in ("stiffness_structural", "stiffness_shear", "stiffness_bend"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, "must be > 0")
        if not 0.0 <= self.ground_friction <= 1.0:
            raise ValidationError("ground_friction", "must be in [0, 1]")
        if self.self_stiction < 0:
            raise ValidationError("self_stiction", "must be >= 0")
        if self.substeps < 1:
            raise ValidationError("substeps", "must be >= 1")
        if self.dt <= 0:
            raise ValidationError("dt", "must be > 0")
        if self.thickness <= 0:
            raise ValidationError("thickness", "must be > 0")
        return self

    def replace(self, **kw) -> "ClothParams":
        return dataclasses.replace(self, **kw).validate()

    @property
    def n_particles(self) -> int:
        return self.rows * self.cols

    @property
    def width(self) -> float:
        """Rest extent along the column axis, metres."""
        return (self.cols - 1) * self.spacing

    @property
    def height(self) -> float:
        """Rest extent along the row axis, metres."""
        return (self.rows - 1) * self.spacing

    @property
    def rest_area(self) -> float:
        return self.width * self.height

    @property
    def layer_gap(self) -> float:
        """Vertical offset enforced between stacked cloth layers.

        Kept above the 2x-thickness clustering threshold used for layer
        counting so stacked layers register as distinct height clusters.
        """
        return 3.0 * self.thickness


class GraspMode(str, Enum):
    CLUSTER = "cluster"
    PRECISE = "precise"


@dataclass(frozen=True)
class GraspConfig:
    """Gripper attachment model.

    ``cluster`` mode attaches every particle inside a vertical cylinder of
    ``grasp_radius`` around the pick point (all layers, or only the topmost
    height cluster when ``multilayer`` is off).  ``precise`` mode attaches the
    single horizontally-nearest particle, idealising a perfect gripper.
    """

    grasp_radius: float = 0.027  # 1.5x default particle spacing
    misgrasp_prob: float = 0.1
    multilayer: bool = True
    lift_height: float = 0.06
    move_step: float = 0.03
    release_settle: bool = True
    mode: GraspMode = GraspMode.CLUSTER
    strain_break: float = 3.0
    drop_fraction: float = 0.5
    # Vertical reach of the pinch below the top of the grabbed stack; a
    # finite gripper cannot close around an arbitrarily tall heap.  None
    # removes the cap (attach the full cylinder).
    grasp_depth: float | None = 0.016

    def validate(self) -> "GraspConfig":
        if self.grasp_radius <= 0:
            raise ValidationError("grasp_radius", "must be > 0")
        if not 0.0 <= self.misgrasp_prob <= 1.0:
            raise ValidationError("misgrasp_prob", "must be in [0, 1]")
        if self.lift_height <= 0:
            raise ValidationError("lift_height", "must be > 0")
        if self.move_step <= 0:
            raise ValidationError("move_step", "must be > 0")
        return self

    def replace(self, **kw) -> "GraspConfig":
        return dataclasses.replace(self, **kw).validate()
