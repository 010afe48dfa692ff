"""Cluster/precise grasp selection and the grasp-outcome taxonomy."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .params import ClothParams, GraspConfig, GraspMode
from .state import ClothState


class GraspKind(str, Enum):
    SUCCESS = "Success"
    MISGRASP = "Misgrasp"
    MULTILAYER = "MultiLayer"
    CLOTH_DROP = "ClothDrop"


OUTCOME_CODES = {
    GraspKind.SUCCESS: 0,
    GraspKind.MISGRASP: 1,
    GraspKind.MULTILAYER: 2,
    GraspKind.CLOTH_DROP: 3,
}
CODE_TO_KIND = {v: k for k, v in OUTCOME_CODES.items()}


@dataclass(frozen=True)
class GraspOutcome:
    kind: GraspKind
    attached_count: int = 0
    layers: int = 0
    clamped: bool = False  # pick was out of table bounds and got clamped

    def __post_init__(self):
        if self.kind == GraspKind.MISGRASP:
            assert self.attached_count == 0
        if self.kind == GraspKind.MULTILAYER:
            assert self.layers >= 2


def height_clusters(zs: np.ndarray, gap: float) -> list[np.ndarray]:
    """Group heights into clusters separated by more than ``gap``.

    Returns index groups (into ``zs``) ordered bottom to top.
    """
    if zs.size == 0:
        return []
    order = np.argsort(zs, kind="stable")
    sorted_z = zs[order]
    breaks = np.nonzero(np.diff(sorted_z) > gap)[0]
    groups = np.split(order, breaks + 1)
    return groups


def select_grasp(
    state: ClothState,
    world_xy,
    config: GraspConfig,
    params: ClothParams,
    rng: np.random.Generator,
    bounds: float | None = None,
):
    """Resolve a pick point into an attached particle set.

    Returns (attached indices array, layers, GraspOutcome).  The outcome kind
    here is Misgrasp / MultiLayer / Success; cloth-dropping can only be
    diagnosed later, during the move.
    """
    xy = np.asarray(world_xy, dtype=float)[:2]
    clamped = False
    if bounds is not None:
        limit = np.array([bounds, bounds])
        clipped = np.clip(xy, -limit, limit)
        clamped = bool(np.any(clipped != xy))
        xy = clipped

    pos = state.positions
    d = pos[:, :2] - xy
    dist = np.sqrt(np.sum(d * d, axis=1))
    empty = np.empty(0, dtype=int)

    if config.mode == GraspMode.PRECISE:
        capture = max(config.grasp_radius, 0.75 * params.spacing)
        if float(np.min(dist)) > capture:
            return empty, 0, GraspOutcome(GraspKind.MISGRASP, clamped=clamped)
        if config.misgrasp_prob > 0 and rng.random() < config.misgrasp_prob:
            return empty, 0, GraspOutcome(GraspKind.MISGRASP, clamped=clamped)
        attached = np.array([int(np.argmin(dist))])
        return attached, 1, GraspOutcome(GraspKind.SUCCESS, 1, 1, clamped)

    within = np.nonzero(dist <= config.grasp_radius)[0]
    if within.size == 0:
        return empty, 0, GraspOutcome(GraspKind.MISGRASP, clamped=clamped)
    if config.misgrasp_prob > 0 and rng.random() < config.misgrasp_prob:
        return empty, 0, GraspOutcome(GraspKind.MISGRASP, clamped=clamped)

    if config.grasp_depth is not None:
        top = float(np.max(pos[within, 2]))
        within = within[pos[within, 2] >= top - config.grasp_depth]
    clusters = height_clusters(pos[within, 2], 2.0 * params.thickness)
    if config.multilayer:
        attached = within
        layers = len(clusters)
    else:
        attached = within[clusters[-1]]  # topmost height cluster only
        layers = 1
    kind = GraspKind.MULTILAYER if layers >= 2 else GraspKind.SUCCESS
    return attached, layers, GraspOutcome(kind, int(attached.size), layers, clamped)


def grasp(
    state: ClothState,
    world_xy,
    config: GraspConfig,
    params: ClothParams,
    rng: np.random.Generator,
    bounds: float | None = None,
) -> GraspOutcome:
    """Attempt a grasp, updating ``state.attached`` in place."""
    attached, _, outcome = select_grasp(state, world_xy, config, params, rng, bounds)
    state.attached = frozenset(int(i) for i in attached)
    return outcome
