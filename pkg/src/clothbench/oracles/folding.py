"""Scripted folding from a flattened start, with analytic goal masks.

Each fold action drags a pick point onto a place point; the silhouette goal
after the action is computed geometrically by reflecting the part of the
current goal polygon on the pick side of the fold line (the perpendicular
bisector of pick->place) onto the place side.  Goals are therefore noise-free
and independent of the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import shapely
from shapely import affinity
from shapely.geometry import Polygon

from ..metrics import shape_iou
from ..sim.env import PickPlaceAction
from ..sim.state import grid_positions
from .align import apply_align, rigid_align

FLAT_START_NC = 0.95
FOLD_PROGRESS_IOU = 0.80  # per-step goal must reach this before advancing


class FoldTask(str, Enum):
    ALL_CORNER_INWARD = "all-corner-inward"
    CORNERS_EDGE_INWARD = "corners-edge-inward"
    DIAGONAL_CROSS = "diagonal-cross"


NOMINAL_STEPS = {
    FoldTask.ALL_CORNER_INWARD: 4,
    FoldTask.CORNERS_EDGE_INWARD: 4,
    FoldTask.DIAGONAL_CROSS: 2,
}


def max_steps(task: FoldTask) -> int:
    # Nominal plus two recovery steps.
    return NOMINAL_STEPS[task] + 2


class FoldPreconditionError(RuntimeError):
    pass


@dataclass
class FoldStep:
    pick_xy: np.ndarray
    place_xy: np.ndarray
    goal: Polygon
    pick_particle: int | None = None  # tracked for recovery re-picks


def fold_polygon(poly: Polygon, pick_xy, place_xy) -> Polygon:
    """Reflect the pick-side part of ``poly`` across the fold line."""
    pick = np.asarray(pick_xy, dtype=float)
    place = np.asarray(place_xy, dtype=float)
    mid = 0.5 * (pick + place)
    axis = place - pick
    norm = float(np.linalg.norm(axis))
    if norm < 1e-12:
        return poly
    axis /= norm
    # Half-planes via a large clipping box oriented by the fold line.
    big = 10.0
    line_dir = np.array([-axis[1], axis[0]])
    box_pick = Polygon(
        [
            mid + line_dir * big,
            mid - line_dir * big,
            mid - line_dir * big - axis * big,
            mid + line_dir * big - axis * big,
        ]
    )
    box_keep = Polygon(
        [
            mid + line_dir * big,
            mid - line_dir * big,
            mid - line_dir * big + axis * big,
            mid + line_dir * big + axis * big,
        ]
    )
    part_pick = poly.intersection(box_pick)
    part_keep = poly.intersection(box_keep)
    # Reflection across the fold line: rotate so the line is the x-axis,
    # mirror y, rotate back.
    ang = float(np.degrees(np.arctan2(line_dir[1], line_dir[0])))
    moved = affinity.rotate(part_pick, -ang, origin=tuple(mid))
    moved = affinity.scale(moved, xfact=1.0, yfact=-1.0, origin=tuple(mid))
    moved = affinity.rotate(moved, ang, origin=tuple(mid))
    out = part_keep.union(moved)
    if not out.is_valid:
        out = shapely.make_valid(out)
    return out


def _check_preconditions(env) -> None:
    nc = env.normalized_coverage()
    if nc < FLAT_START_NC:
        raise FoldPreconditionError("fold requires flattened start")
    uv = env.camera.world_to_uv(env.state.positions[:, :2])
    if np.any((uv < 0.0) | (uv > 1.0)):
        raise FoldPreconditionError("fold requires the cloth fully in view")


def fold_script(task: FoldTask, env) -> list[FoldStep]:
    """Ordered pick/place actions plus the analytic goal mask per step."""
    _check_preconditions(env)
    params = env.params
    state = env.state
    reference = grid_positions(params)[:, :2]
    rot, t = rigid_align(reference, state.positions[:, :2])
    rows, cols = params.rows, params.cols
    nw, ne, se, sw = 0, cols - 1, rows * cols - 1, (rows - 1) * cols
    corner_ids = {"nw": nw, "ne": ne, "se": se, "sw": sw}
    corner_xy = {k: state.positions[v, :2].copy() for k, v in corner_ids.items()}
    centre = apply_align(rot, t, reference.mean(axis=0))

    poly = Polygon([corner_xy["nw"], corner_xy["ne"], corner_xy["se"], corner_xy["sw"]])
    steps: list[FoldStep] = []

    def add(pick_xy, place_xy, particle=None):
        nonlocal poly
        poly = fold_polygon(poly, pick_xy, place_xy)
        steps.append(
            FoldStep(
                pick_xy=np.asarray(pick_xy, dtype=float),
                place_xy=np.asarray(place_xy, dtype=float),
                goal=poly,
                pick_particle=particle,
            )
        )

    if task == FoldTask.ALL_CORNER_INWARD:
        for name in ("nw", "ne", "se", "sw"):
            add(corner_xy[name], centre, corner_ids[name])
    elif task == FoldTask.DIAGONAL_CROSS:
        add(corner_xy["nw"], corner_xy["se"], corner_ids["nw"])
        add(corner_xy["ne"], corner_xy["sw"], corner_ids["ne"])
    elif task == FoldTask.CORNERS_EDGE_INWARD:
        # Two opposite corners to the centre, then the midpoints of the two
        # resulting crease edges onto the centreline (the NE-SW diagonal).
        add(corner_xy["nw"], centre, corner_ids["nw"])
        add(corner_xy["se"], centre, corner_ids["se"])
        axis = corner_xy["ne"] - corner_xy["sw"]
        axis = axis / np.linalg.norm(axis)
        for name in ("nw", "se"):
            mid = 0.5 * (corner_xy[name] + centre)
            rel = mid - centre
            proj = centre + axis * float(rel @ axis)
            add(mid, proj)
    else:
        raise ValueError(f"unknown fold task: {task}")
    return steps


class FoldPolicy:
    """Stateful executor for a fold script with bounded recovery retries.

    Advances to the next scripted action once the current step's goal is
    reached (per-step IoU), otherwise re-emits it, recomputing the pick from
    the tracked particle's current position.  The episode cap (nominal + 2)
    is enforced by the evaluation runner.
    """

    def __init__(self, task: FoldTask):
        self.task = FoldTask(task)
        self.steps: list[FoldStep] | None = None
        self.cursor = 0
        self.emitted = 0
        self.last_rule: str | None = None

    def reset(self) -> None:
        self.steps = None
        self.cursor = 0
        self.emitted = 0

    @property
    def goals(self) -> list[Polygon]:
        return [s.goal for s in self.steps] if self.steps else []

    def final_goal(self, env) -> Polygon:
        if self.steps is None:
            self.steps = fold_script(self.task, env)
        return self.steps[-1].goal

    def step(self, env) -> PickPlaceAction | None:
        if self.steps is None:
            self.steps = fold_script(self.task, env)
        cap = max_steps(self.task)
        while self.cursor < len(self.steps):
            goal_iou = shape_iou(env.cloth_silhouette(), self.steps[self.cursor].goal)
            if goal_iou >= FOLD_PROGRESS_IOU:
                self.cursor += 1
                continue
            break
        if self.cursor >= len(self.steps) or self.emitted >= cap:
            self.last_rule = "done"
            return None
        fs = self.steps[self.cursor]
        pick = fs.pick_xy
        if fs.pick_particle is not None:
            pick = env.state.positions[fs.pick_particle, :2]
        self.emitted += 1
        self.last_rule = f"fold-{self.cursor}"
        uv = env.camera.world_to_uv
        clip = lambda v: (float(np.clip(v[0], 0.0, 1.0)), float(np.clip(v[1], 0.0, 1.0)))
        return PickPlaceAction(clip(uv(pick)), clip(uv(fs.place_xy)))
