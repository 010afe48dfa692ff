from .params import ClothParams, GraspConfig, GraspMode, ValidationError
from .state import ClothState, init_cloth, flattened_reference, grid_positions
from .cloth import ClothSim, settle
from .grasp import GraspKind, GraspOutcome, grasp, height_clusters, select_grasp
from .geometry import build_faces, geometry_iou, polygon_mask, projected_area, silhouette
from .env import PickPlaceAction, PickPlaceEnv, StepResult, crumple, step_pick_place

__all__ = [
    "ClothParams",
    "ClothSim",
    "ClothState",
    "GraspConfig",
    "GraspKind",
    "GraspMode",
    "GraspOutcome",
    "PickPlaceAction",
    "PickPlaceEnv",
    "StepResult",
    "ValidationError",
    "build_faces",
    "crumple",
    "flattened_reference",
    "geometry_iou",
    "grasp",
    "grid_positions",
    "height_clusters",
    "init_cloth",
    "polygon_mask",
    "projected_area",
    "select_grasp",
    "settle",
    "silhouette",
    "step_pick_place",
]
