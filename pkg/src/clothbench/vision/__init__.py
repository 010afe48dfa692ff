from .camera import Camera
from .colors import domain_randomize, hue_distance, rgb_to_hue
from .depth import DepthMode, MaskMode, VisionConfig, box_blur, process_depth, rescale_flip
from .masks import (
    NoClothVisibleError,
    adjust_pick,
    boundary_pixels,
    cloth_mask,
    cloth_mask_color,
    erode_mask,
    mask_area_suspicious,
    pick_adjustment,
    pick_orientation,
)
from .observe import Observation, observe
from .render import BACKGROUND_COLOR, RenderOut, render_topdown

__all__ = [
    "BACKGROUND_COLOR",
    "Camera",
    "DepthMode",
    "MaskMode",
    "NoClothVisibleError",
    "Observation",
    "RenderOut",
    "VisionConfig",
    "adjust_pick",
    "boundary_pixels",
    "box_blur",
    "cloth_mask",
    "cloth_mask_color",
    "domain_randomize",
    "erode_mask",
    "hue_distance",
    "mask_area_suspicious",
    "observe",
    "pick_adjustment",
    "pick_orientation",
    "process_depth",
    "render_topdown",
    "rescale_flip",
    "rgb_to_hue",
]
