"""Cloth-mask operations: segmentation, erosion, pick snapping and the
boundary-tangent gripper orientation estimate."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .camera import Camera
from .colors import rgb_to_hue
from .depth import MaskMode, VisionConfig


class NoClothVisibleError(RuntimeError):
    """Raised when an operation that needs cloth pixels gets an empty mask."""


def disc_footprint(radius: int) -> np.ndarray:
    r = int(radius)
    if r <= 0:
        return np.ones((1, 1), dtype=bool)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (xx * xx + yy * yy) <= r * r


def erode_mask(mask: np.ndarray, radius: int) -> np.ndarray:
    """Morphological erosion with a disc structuring element."""
    if radius <= 0:
        return mask.copy()
    return ndimage.binary_erosion(mask, structure=disc_footprint(radius))


def cloth_mask_color(rgb: np.ndarray, fabric_color, hue_tol: float = 0.08) -> np.ndarray:
    """Colour-threshold segmentation: circular hue distance to the known
    fabric colour, gated on minimum saturation-like colourfulness.

    Fails by design when the fabric matches the background colour; callers
    should sanity-check the returned area.
    """
    img = rgb.astype(np.float64) / 255.0
    hue = rgb_to_hue(img)
    target = rgb_to_hue(np.asarray(fabric_color, dtype=np.float64).reshape(1, 1, 3))[0, 0]
    dist = np.abs(hue - target)
    dist = np.minimum(dist, 1.0 - dist)
    chroma = img.max(axis=2) - img.min(axis=2)
    return (dist <= hue_tol) & (chroma > 0.08)


def mask_area_suspicious(mask: np.ndarray, min_pixels: int = 16) -> bool:
    """Sanity check catching segmentation failures (empty/near-empty masks)."""
    return int(mask.sum()) < min_pixels


def cloth_mask(render_mask, rgb, mode: MaskMode, fabric_color=None) -> np.ndarray:
    if mode == MaskMode.GROUND_TRUTH:
        return render_mask.copy()
    if fabric_color is None:
        raise ValueError("colour-threshold masking needs the fabric colour")
    return cloth_mask_color(rgb, fabric_color)


def uv_to_rc(uv, size: int) -> tuple[int, int]:
    col = min(max(int(np.floor(uv[0] * size)), 0), size - 1)
    row = min(max(int(np.floor(uv[1] * size)), 0), size - 1)
    return row, col


def rc_to_uv(row: int, col: int, size: int) -> tuple[float, float]:
    return ((col + 0.5) / size, (row + 0.5) / size)


def _nearest_true_pixel(mask: np.ndarray, row: int, col: int) -> tuple[int, int]:
    """Nearest true pixel by Euclidean distance; ties broken by lowest row,
    then lowest column."""
    rows, cols = np.nonzero(mask)
    d2 = (rows - row) ** 2 + (cols - col) ** 2
    best = np.min(d2)
    tied = np.nonzero(d2 == best)[0]
    # nonzero already yields row-major (lowest row, then lowest col) order.
    pick = tied[0]
    return int(rows[pick]), int(cols[pick])


def adjust_pick(pick_uv, mask: np.ndarray, erosion_radius: int) -> tuple[float, float]:
    """Snap a pick to the eroded cloth mask.

    Picks already inside the eroded mask are unchanged.  If erosion empties
    the mask, the un-eroded mask is used as fallback.  Raises
    NoClothVisibleError for an empty mask.
    """
    if not mask.any():
        raise NoClothVisibleError("no cloth visible")
    size = mask.shape[0]
    eroded = erode_mask(mask, erosion_radius)
    target = eroded if eroded.any() else mask
    row, col = uv_to_rc(pick_uv, size)
    if target[row, col]:
        return (float(pick_uv[0]), float(pick_uv[1]))
    r, c = _nearest_true_pixel(target, row, col)
    return rc_to_uv(r, c, size)


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Mask pixels adjacent (8-connectivity) to a non-mask pixel."""
    interior = ndimage.binary_erosion(mask, structure=np.ones((3, 3), dtype=bool))
    return mask & ~interior


def pick_orientation(
    pick_uv, mask: np.ndarray, erosion_radius: int, window: int = 11
) -> float:
    """Gripper yaw parallel to the local mask boundary near the pick.

    Fits the principal direction of boundary pixels in a square window
    centred on the boundary point nearest the pick; returns the tangent
    angle in [0, pi).  Picks farther than 2 x erosion_radius from the
    boundary keep the default orientation 0.
    """
    if not mask.any():
        return 0.0
    border = boundary_pixels(mask)
    if not border.any():
        return 0.0
    size = mask.shape[0]
    row, col = uv_to_rc(pick_uv, size)
    br, bc = _nearest_true_pixel(border, row, col)
    dist = np.hypot(br - row, bc - col)
    if dist > 2.0 * erosion_radius:
        return 0.0
    half = window // 2
    r0, r1 = max(br - half, 0), min(br + half + 1, size)
    c0, c1 = max(bc - half, 0), min(bc + half + 1, size)
    rows, cols = np.nonzero(border[r0:r1, c0:c1])
    if rows.size < 2:
        return 0.0
    # Principal direction of the boundary points: tangent of the cut-line.
    u = cols - cols.mean()
    v = rows - rows.mean()
    cov = np.array([[np.sum(u * u), np.sum(u * v)], [np.sum(u * v), np.sum(v * v)]])
    evals, evecs = np.linalg.eigh(cov)
    tangent = evecs[:, int(np.argmax(evals))]  # (du, dv)
    angle = float(np.arctan2(tangent[1], tangent[0]))
    return angle % np.pi


def pick_adjustment(
    pick_uv,
    mask: np.ndarray,
    cfg: VisionConfig,
    adjust_position: bool = True,
    adjust_orientation: bool = True,
):
    """Combined position + orientation adjustment used at execution time."""
    adjusted = (float(pick_uv[0]), float(pick_uv[1]))
    if adjust_position:
        adjusted = adjust_pick(pick_uv, mask, cfg.erosion_radius)
    angle = 0.0
    if adjust_orientation:
        angle = pick_orientation(adjusted, mask, cfg.erosion_radius)
    return adjusted, angle
