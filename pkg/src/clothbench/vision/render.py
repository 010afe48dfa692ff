"""Orthographic top-down rasteriser for the cloth surface.

Z-buffered triangle fill over a background plane.  Deliberately flat-shaded:
photorealism is not a goal, only geometry, occlusion and colour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sim.geometry import build_faces
from .camera import Camera

BACKGROUND_COLOR = (0.22, 0.22, 0.24)  # dark grey work surface


@dataclass
class RenderOut:
    rgb: np.ndarray  # (H, W, 3) uint8
    raw_depth: np.ndarray  # (H, W) metres from camera
    mask: np.ndarray  # (H, W) bool, cloth pixels


def render_topdown(
    positions: np.ndarray,
    faces: np.ndarray,
    camera: Camera,
    face_colors: np.ndarray,
    background=BACKGROUND_COLOR,
    surface_lift: float = 0.002,
) -> RenderOut:
    """Rasterise cloth triangles; returns rgb, metric depth and cloth mask.

    ``face_colors`` is a (2, 3) array of (top, bottom) RGB in [0, 1]; a
    triangle seen from below (flipped by a fold) shows the bottom colour.
    ``surface_lift`` raises the rendered surface by the cloth thickness so a
    flat towel reads closer than the table.
    """
    n = camera.image_size
    half = camera.view_size / 2.0
    mpp = camera.metres_per_pixel

    rgb = np.empty((n, n, 3), dtype=np.float64)
    rgb[:] = np.asarray(background)
    depth_from_cam = np.full((n, n), camera.height_above_table)
    mask = np.zeros((n, n), dtype=bool)

    # Continuous pixel coordinates of the particles: col = (x + half)/mpp -.5
    px = (positions[:, 0] + half) / mpp - 0.5
    py = (positions[:, 1] + half) / mpp - 0.5
    pz = positions[:, 2] + surface_lift

    for f in faces:
        xs = px[f]
        ys = py[f]
        zs = pz[f]
        # Signed area in pixel space; orientation picks the visible face.
        area2 = (xs[1] - xs[0]) * (ys[2] - ys[0]) - (xs[2] - xs[0]) * (ys[1] - ys[0])
        if abs(area2) < 1e-12:
            continue
        color = face_colors[0] if area2 > 0 else face_colors[1]

        c0 = int(np.floor(min(xs[0], xs[1], xs[2])))
        c1 = int(np.ceil(max(xs[0], xs[1], xs[2]))) + 1
        r0 = int(np.floor(min(ys[0], ys[1], ys[2])))
        r1 = int(np.ceil(max(ys[0], ys[1], ys[2]))) + 1
        c0, c1 = max(c0, 0), min(c1, n)
        r0, r1 = max(r0, 0), min(r1, n)
        if c0 >= c1 or r0 >= r1:
            continue

        cc, rr = np.meshgrid(np.arange(c0, c1), np.arange(r0, r1))
        w0 = (xs[1] - xs[0]) * (rr - ys[0]) - (ys[1] - ys[0]) * (cc - xs[0])
        w1 = (xs[2] - xs[1]) * (rr - ys[1]) - (ys[2] - ys[1]) * (cc - xs[1])
        w2 = (xs[0] - xs[2]) * (rr - ys[2]) - (ys[0] - ys[2]) * (cc - xs[2])
        if area2 > 0:
            inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        else:
            inside = (w0 <= 0) & (w1 <= 0) & (w2 <= 0)
        if not inside.any():
            continue
        # Barycentric depth interpolation.
        b0 = w1 / area2
        b1 = w2 / area2
        b2 = w0 / area2
        z = b0 * zs[0] + b1 * zs[1] + b2 * zs[2]
        d = camera.height_above_table - z

        sub_d = depth_from_cam[r0:r1, c0:c1]
        closer = inside & (d <= sub_d)
        if not closer.any():
            continue
        sub_d[closer] = d[closer]
        sub_rgb = rgb[r0:r1, c0:c1]
        sub_rgb[closer] = color
        mask[r0:r1, c0:c1][closer] = True

    rgb8 = np.clip(rgb * 255.0 + 0.5, 0, 255).astype(np.uint8)
    return RenderOut(rgb=rgb8, raw_depth=depth_from_cam, mask=mask)


def render_state(state, camera: Camera, rows: int, cols: int, background=BACKGROUND_COLOR):
    faces = build_faces(rows, cols)
    return render_topdown(state.positions, faces, camera, state.face_colors, background)
