"""Projected-silhouette geometry shared by metrics and goal construction.

Coverage is computed from the exact union of the cloth's projected surface
triangles rather than from a rasterised mask, so the tight flattening
thresholds (NC >= 0.99) are not subject to pixel-phase noise.
"""

from __future__ import annotations

import numpy as np
import shapely
from shapely.geometry import Polygon
from shapely.ops import unary_union


def build_faces(rows: int, cols: int) -> np.ndarray:
    """Triangulate the particle grid into (n_faces, 3) index triples."""
    idx = np.arange(rows * cols).reshape(rows, cols)
    a = idx[:-1, :-1].ravel()
    b = idx[:-1, 1:].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[1:, :-1].ravel()
    t1 = np.stack([a, b, c], axis=1)
    t2 = np.stack([a, c, d], axis=1)
    return np.concatenate([t1, t2])


def silhouette(positions: np.ndarray, faces: np.ndarray):
    """Union polygon of the cloth's triangles projected onto the table."""
    xy = positions[:, :2]
    tris = []
    for f in faces:
        p = xy[f]
        # Degenerate (near-vertical) triangles contribute nothing.
        area2 = abs(
            (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1])
            - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1])
        )
        if area2 < 1e-12:
            continue
        tris.append(Polygon(p))
    if not tris:
        return Polygon()
    merged = unary_union(tris)
    if not merged.is_valid:
        merged = shapely.make_valid(merged)
    return merged


def projected_area(positions: np.ndarray, faces: np.ndarray) -> float:
    return float(silhouette(positions, faces).area)


def polygon_mask(geom, camera) -> np.ndarray:
    """Rasterise a shapely geometry to a boolean image (pixel-centre test)."""
    n = camera.image_size
    half = camera.view_size / 2.0
    mpp = camera.metres_per_pixel
    centers = -half + (np.arange(n) + 0.5) * mpp
    xx, yy = np.meshgrid(centers, centers)  # yy: rows (world y), xx: cols
    flags = shapely.contains_xy(geom, xx.ravel(), yy.ravel())
    return flags.reshape(n, n)


def geometry_iou(a, b) -> float:
    """Exact intersection-over-union of two shapely geometries."""
    if a.is_empty and b.is_empty:
        return 1.0
    inter = a.intersection(b).area
    union = a.union(b).area
    if union <= 0:
        return 0.0
    return float(inter / union)
