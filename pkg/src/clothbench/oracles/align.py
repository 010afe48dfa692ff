"""Closed-form 2-D rigid registration (rotation + translation).

Particle correspondences are known in simulation, so aligning the flat
reference grid onto the current cloth is plain orthogonal Procrustes with the
reflection branch suppressed.
"""

from __future__ import annotations

import numpy as np


def rigid_align(reference_xy: np.ndarray, current_xy: np.ndarray):
    """Rotation matrix R and translation t minimising
    ||current - (R @ reference + t)|| over correspondences.

    Returns (R, t); apply with ``xy @ R.T + t``.
    """
    ref = np.asarray(reference_xy, dtype=float)
    cur = np.asarray(current_xy, dtype=float)
    mu_r = ref.mean(axis=0)
    mu_c = cur.mean(axis=0)
    h = (ref - mu_r).T @ (cur - mu_c)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    flip = np.diag([1.0, d if d != 0 else 1.0])
    rot = vt.T @ flip @ u.T
    t = mu_c - rot @ mu_r
    return rot, t


def apply_align(rot: np.ndarray, t: np.ndarray, xy: np.ndarray) -> np.ndarray:
    return np.asarray(xy) @ rot.T + t
