"""Colour utilities and HSV domain randomisation for rendering."""

from __future__ import annotations

import colorsys

import numpy as np


def rgb_to_hue(img: np.ndarray) -> np.ndarray:
    """Hue channel in [0, 1) of an (..., 3) float RGB array."""
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn
    hue = np.zeros_like(mx)
    nz = delta > 1e-12
    rmax = nz & (mx == r)
    gmax = nz & (mx == g) & ~rmax
    bmax = nz & ~rmax & ~gmax
    hue[rmax] = ((g - b)[rmax] / delta[rmax]) % 6.0
    hue[gmax] = (b - r)[gmax] / delta[gmax] + 2.0
    hue[bmax] = (r - g)[bmax] / delta[bmax] + 4.0
    return hue / 6.0


def hue_distance(h1: float, h2: float) -> float:
    d = abs(h1 - h2) % 1.0
    return min(d, 1.0 - d)


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[float, float, float]:
    return colorsys.hsv_to_rgb(h % 1.0, s, v)


def domain_randomize(cfg, rng: np.random.Generator, max_tries: int = 64):
    """Sample fabric and background colours from the configured HSV ranges,
    rejection-sampling until the hue separation constraint holds.

    Returns (fabric_rgb, background_rgb) as float triples in [0, 1].
    Deterministic per rng stream.
    """

    def sample(lo_hi):
        lo, hi = lo_hi
        return float(rng.uniform(lo, hi))

    fab_h = sample(cfg.fabric_hue)
    fab = (fab_h, sample(cfg.fabric_sat), sample(cfg.fabric_val))
    for _ in range(max_tries):
        bg_h = sample(cfg.background_hue)
        if hue_distance(fab_h, bg_h) >= cfg.min_hue_separation:
            break
    else:
        # Constraint unreachable by sampling: shift deterministically.
        bg_h = (fab_h + 0.5) % 1.0
        lo, hi = cfg.background_hue
        if not (lo <= bg_h <= hi):
            bg_h = min(max(bg_h, lo), hi)
    bg = (bg_h, sample(cfg.background_sat), sample(cfg.background_val))
    return hsv_to_rgb(*fab), hsv_to_rgb(*bg)
