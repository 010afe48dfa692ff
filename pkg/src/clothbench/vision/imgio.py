"""PNG export helpers for debugging and replay artifacts.

RGB and masks are written as 8-bit PNG; depth as 16-bit PNG with unit-interval
values scaled by 65535.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image


def rgb_png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def mask_png_bytes(mask: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray((mask.astype(np.uint8) * 255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def depth_png_bytes(depth: np.ndarray) -> bytes:
    scaled = np.clip(depth, 0.0, 1.0) * 65535.0
    arr = scaled.astype(np.uint16)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="I;16").save(buf, format="PNG")
    return buf.getvalue()


def save_rgb(path, rgb: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(rgb_png_bytes(rgb))


def save_mask(path, mask: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(mask_png_bytes(mask))


def save_depth(path, depth: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(depth_png_bytes(depth))


def load_rgb(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"))
