"""Trajectory files: one directory per episode with meta.json + steps.bin.

steps.bin layout, little-endian, per step:
    u32   step index
    u8[H*W*3]        rgb
    f32[H*W]         processed depth
    u8[ceil(H*W/8)]  mask bitset (row-major, MSB-first within a byte)
    f32[5]           action: pick_u, pick_v, place_u, place_v, orientation
    u8               grasp outcome code
    f32[2]           metrics: nc, iou (iou = -1 when no goal is set)

meta.json declares the format version, image size, step count, seed, config
hash, oracle/task names, success flag and the NC trace; sha256 checksums live
in the dataset manifest.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..sim.grasp import CODE_TO_KIND, OUTCOME_CODES, GraspKind
from ..vision.observe import Observation

FORMAT_VERSION = 1


class TrajectoryError(RuntimeError):
    pass


class TruncatedFileError(TrajectoryError):
    pass


class ChecksumError(TrajectoryError):
    pass


class VersionError(TrajectoryError):
    pass


@dataclass
class TrajectoryStep:
    observation: Observation
    action: np.ndarray  # (5,) pick_u, pick_v, place_u, place_v, orientation
    outcome: GraspKind
    nc: float
    iou: float | None = None


@dataclass
class Trajectory:
    steps: list[TrajectoryStep]
    seed: int = 0
    config_hash: str = ""
    oracle: str = ""
    task: str = ""
    success: bool = False
    nc0: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def observations(self):
        return [s.observation for s in self.steps]

    @property
    def actions(self) -> np.ndarray:
        return np.stack([s.action for s in self.steps])


def _pack_mask(mask: np.ndarray) -> bytes:
    return np.packbits(mask.astype(np.uint8), axis=None).tobytes()


def _unpack_mask(raw: bytes, h: int, w: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=h * w)
    return bits.reshape(h, w).astype(bool)


def write_trajectory(traj: Trajectory, path) -> None:
    """Write meta.json + steps.bin into the directory ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if traj.length == 0:
        raise TrajectoryError("trajectory must have at least one step")
    h, w = traj.steps[0].observation.rgb.shape[:2]
    buf = bytearray()
    for i, step in enumerate(traj.steps):
        obs = step.observation
        if obs.rgb.shape[:2] != (h, w):
            raise TrajectoryError("inconsistent image sizes within trajectory")
        buf += struct.pack("<I", i)
        buf += obs.rgb.astype(np.uint8).tobytes()
        buf += obs.depth.astype("<f4").tobytes()
        buf += _pack_mask(obs.mask)
        action = np.asarray(step.action, dtype=np.float64).ravel()
        if action.size != 5:
            raise TrajectoryError("action must have 5 components")
        buf += action.astype("<f4").tobytes()
        buf += struct.pack("<B", OUTCOME_CODES[step.outcome])
        iou = -1.0 if step.iou is None else float(step.iou)
        buf += np.asarray([step.nc, iou], dtype="<f4").tobytes()
    (path / "steps.bin").write_bytes(bytes(buf))
    meta = {
        "format_version": FORMAT_VERSION,
        "height": h,
        "width": w,
        "steps": traj.length,
        "seed": traj.seed,
        "config_hash": traj.config_hash,
        "oracle": traj.oracle,
        "task": traj.task,
        "success": traj.success,
        "nc0": traj.nc0,
        "extra": traj.extra,
    }
    (path / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=1))


def _step_nbytes(h: int, w: int) -> int:
    return 4 + h * w * 3 + h * w * 4 + (h * w + 7) // 8 + 5 * 4 + 1 + 2 * 4


def read_trajectory(path) -> Trajectory:
    path = Path(path)
    meta_path = path / "meta.json"
    bin_path = path / "steps.bin"
    if not meta_path.exists() or not bin_path.exists():
        raise TrajectoryError(f"not a trajectory directory: {path}")
    meta = json.loads(meta_path.read_text())
    if meta.get("format_version") != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {meta.get('format_version')}")
    h, w, n = meta["height"], meta["width"], meta["steps"]
    raw = bin_path.read_bytes()
    step_size = _step_nbytes(h, w)
    if len(raw) != n * step_size:
        raise TruncatedFileError(
            f"steps.bin is {len(raw)} bytes, expected {n * step_size}"
        )
    steps = []
    off = 0
    mask_bytes = (h * w + 7) // 8
    for i in range(n):
        (idx,) = struct.unpack_from("<I", raw, off)
        off += 4
        if idx != i:
            raise TrajectoryError(f"step index mismatch at {i}")
        rgb = np.frombuffer(raw, dtype=np.uint8, count=h * w * 3, offset=off).reshape(
            h, w, 3
        ).copy()
        off += h * w * 3
        depth = (
            np.frombuffer(raw, dtype="<f4", count=h * w, offset=off)
            .reshape(h, w)
            .astype(np.float64)
        )
        off += h * w * 4
        mask = _unpack_mask(raw[off : off + mask_bytes], h, w)
        off += mask_bytes
        action = np.frombuffer(raw, dtype="<f4", count=5, offset=off).astype(np.float64)
        off += 20
        code = raw[off]
        off += 1
        nc, iou = np.frombuffer(raw, dtype="<f4", count=2, offset=off).astype(np.float64)
        off += 8
        steps.append(
            TrajectoryStep(
                observation=Observation(
                    rgb=rgb, depth=depth, mask=mask, raw_depth=depth.copy()
                ),
                action=action,
                outcome=CODE_TO_KIND[int(code)],
                nc=float(nc),
                iou=None if iou < 0 else float(iou),
            )
        )
    return Trajectory(
        steps=steps,
        seed=meta["seed"],
        config_hash=meta["config_hash"],
        oracle=meta["oracle"],
        task=meta["task"],
        success=meta["success"],
        nc0=meta["nc0"],
        extra=meta.get("extra", {}),
    )


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
