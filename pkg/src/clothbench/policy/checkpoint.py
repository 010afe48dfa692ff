"""Checkpoint file format: one line of UTF-8 JSON (architecture, schedule,
normaliser statistics, horizons, seed, update count) terminated by a newline,
followed by the packed parameter vector as little-endian IEEE-754 float32."""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .features import ActionNormalizer
from .model import DiffusionPolicyModel, PolicyConfig

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(model: DiffusionPolicyModel, path) -> None:
    if model.normalizer is None:
        raise CheckpointError("model has no fitted statistics")
    header = {
        "format_version": FORMAT_VERSION,
        "config": dataclasses.asdict(model.config),
        "normalizer": {
            "lo": model.normalizer.lo.tolist(),
            "hi": model.normalizer.hi.tolist(),
        },
        "image_mean": model.image_mean.tolist(),
        "image_std": model.image_std.tolist(),
        "seed": model.seed,
        "updates": model.updates,
        "n_params": int(model.param_vector().size),
    }
    blob = model.param_vector().astype("<f4").tobytes()
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        f.write(blob)


def load_checkpoint(path) -> DiffusionPolicyModel:
    with open(path, "rb") as f:
        raw = f.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise CheckpointError("missing header terminator")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"bad header: {e}") from e
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported format version {header.get('format_version')}"
        )
    params = np.frombuffer(raw[nl + 1 :], dtype="<f4").astype(np.float64)
    if params.size != header["n_params"]:
        raise CheckpointError(
            f"parameter blob has {params.size} floats, header says {header['n_params']}"
        )
    config = PolicyConfig(**header["config"])
    model = DiffusionPolicyModel(config, seed=header["seed"])
    model.set_param_vector(params)
    model.set_stats(
        ActionNormalizer(
            np.asarray(header["normalizer"]["lo"]),
            np.asarray(header["normalizer"]["hi"]),
        ),
        np.asarray(header["image_mean"]),
        np.asarray(header["image_std"]),
    )
    model.updates = header["updates"]
    return model
