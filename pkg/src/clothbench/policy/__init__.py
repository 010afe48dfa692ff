from .features import (
    ActionNormalizer,
    augment_actions,
    augment_grid,
    augment_uv,
    channel_stats,
    obs_channels,
    pool_grid,
    pooled_features,
)
from .model import DiffusionPolicyModel, PolicyConfig
from .nets import MLPPredictor, ObsEncoder, pack_params, sinusoidal_embedding, unpack_params
from .schedule import (
    DiffusionSchedule,
    forward_noise,
    make_square_cosine_schedule,
    reverse_step,
    sample_actions,
)
from .train import TrainingSample, build_samples, fit_stats, train
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "ActionNormalizer",
    "CheckpointError",
    "DiffusionPolicyModel",
    "DiffusionSchedule",
    "MLPPredictor",
    "ObsEncoder",
    "PolicyConfig",
    "TrainingSample",
    "augment_actions",
    "augment_grid",
    "augment_uv",
    "build_samples",
    "channel_stats",
    "fit_stats",
    "forward_noise",
    "load_checkpoint",
    "make_square_cosine_schedule",
    "obs_channels",
    "pack_params",
    "pool_grid",
    "pooled_features",
    "reverse_step",
    "sample_actions",
    "save_checkpoint",
    "sinusoidal_embedding",
    "train",
    "unpack_params",
]
