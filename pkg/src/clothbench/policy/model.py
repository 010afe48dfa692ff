"""The trainable pick-and-place diffusion model: predictor + encoder +
schedule + normalisation statistics, with loss/gradient evaluation and full
reverse-chain sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import ActionNormalizer, channel_count, POOL_GRID
from .nets import MLPPredictor, ObsEncoder, pack_params, unpack_params
from .schedule import DiffusionSchedule, forward_noise, make_square_cosine_schedule, sample_actions


@dataclass(frozen=True)
class PolicyConfig:
    pred_horizon: int = 4  # T_p
    obs_horizon: int = 2  # T_h
    act_horizon: int = 1  # T_a, executed prefix of the prediction
    n_diffusion_steps: int = 100  # K
    feature_dim: int = 128
    hidden: int = 256
    emb_dim: int = 32
    channels: str = "rgbd"
    learning_rate: float = 3e-3
    momentum: float = 0.9
    batch_size: int = 32

    def validate(self) -> "PolicyConfig":
        if not 1 <= self.obs_horizon <= self.pred_horizon:
            raise ValueError("need 1 <= obs_horizon <= pred_horizon")
        if not 1 <= self.act_horizon <= self.pred_horizon:
            raise ValueError("need 1 <= act_horizon <= pred_horizon")
        if self.n_diffusion_steps < 2:
            raise ValueError("need at least 2 diffusion steps")
        return self

    @property
    def action_dim(self) -> int:
        return 4 * self.pred_horizon

    @property
    def pooled_dim(self) -> int:
        return channel_count(self.channels) * POOL_GRID * POOL_GRID

    @property
    def cond_dim(self) -> int:
        return self.feature_dim * self.obs_horizon


class DiffusionPolicyModel:
    """Predictor, encoder and dataset statistics bundled for training and
    inference.  Deterministic given the seeds fed to its methods."""

    def __init__(self, config: PolicyConfig, seed: int = 0):
        self.config = config.validate()
        rng = np.random.default_rng([seed, 0x9E])
        self.predictor = MLPPredictor(
            action_dim=config.action_dim,
            cond_dim=config.cond_dim,
            hidden=config.hidden,
            emb_dim=config.emb_dim,
            rng=rng,
        )
        self.encoder = ObsEncoder(config.pooled_dim, config.feature_dim, rng=rng)
        self.schedule: DiffusionSchedule = make_square_cosine_schedule(
            config.n_diffusion_steps
        )
        self.normalizer: ActionNormalizer | None = None
        self.image_mean: np.ndarray | None = None
        self.image_std: np.ndarray | None = None
        self.updates = 0
        self.seed = seed
        self.loss_history: list[float] = []

    # --------------------------------------------------------- statistics

    def set_stats(self, normalizer: ActionNormalizer, image_mean, image_std):
        self.normalizer = normalizer
        self.image_mean = np.asarray(image_mean, dtype=np.float64)
        self.image_std = np.asarray(image_std, dtype=np.float64)

    def normalize_frames(self, frames: np.ndarray) -> np.ndarray:
        """(..., C, g, g) pooled frames -> normalised."""
        return (frames - self.image_mean[:, None, None]) / self.image_std[:, None, None]

    # --------------------------------------------------------------- loss

    def loss_and_grads(self, frames: np.ndarray, actions0: np.ndarray,
                       rng: np.random.Generator):
        """Denoising loss over a batch with exact parameter gradients.

        frames: (B, T_h, C, g, g) normalised pooled observations.
        actions0: (B, T_p, 4) normalised to [-1, 1].
        Returns (loss value, predictor grads, encoder grads).
        """
        b = actions0.shape[0]
        flat0 = actions0.reshape(b, -1)
        k = rng.integers(1, self.schedule.n_steps + 1, size=b)
        eps = rng.standard_normal(flat0.shape)
        noisy = forward_noise(flat0, k, eps, self.schedule)

        enc_in = frames.reshape(b, self.config.obs_horizon, -1)
        cond = self.encoder.forward(enc_in)
        pred = self.predictor.forward(noisy, k, cond)

        diff = pred - eps
        loss = float(np.sum(diff * diff) / b)
        d_pred = 2.0 * diff / b
        pred_grads, d_cond = self.predictor.backward(d_pred)
        enc_grads = self.encoder.backward(d_cond)
        return loss, pred_grads, enc_grads

    # ------------------------------------------------------------ sampling

    def encode(self, frames: np.ndarray) -> np.ndarray:
        """(T_h, C, g, g) normalised pooled frames -> conditioning vector."""
        out = self.encoder.forward(frames[None, ...].reshape(1, frames.shape[0], -1))
        return out[0]

    def sample(self, frames: np.ndarray, rng: np.random.Generator,
               record_steps: bool = False):
        """Sample an action sequence for one observation history.

        Returns (T_p, 4) actions in [0, 1] uv space; with ``record_steps``
        also the intermediate denoising trail (denormalised, clamped).
        """
        cond = self.encode(frames)
        shape = (1, self.config.action_dim)
        out = sample_actions(
            cond, self.schedule, self.predictor, rng, shape, record_steps
        )
        if record_steps:
            normed, trail = out
            decoded = [self._decode(t) for t in trail]
            return self._decode(normed), decoded
        return self._decode(out)

    def _decode(self, normed_flat: np.ndarray) -> np.ndarray:
        seq = normed_flat.reshape(self.config.pred_horizon, 4)
        raw = self.normalizer.denormalize(seq)
        return np.clip(raw, 0.0, 1.0)

    # ------------------------------------------------------ (de)serialise

    def param_vector(self) -> np.ndarray:
        return pack_params(self.predictor.params, self.encoder.params)

    def set_param_vector(self, vec: np.ndarray) -> None:
        unpack_params(vec, self.predictor.params, self.encoder.params)
