"""Minibatch SGD-with-momentum training of the diffusion policy on
trajectory datasets, with right-angle augmentation applied at batch time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import (
    ActionNormalizer,
    N_AUGMENTS,
    augment_actions,
    augment_grid,
    channel_stats,
    pooled_features,
)
from .model import DiffusionPolicyModel, PolicyConfig


@dataclass
class TrainingSample:
    frames: np.ndarray  # (T_h, C, g, g) pooled, unnormalised
    actions: np.ndarray  # (T_p, 4) raw uv actions


def build_samples(trajectories, config: PolicyConfig) -> list[TrainingSample]:
    """Window each trajectory into (obs history, action sequence) pairs.

    Histories shorter than T_h repeat the first frame; action sequences
    running off the end repeat the last action.
    """
    if not trajectories:
        raise ValueError("empty dataset")
    t_h, t_p = config.obs_horizon, config.pred_horizon
    samples = []
    for traj in trajectories:
        obs = [pooled_features(o, config.channels) for o in traj.observations]
        acts = np.asarray(traj.actions, dtype=np.float64)[:, :4]
        n = len(obs)
        if n == 0:
            continue
        for t in range(n):
            hist = [obs[max(t - (t_h - 1) + i, 0)] for i in range(t_h)]
            seq = [acts[min(t + i, n - 1)] for i in range(t_p)]
            samples.append(
                TrainingSample(frames=np.stack(hist), actions=np.stack(seq))
            )
    if not samples:
        raise ValueError("dataset produced no training samples")
    return samples


def fit_stats(samples: list[TrainingSample], model: DiffusionPolicyModel) -> None:
    pooled = np.stack([s.frames[-1] for s in samples])
    mean, std = channel_stats(pooled)
    actions = np.concatenate([s.actions for s in samples])
    model.set_stats(ActionNormalizer.fit(actions), mean, std)


def train(
    trajectories,
    config: PolicyConfig,
    updates: int = 3000,
    seed: int = 0,
    model: DiffusionPolicyModel | None = None,
    augment: bool = True,
    log_every: int = 0,
) -> DiffusionPolicyModel:
    """Train a model (or continue training one) for ``updates`` steps.

    Deterministic given the seed stream: resuming from a checkpoint with the
    same stream continues the loss curve bitwise.
    """
    config = config.validate()
    samples = build_samples(trajectories, config)
    if model is None:
        model = DiffusionPolicyModel(config, seed=seed)
        fit_stats(samples, model)

    rng = np.random.default_rng([seed, 0x7247, model.updates])
    velocity_p = {k: np.zeros_like(v) for k, v in model.predictor.params.items()}
    velocity_e = {k: np.zeros_like(v) for k, v in model.encoder.params.items()}
    lr, mom, batch = config.learning_rate, config.momentum, config.batch_size

    for _ in range(updates):
        idx = rng.integers(0, len(samples), size=min(batch, len(samples)))
        frames = []
        actions = []
        for i in idx:
            s = samples[int(i)]
            if augment:
                aug = int(rng.integers(0, N_AUGMENTS))
                rot_k, flip = aug % 4, bool(aug // 4)
                frames.append(augment_grid(s.frames, rot_k, flip))
                actions.append(augment_actions(s.actions, rot_k, flip))
            else:
                frames.append(s.frames)
                actions.append(s.actions)
        f = model.normalize_frames(np.stack(frames))
        a = model.normalizer.normalize(np.stack(actions))
        loss, gp, ge = model.loss_and_grads(f, a, rng)
        for k, g in gp.items():
            velocity_p[k] = mom * velocity_p[k] - lr * g
            model.predictor.params[k] += velocity_p[k]
        for k, g in ge.items():
            velocity_e[k] = mom * velocity_e[k] - lr * g
            model.encoder.params[k] += velocity_e[k]
        model.updates += 1
        model.loss_history.append(loss)
        if log_every and model.updates % log_every == 0:
            recent = np.mean(model.loss_history[-log_every:])
            print(f"update {model.updates}: loss {recent:.4f}")
    return model
