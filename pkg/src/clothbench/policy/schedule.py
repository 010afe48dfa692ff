"""Denoising schedule and the forward/reverse diffusion steps.

The square-cosine beta schedule (offset s = 0.008) defines cumulative signal
levels alpha_bar; betas are clipped at 0.999 and alpha_bar is then rebuilt
from their product so the algebraic identity alpha_bar_k = prod(1 - beta_t)
holds exactly.  Sigma uses the posterior-variance convention with sigma_1 = 0
at the final reverse step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COSINE_OFFSET = 0.008
BETA_CLIP = 0.999


@dataclass(frozen=True)
class DiffusionSchedule:
    """Arrays are indexed by denoising step k = 1..K at position k-1."""

    beta: np.ndarray
    alpha_bar: np.ndarray
    sigma: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.beta.size

    def alpha_bar_at(self, k) -> np.ndarray:
        """alpha_bar for (arrays of) step indices k in [1, K]."""
        return self.alpha_bar[np.asarray(k) - 1]


def make_square_cosine_schedule(n_steps: int) -> DiffusionSchedule:
    if n_steps < 2:
        raise ValueError("schedule needs at least 2 steps")
    k = np.arange(n_steps + 1, dtype=np.float64)
    f = np.cos(((k / n_steps + COSINE_OFFSET) / (1.0 + COSINE_OFFSET)) * np.pi / 2.0) ** 2
    alpha_bar_raw = f / f[0]
    beta = 1.0 - alpha_bar_raw[1:] / alpha_bar_raw[:-1]
    beta = np.clip(beta, 0.0, BETA_CLIP)
    alpha_bar = np.cumprod(1.0 - beta)
    prev = np.concatenate([[1.0], alpha_bar[:-1]])
    sigma2 = (1.0 - prev) / (1.0 - alpha_bar) * beta
    sigma = np.sqrt(sigma2)
    return DiffusionSchedule(beta=beta, alpha_bar=alpha_bar, sigma=sigma)


def forward_noise(actions0: np.ndarray, k, eps: np.ndarray, sched: DiffusionSchedule):
    """Noisy actions at step k: sqrt(ab) * A0 + sqrt(1 - ab) * eps."""
    ab = sched.alpha_bar_at(k)
    ab = np.asarray(ab, dtype=np.float64)
    while ab.ndim < actions0.ndim:
        ab = ab[..., None]
    return np.sqrt(ab) * actions0 + np.sqrt(1.0 - ab) * eps


def reverse_step(
    actions_k: np.ndarray,
    k: int,
    cond: np.ndarray,
    predictor,
    sched: DiffusionSchedule,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """One denoising step k -> k-1.

    actions_{k-1} = (actions_k - beta_k / sqrt(1-ab_k) * eps_hat)
                    / sqrt(1-beta_k)  +  sigma_k * noise
    with sigma_1 = 0 (no noise injected at the last step).
    """
    if not 1 <= k <= sched.n_steps:
        raise ValueError(f"step k={k} outside [1, {sched.n_steps}]")
    beta = sched.beta[k - 1]
    ab = sched.alpha_bar[k - 1]
    eps_hat = predictor.eps(actions_k, k, cond)
    mean = (actions_k - beta / np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(1.0 - beta)
    sigma = sched.sigma[k - 1]
    if sigma > 0.0:
        if rng is None:
            raise ValueError("reverse_step needs an rng when sigma > 0")
        return mean + sigma * rng.standard_normal(actions_k.shape)
    return mean


def sample_actions(
    cond: np.ndarray,
    sched: DiffusionSchedule,
    predictor,
    rng: np.random.Generator,
    shape: tuple,
    record_steps: bool = False,
):
    """Full K-step reverse sampling from a standard-normal start.

    Returns the denoised (still normalised) action array; with
    ``record_steps`` also the list of intermediate arrays, latest last,
    for denoising-trajectory visualisation.
    """
    actions = rng.standard_normal(shape)
    trail = [actions.copy()] if record_steps else None
    for k in range(sched.n_steps, 0, -1):
        actions = reverse_step(actions, k, cond, predictor, sched, rng)
        if record_steps:
            trail.append(actions.copy())
    if record_steps:
        return actions, trail
    return actions
