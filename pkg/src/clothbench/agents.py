"""Policy wrappers sharing one interface: reset(seed) and step(env) -> action
or None when the policy declares the episode finished.

Oracles read the ground-truth state through the env; the learned agent and
the random baseline only consume rendered observations.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .oracles.folding import FoldPolicy, FoldTask
from .oracles.smoothing import GreedyCornerSmoother, TwoPhaseSmoother
from .policy.features import pooled_features
from .sim.env import PickPlaceAction


class OracleSmoothingAgent:
    """Ground-truth smoothing oracle (two-phase robust or greedy legacy)."""

    def __init__(self, params, camera, variant: str = "two-phase"):
        if variant == "two-phase":
            self.oracle = TwoPhaseSmoother(params, camera)
        elif variant == "greedy":
            self.oracle = GreedyCornerSmoother(params, camera)
        else:
            raise ValueError(f"unknown smoothing oracle variant: {variant}")
        self.variant = variant

    def reset(self, seed: int = 0) -> None:
        self.oracle.reset()

    def step(self, env) -> PickPlaceAction | None:
        return self.oracle.step(env)

    @property
    def last_rule(self):
        return self.oracle.last_rule


class OracleFoldAgent:
    def __init__(self, task: FoldTask):
        self.policy = FoldPolicy(task)

    def reset(self, seed: int = 0) -> None:
        self.policy.reset()

    def step(self, env) -> PickPlaceAction | None:
        return self.policy.step(env)

    def final_goal(self, env):
        return self.policy.final_goal(env)


class RandomAgent:
    """Uniform pick/place in the unit square; the baseline floor."""

    def __init__(self):
        self.rng = np.random.default_rng(0)

    def reset(self, seed: int = 0) -> None:
        self.rng = np.random.default_rng([seed, 0xA4D])

    def step(self, env) -> PickPlaceAction | None:
        u = self.rng.uniform(0.0, 1.0, 4)
        return PickPlaceAction((u[0], u[1]), (u[2], u[3]))


class DiffusionAgent:
    """Runs a trained model: keeps the observation history, replans every
    act_horizon steps, executes the predicted prefix."""

    def __init__(self, model):
        self.model = model
        self.history: deque = deque(maxlen=model.config.obs_horizon)
        self.queue: list[np.ndarray] = []
        self.rng = np.random.default_rng(0)
        self.last_trail = None

    def reset(self, seed: int = 0) -> None:
        self.history.clear()
        self.queue = []
        self.rng = np.random.default_rng([seed, 0xD1F])
        self.last_trail = None

    def _frames(self) -> np.ndarray:
        t_h = self.model.config.obs_horizon
        frames = list(self.history)
        while len(frames) < t_h:
            frames.insert(0, frames[0])
        return self.model.normalize_frames(np.stack(frames))

    def step(self, env) -> PickPlaceAction | None:
        obs = env.observe()
        self.history.append(pooled_features(obs, self.model.config.channels))
        if not self.queue:
            seq, trail = self.model.sample(self._frames(), self.rng, record_steps=True)
            self.last_trail = trail
            t_a = self.model.config.act_horizon
            self.queue = [seq[i] for i in range(t_a)]
        a = self.queue.pop(0)
        return PickPlaceAction((float(a[0]), float(a[1])), (float(a[2]), float(a[3])))


def make_agent(kind: str, env_spec, task: str | None = None, model=None):
    """Agent factory used by the CLI and the evaluation harness."""
    if kind == "oracle":
        if task in (None, "flatten"):
            return OracleSmoothingAgent(env_spec.cloth, env_spec.camera, "two-phase")
        return OracleFoldAgent(FoldTask(task))
    if kind == "oracle-legacy":
        if task not in (None, "flatten"):
            raise ValueError("the legacy oracle only smooths")
        return OracleSmoothingAgent(env_spec.cloth, env_spec.camera, "greedy")
    if kind == "random":
        return RandomAgent()
    if kind == "checkpoint":
        if model is None:
            raise ValueError("checkpoint agent needs a loaded model")
        return DiffusionAgent(model)
    raise ValueError(f"unknown policy kind: {kind}")
