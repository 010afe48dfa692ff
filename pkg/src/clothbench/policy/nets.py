"""Noise predictor and observation encoder with hand-derived gradients.

Desk-scale stand-ins for a convolutional stack: the action dimensionality
here (prediction horizon x 4) does not warrant hierarchy, so the predictor is
a tanh MLP over [flattened noisy actions, sinusoidal step embedding,
conditioning vector], and the encoder is one affine+tanh layer over pooled
image patches.  Backward passes are written out explicitly and are checked
against central finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np


def sinusoidal_embedding(k, dim: int) -> np.ndarray:
    """Standard sin/cos positional features of the denoising step index."""
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / max(half - 1, 1))
    ang = k[:, None] * freqs[None, :]
    out = np.concatenate([np.sin(ang), np.cos(ang)], axis=1)
    if out.shape[1] < dim:
        out = np.concatenate([out, np.zeros((out.shape[0], dim - out.shape[1]))], axis=1)
    return out


class MLPPredictor:
    """eps_theta(noisy actions, k, cond) as a two-hidden-layer tanh MLP."""

    def __init__(self, action_dim: int, cond_dim: int, hidden: int = 256,
                 emb_dim: int = 32, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(0)
        self.action_dim = action_dim
        self.cond_dim = cond_dim
        self.hidden = hidden
        self.emb_dim = emb_dim
        d_in = action_dim + emb_dim + cond_dim

        def glorot(n_out, n_in):
            scale = np.sqrt(6.0 / (n_in + n_out))
            return rng.uniform(-scale, scale, (n_out, n_in))

        self.params = {
            "w1": glorot(hidden, d_in),
            "b1": np.zeros(hidden),
            "w2": glorot(hidden, hidden),
            "b2": np.zeros(hidden),
            "w3": glorot(action_dim, hidden),
            "b3": np.zeros(action_dim),
        }
        self._cache = None

    # ------------------------------------------------------------ forward

    def _assemble(self, actions: np.ndarray, k, cond: np.ndarray) -> np.ndarray:
        flat = actions.reshape(actions.shape[0], -1) if actions.ndim > 2 else actions
        emb = sinusoidal_embedding(k, self.emb_dim)
        if emb.shape[0] == 1 and flat.shape[0] > 1:
            emb = np.repeat(emb, flat.shape[0], axis=0)
        c = cond if cond.ndim == 2 else cond[None, :]
        if c.shape[0] == 1 and flat.shape[0] > 1:
            c = np.repeat(c, flat.shape[0], axis=0)
        return np.concatenate([flat, emb, c], axis=1)

    def forward(self, actions: np.ndarray, k, cond: np.ndarray) -> np.ndarray:
        """Batched prediction over (B, action_dim) rows; caches activations
        for backward()."""
        x = self._assemble(np.atleast_2d(actions), k, cond)
        p = self.params
        h1 = np.tanh(x @ p["w1"].T + p["b1"])
        h2 = np.tanh(h1 @ p["w2"].T + p["b2"])
        out = h2 @ p["w3"].T + p["b3"]
        self._cache = (x, h1, h2)
        return out

    def eps(self, actions: np.ndarray, k, cond: np.ndarray) -> np.ndarray:
        """Noise prediction for one action sequence; shape preserved."""
        arr = np.asarray(actions, dtype=np.float64)
        out = self.forward(arr.reshape(1, -1), k, cond)
        return out.reshape(arr.shape)

    # ----------------------------------------------------------- backward

    def backward(self, d_out: np.ndarray):
        """Gradients of a scalar loss through the cached forward pass.

        Returns (param grads dict, gradient w.r.t. the conditioning input).
        """
        if self._cache is None:
            raise RuntimeError("forward() must run before backward()")
        x, h1, h2 = self._cache
        p = self.params
        d_out = np.atleast_2d(d_out)
        grads = {}
        grads["w3"] = d_out.T @ h2
        grads["b3"] = d_out.sum(axis=0)
        dh2 = (d_out @ p["w3"]) * (1.0 - h2 * h2)
        grads["w2"] = dh2.T @ h1
        grads["b2"] = dh2.sum(axis=0)
        dh1 = (dh2 @ p["w2"]) * (1.0 - h1 * h1)
        grads["w1"] = dh1.T @ x
        grads["b1"] = dh1.sum(axis=0)
        dx = dh1 @ p["w1"]
        d_cond = dx[:, self.action_dim + self.emb_dim :]
        return grads, d_cond


class ObsEncoder:
    """Affine + tanh layer over per-frame pooled image features; frame
    encodings are concatenated over the observation history."""

    def __init__(self, in_dim: int, feature_dim: int = 128,
                 rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng(1)
        scale = np.sqrt(6.0 / (in_dim + feature_dim))
        self.in_dim = in_dim
        self.feature_dim = feature_dim
        self.params = {
            "we": rng.uniform(-scale, scale, (feature_dim, in_dim)),
            "be": np.zeros(feature_dim),
        }
        self._cache = None

    def forward(self, frames: np.ndarray) -> np.ndarray:
        """frames: (B, T_h, in_dim) pooled features -> (B, T_h * feature_dim)."""
        b, t_h, _ = frames.shape
        flat = frames.reshape(b * t_h, self.in_dim)
        h = np.tanh(flat @ self.params["we"].T + self.params["be"])
        self._cache = (flat, h, b, t_h)
        return h.reshape(b, t_h * self.feature_dim)

    def backward(self, d_eg: np.ndarray):
        flat, h, b, t_h = self._cache
        d_h = d_eg.reshape(b * t_h, self.feature_dim) * (1.0 - h * h)
        grads = {
            "we": d_h.T @ flat,
            "be": d_h.sum(axis=0),
        }
        return grads


def pack_params(*param_dicts) -> np.ndarray:
    return np.concatenate([p[k].ravel() for p in param_dicts for k in sorted(p)])


def unpack_params(vector: np.ndarray, *param_dicts) -> None:
    offset = 0
    for p in param_dicts:
        for k in sorted(p):
            n = p[k].size
            p[k] = vector[offset : offset + n].reshape(p[k].shape).copy()
            offset += n
    if offset != vector.size:
        raise ValueError("parameter vector size mismatch")
