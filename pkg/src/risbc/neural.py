"""Minimal dense network with analytic backprop, Adam, and a replay buffer.

Everything the two Q-agents need, in plain numpy float64:

* :class:`Mlp` - affine layers with ReLU on hidden layers and a linear
  output head (Q-values), mean-squared-error loss with optional output
  masking, exact analytic gradients, bias-corrected Adam updates.
* :class:`ReplayBuffer` - fixed-capacity FIFO ring sampled uniformly
  with replacement.

Weight matrix ``weights[i]`` has shape (layer_dims[i], layer_dims[i+1])
and acts as ``x @ W + b``; checkpoints store each matrix flattened in
row-major (C) order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def _he_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    # He initialization (uniform variant), scaled by fan-in for ReLU nets.
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Mlp:
    """Dense feed-forward network plus its Adam optimizer state."""

    def __init__(
        self,
        layer_dims: list[int],
        rng: np.random.Generator,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        if len(layer_dims) < 2 or any(int(d) < 1 for d in layer_dims):
            raise ValueError(f"layer_dims must be >= 2 positive sizes, got {layer_dims}")
        self.layer_dims = [int(d) for d in layer_dims]
        self.weights = [
            _he_uniform(rng, self.layer_dims[i], self.layer_dims[i + 1])
            for i in range(len(self.layer_dims) - 1)
        ]
        self.biases = [np.zeros(d) for d in self.layer_dims[1:]]
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.m_weights = [np.zeros_like(w) for w in self.weights]
        self.v_weights = [np.zeros_like(w) for w in self.weights]
        self.m_biases = [np.zeros_like(b) for b in self.biases]
        self.v_biases = [np.zeros_like(b) for b in self.biases]

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def _forward_cached(self, x: np.ndarray):
        """Batched forward pass keeping pre/post activations for backprop."""
        activations = [x]
        a = x
        n_layers = len(self.weights)
        pre = []
        for i in range(n_layers):
            z = a @ self.weights[i] + self.biases[i]
            pre.append(z)
            a = np.maximum(z, 0.0) if i < n_layers - 1 else z
            activations.append(a)
        return activations, pre

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the network; accepts a single vector or a (n, in) batch."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = x[None, :] if single else x
        if x2.shape[1] != self.input_dim:
            raise ValueError(f"input width {x2.shape[1]} != expected {self.input_dim}")
        out = self._forward_cached(x2)[0][-1]
        return out[0] if single else out

    def backward_mse(self, x: np.ndarray, target: np.ndarray, mask=None):
        """MSE loss and exact gradients, optionally masked to chosen outputs.

        Args:
            x: input vector or (n, in) batch.
            target: regression targets. Unmasked, shape (out,) / (n, out);
                masked, one target per masked entry, shape matching mask.
            mask: None for all outputs, or integer output indices of shape
                (), (m,), (n,), or (n, m); gradients flow only through the
                selected outputs.

        Returns:
            (grads, loss) where grads is a dict with per-layer lists
            ``weights`` and ``biases`` shaped like the parameters.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = x[None, :] if single else x
        if x2.shape[1] != self.input_dim:
            raise ValueError(f"input width {x2.shape[1]} != expected {self.input_dim}")
        n = x2.shape[0]

        activations, pre = self._forward_cached(x2)
        y = activations[-1]

        target = np.asarray(target, dtype=float)
        delta = np.zeros_like(y)
        if mask is None:
            t2 = target[None, :] if single else target
            if t2.shape != y.shape:
                raise ValueError(f"target shape {t2.shape} != output shape {y.shape}")
            diff = y - t2
            loss = float(np.mean(diff**2))
            delta[:] = 2.0 * diff / diff.size
        else:
            mask = np.asarray(mask, dtype=np.int64)
            if mask.ndim == 0:
                mask = mask[None]
            if mask.ndim == 1:
                # one row of indices for a single input, one index per row otherwise
                mask = mask[None, :] if single else mask[:, None]
            if mask.shape[0] != n:
                raise ValueError(f"mask rows {mask.shape[0]} != batch size {n}")
            if np.any(mask < 0) or np.any(mask >= self.output_dim):
                raise ValueError("mask indices out of output range")
            t2 = np.broadcast_to(np.atleast_1d(target).reshape(n, -1), mask.shape)
            rows = np.arange(n)[:, None]
            diff = y[rows, mask] - t2
            loss = float(np.mean(diff**2))
            np.add.at(delta, (rows, mask), 2.0 * diff / diff.size)

        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = activations[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (pre[i - 1] > 0.0)
        return {"weights": grads_w, "biases": grads_b}, loss

    def adam_step(self, grads: dict) -> None:
        """One bias-corrected Adam update; increments the step counter."""
        gw, gb = grads["weights"], grads["biases"]
        if len(gw) != len(self.weights) or len(gb) != len(self.biases):
            raise ValueError("gradient structure does not match network layout")
        for g, w in zip(gw, self.weights):
            if g.shape != w.shape:
                raise ValueError(f"weight grad shape {g.shape} != {w.shape}")
        for g, b in zip(gb, self.biases):
            if g.shape != b.shape:
                raise ValueError(f"bias grad shape {g.shape} != {b.shape}")
        self.step_count += 1
        t = self.step_count
        corr1 = 1.0 - self.beta1**t
        corr2 = 1.0 - self.beta2**t
        for params, grads_l, m_l, v_l in (
            (self.weights, gw, self.m_weights, self.v_weights),
            (self.biases, gb, self.m_biases, self.v_biases),
        ):
            for i, g in enumerate(grads_l):
                m_l[i] *= self.beta1
                m_l[i] += (1.0 - self.beta1) * g
                v_l[i] *= self.beta2
                v_l[i] += (1.0 - self.beta2) * g * g
                params[i] -= self.learning_rate * (m_l[i] / corr1) / (
                    np.sqrt(v_l[i] / corr2) + self.epsilon
                )

    def to_dict(self) -> dict:
        """Checkpoint as JSON-ready dict; float64 round-trips exactly."""
        return {
            "layer_dims": list(self.layer_dims),
            "weights": [w.reshape(-1).tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "adam": {
                "learning_rate": self.learning_rate,
                "beta1": self.beta1,
                "beta2": self.beta2,
                "epsilon": self.epsilon,
                "step_count": self.step_count,
                "m_weights": [m.reshape(-1).tolist() for m in self.m_weights],
                "v_weights": [v.reshape(-1).tolist() for v in self.v_weights],
                "m_biases": [m.tolist() for m in self.m_biases],
                "v_biases": [v.tolist() for v in self.v_biases],
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Mlp":
        dims = [int(d) for d in data["layer_dims"]]
        net = cls.__new__(cls)
        net.layer_dims = dims
        shapes = [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]
        net.weights = [np.asarray(w, dtype=float).reshape(s) for w, s in zip(data["weights"], shapes)]
        net.biases = [np.asarray(b, dtype=float) for b in data["biases"]]
        adam = data["adam"]
        net.learning_rate = float(adam["learning_rate"])
        net.beta1 = float(adam["beta1"])
        net.beta2 = float(adam["beta2"])
        net.epsilon = float(adam["epsilon"])
        net.step_count = int(adam["step_count"])
        net.m_weights = [np.asarray(m, dtype=float).reshape(s) for m, s in zip(adam["m_weights"], shapes)]
        net.v_weights = [np.asarray(v, dtype=float).reshape(s) for v, s in zip(adam["v_weights"], shapes)]
        net.m_biases = [np.asarray(m, dtype=float) for m in adam["m_biases"]]
        net.v_biases = [np.asarray(v, dtype=float) for v in adam["v_biases"]]
        for w, s in zip(net.weights, shapes):
            if w.shape != s:
                raise ValueError("checkpoint weight shapes do not chain")
        return net

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | Path) -> "Mlp":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Transition:
    """One contextual-bandit sample: features, chosen action, reward.

    ``action_id`` is a single flat index for the allocation agent or a
    vector of per-branch levels for the phase agent.
    """

    features: np.ndarray
    action_id: int | np.ndarray
    reward: float


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions, sampled uniformly."""

    def __init__(self, capacity: int, feature_dim: int, action_width: int = 1):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.action_width = action_width
        self._features = np.zeros((capacity, feature_dim))
        self._actions = np.zeros((capacity, action_width), dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def size(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        """Store one transition, overwriting the oldest entry when full."""
        reward = float(t.reward)
        if not np.isfinite(reward):
            raise ValueError(f"reward must be finite, got {reward}")
        feats = np.asarray(t.features, dtype=float)
        if feats.shape != (self._features.shape[1],):
            raise ValueError(f"feature shape {feats.shape} != ({self._features.shape[1]},)")
        action = np.atleast_1d(np.asarray(t.action_id, dtype=np.int64))
        if action.shape != (self.action_width,):
            raise ValueError(f"action width {action.shape} != ({self.action_width},)")
        i = self._cursor
        self._features[i] = feats
        self._actions[i] = action
        self._rewards[i] = reward
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator):
        """Draw n transitions uniformly with replacement from the filled region.

        Returns:
            (features, actions, rewards) arrays of shapes (n, d), (n, w), (n,).

        Raises:
            ValueError: if fewer than n transitions are stored (caller
                should keep filling before training).
        """
        if self._size < n:
            raise ValueError(f"replay buffer holds {self._size} transitions, need {n}")
        idx = rng.integers(0, self._size, size=n)
        return self._features[idx], self._actions[idx], self._rewards[idx]
