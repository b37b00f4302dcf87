"""The two Q-learning agents and their shared training loop.

Phase agent: factored Q-head, one branch of L outputs per RIS element
(a flat head over L^K joint phase vectors would be intractable).  Branch
k owns outputs [k*L, (k+1)*L).  Allocation agent: flat Q-head over the
joint (alpha1, beta, tag) grid.

Samples are i.i.d. one-step decisions, so the discount is zero and each
Q-value regresses the immediate reward (no next state, no target
network).  Both agents receive the same scalar reward; the optimal phase
configuration does not depend on the allocation, which justifies
per-branch credit assignment from the shared signal.

The factored head with a shared reward only trains reliably when the
exact symmetries of the RIS gain are exploited, so the phase agent bakes
in three of them:

* gauge fixing - the gain is invariant under a common level shift, so
  stored phase actions are rotated to put the achieved effective channel
  near the real axis.  Each branch's optimal stored level then depends
  only on its own cascade angle, which removes the degenerate rotational
  equilibria that otherwise stall learning.
* cartesian net inputs - the agent feeds its network the cascade's
  real/imaginary parts (computed from the magnitude/angle features), so
  cross-element sums are linear instead of requiring learned products.
* symmetry augmentation - minibatch rows are randomly element-permuted
  and conjugated (level l -> L - l), both exact reward symmetries, which
  shares the angular Q-profile across all branches.

The head weights start at zero so initial greedy actions follow the
documented lowest-index tie-break instead of acting as a random hash of
the features.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelRealization, PhaseAction, effective_ris_channel, sample_realization
from .config import SystemConfig
from .errors import NumericalError
from .link import AllocAction, LinkMetrics, evaluate, objective
from .neural import Mlp, ReplayBuffer, Transition


def phase_features(chan: ChannelRealization) -> np.ndarray:
    """Per-element cascade magnitude and normalized angle, length 2K.

    Element k contributes (|h_br[k]*h_ru[k]|, arg(h_br[k]*h_ru[k])/pi),
    interleaved in element order.
    """
    cascade = np.asarray(chan.h_br) * np.asarray(chan.h_ru)
    out = np.empty(2 * cascade.size)
    out[0::2] = np.abs(cascade)
    out[1::2] = np.angle(cascade) / np.pi
    return out


def alloc_features(chan: ChannelRealization, phases: PhaseAction) -> np.ndarray:
    """Channel gains seen by the allocation agent, length 2 + 2M.

    Layout: (|h1|^2, |h2_eff(phases)|^2, then per tag |f_m|^2, |g_m|^2).
    The RIS gain already folds in the phase agent's decision.
    """
    h2 = effective_ris_channel(chan.h_br, chan.h_ru, phases)
    m = np.asarray(chan.f).size
    out = np.empty(2 + 2 * m)
    out[0] = abs(chan.h1) ** 2
    out[1] = abs(h2) ** 2
    out[2::2] = np.abs(chan.f) ** 2
    out[3::2] = np.abs(chan.g) ** 2
    return out


class FeatureNormalizer:
    """Running per-feature z-score, frozen after a warmup sample count.

    After freezing, the transform is a fixed affine map.  A variance
    floor of 1e-8 prevents division blowup on near-constant features.
    """

    VAR_FLOOR = 1e-8

    def __init__(self, dim: int, warmup: int):
        if warmup < 1:
            raise ValueError("warmup must be >= 1")
        self.dim = dim
        self.warmup = warmup
        self.count = 0
        self.mean = np.zeros(dim)
        self._m2 = np.zeros(dim)
        self.frozen = False

    def observe(self, x: np.ndarray) -> None:
        """Welford update; ignored once frozen."""
        if self.frozen:
            return
        x = np.asarray(x, dtype=float)
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)
        if self.count >= self.warmup:
            self.frozen = True

    def variance(self) -> np.ndarray:
        if self.count == 0:
            return np.ones(self.dim)
        return np.maximum(self._m2 / self.count, self.VAR_FLOOR)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / np.sqrt(self.variance())

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "warmup": self.warmup,
            "count": self.count,
            "mean": self.mean.tolist(),
            "m2": self._m2.tolist(),
            "frozen": self.frozen,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureNormalizer":
        norm = cls(int(data["dim"]), int(data["warmup"]))
        norm.count = int(data["count"])
        norm.mean = np.asarray(data["mean"], dtype=float)
        norm._m2 = np.asarray(data["m2"], dtype=float)
        norm.frozen = bool(data["frozen"])
        return norm


def encode_alloc_id(alpha1_idx: int, beta_idx: int, tag_idx: int, n_beta: int, m_tags: int) -> int:
    """Flat action id, alpha-major then beta then tag."""
    return (alpha1_idx * n_beta + beta_idx) * m_tags + tag_idx


def decode_alloc_id(action_id: int, n_beta: int, m_tags: int) -> AllocAction:
    """Inverse of :func:`encode_alloc_id`."""
    tag_idx = action_id % m_tags
    rest = action_id // m_tags
    return AllocAction(alpha1_idx=rest // n_beta, beta_idx=rest % n_beta, tag_idx=tag_idx)


class PhaseAgent:
    """Chooses one quantized phase level per RIS element, epsilon-greedily."""

    def __init__(
        self,
        k_ris: int,
        phase_levels: int,
        hidden: tuple[int, ...],
        learning_rate: float,
        normalizer_warmup: int,
        rng: np.random.Generator,
        config_hash: str = "",
    ):
        self.k_ris = k_ris
        self.phase_levels = phase_levels
        self.net = Mlp([2 * k_ris, *hidden, k_ris * phase_levels], rng, learning_rate)
        # zero head: initial greedy picks are the documented tie-break
        self.net.weights[-1][:] = 0.0
        self.net.biases[-1][:] = 0.0
        self.normalizer = FeatureNormalizer(2 * k_ris, normalizer_warmup)
        self.config_hash = config_hash

    def net_features(self, features: np.ndarray) -> np.ndarray:
        """Cascade real/imag parts from the (magnitude, angle/pi) features.

        Same width (2K) and information; cross-element sums become linear
        in the inputs, which the dense trunk fits far more readily.
        """
        features = np.asarray(features, dtype=float)
        mag = features[..., 0::2]
        ang = features[..., 1::2] * np.pi
        out = np.empty_like(features)
        out[..., 0::2] = mag * np.cos(ang)
        out[..., 1::2] = mag * np.sin(ang)
        return out

    def act(self, features: np.ndarray, epsilon: float, rng: np.random.Generator) -> PhaseAction:
        """Per-branch epsilon-greedy selection on normalized features.

        Each branch independently explores with probability epsilon;
        greedy ties break toward the lowest level index.  The two rng
        draws happen unconditionally so the stream advances identically
        for any epsilon.
        """
        q = self.net.forward(features).reshape(self.k_ris, self.phase_levels)
        greedy = q.argmax(axis=1)
        explore = rng.random(self.k_ris) < epsilon
        random_levels = rng.integers(0, self.phase_levels, size=self.k_ris)
        return PhaseAction(np.where(explore, random_levels, greedy), self.phase_levels)

    def act_on(self, chan: ChannelRealization, epsilon: float, rng: np.random.Generator) -> PhaseAction:
        """Feature pipeline plus :meth:`act` for one realization."""
        x = self.normalizer.transform(self.net_features(phase_features(chan)))
        return self.act(x, epsilon, rng)

    def branch_mask(self, levels: np.ndarray) -> np.ndarray:
        """Flat output indices for per-branch levels, shape (n, K)."""
        levels = np.asarray(levels, dtype=np.int64)
        offsets = np.arange(self.k_ris, dtype=np.int64) * self.phase_levels
        return levels + offsets

    def canonical_levels(self, levels: np.ndarray, h2: complex) -> np.ndarray:
        """Rotate a level vector so the achieved h2 lands near the real axis.

        |h2| is exactly invariant under a common level shift, so the
        rotated action is an equally valid sample of the same reward.
        """
        shift = int(np.round(-np.angle(h2) * self.phase_levels / (2.0 * np.pi)))
        return (np.asarray(levels, dtype=np.int64) + shift) % self.phase_levels

    def augment_batch(self, feats: np.ndarray, levels: np.ndarray, rng: np.random.Generator):
        """Random element permutation and conjugation of a training batch.

        Both transforms leave the reward untouched, so each stored
        transition stands in for a whole equivalence class; this shares
        the angular Q-profile across branches instead of relearning it
        per element.
        """
        n = feats.shape[0]
        k = self.k_ris
        pairs = feats.reshape(n, k, 2).copy()
        perm = np.argsort(rng.random((n, k)), axis=1)
        rows = np.arange(n)[:, None]
        pairs = pairs[rows, perm]
        levels = levels[rows, perm]
        conj = rng.random(n) < 0.5
        pairs[conj, :, 1] *= -1.0
        levels = np.where(conj[:, None], (self.phase_levels - levels) % self.phase_levels, levels)
        return pairs.reshape(n, 2 * k), levels

    def to_dict(self) -> dict:
        return {
            "kind": "phase",
            "action_space": {"k_ris": self.k_ris, "phase_levels": self.phase_levels},
            "config_hash": self.config_hash,
            "normalizer": self.normalizer.to_dict(),
            "net": self.net.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseAgent":
        if data.get("kind") != "phase":
            raise ValueError(f"not a phase-agent checkpoint: kind={data.get('kind')!r}")
        space = data["action_space"]
        agent = cls.__new__(cls)
        agent.k_ris = int(space["k_ris"])
        agent.phase_levels = int(space["phase_levels"])
        agent.net = Mlp.from_dict(data["net"])
        agent.normalizer = FeatureNormalizer.from_dict(data["normalizer"])
        agent.config_hash = data.get("config_hash", "")
        if agent.net.output_dim != agent.k_ris * agent.phase_levels:
            raise ValueError("checkpoint net width does not match K*L")
        return agent

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | Path) -> "PhaseAgent":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class AllocAgent:
    """Chooses (alpha1, beta, tag) jointly from a flat Q-head."""

    def __init__(
        self,
        m_tags: int,
        n_alpha: int,
        n_beta: int,
        hidden: tuple[int, ...],
        learning_rate: float,
        normalizer_warmup: int,
        rng: np.random.Generator,
        config_hash: str = "",
    ):
        self.m_tags = m_tags
        self.n_alpha = n_alpha
        self.n_beta = n_beta
        self.net = Mlp([2 + 2 * m_tags, *hidden, n_alpha * n_beta * m_tags], rng, learning_rate)
        self.net.weights[-1][:] = 0.0
        self.net.biases[-1][:] = 0.0
        self.normalizer = FeatureNormalizer(2 + 2 * m_tags, normalizer_warmup)
        self.config_hash = config_hash

    @property
    def n_actions(self) -> int:
        return self.n_alpha * self.n_beta * self.m_tags

    def act(self, features: np.ndarray, epsilon: float, rng: np.random.Generator) -> AllocAction:
        """Flat epsilon-greedy selection; greedy ties break to lowest id."""
        q = self.net.forward(features)
        greedy = int(q.argmax())
        explore = rng.random() < epsilon
        random_id = int(rng.integers(0, self.n_actions))
        return decode_alloc_id(random_id if explore else greedy, self.n_beta, self.m_tags)

    def act_on(self, chan: ChannelRealization, phases: PhaseAction, epsilon: float,
               rng: np.random.Generator) -> AllocAction:
        """Feature pipeline plus :meth:`act` for one realization."""
        x = self.normalizer.transform(alloc_features(chan, phases))
        return self.act(x, epsilon, rng)

    def to_dict(self) -> dict:
        return {
            "kind": "alloc",
            "action_space": {
                "m_tags": self.m_tags,
                "n_alpha": self.n_alpha,
                "n_beta": self.n_beta,
            },
            "config_hash": self.config_hash,
            "normalizer": self.normalizer.to_dict(),
            "net": self.net.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AllocAgent":
        if data.get("kind") != "alloc":
            raise ValueError(f"not an alloc-agent checkpoint: kind={data.get('kind')!r}")
        space = data["action_space"]
        agent = cls.__new__(cls)
        agent.m_tags = int(space["m_tags"])
        agent.n_alpha = int(space["n_alpha"])
        agent.n_beta = int(space["n_beta"])
        agent.net = Mlp.from_dict(data["net"])
        agent.normalizer = FeatureNormalizer.from_dict(data["normalizer"])
        agent.config_hash = data.get("config_hash", "")
        if agent.net.output_dim != agent.n_actions:
            raise ValueError("checkpoint net width does not match the action space")
        return agent

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | Path) -> "AllocAgent":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def reward(metrics: LinkMetrics, mode: str) -> float:
    """Training reward: the objective value, -1 when infeasible."""
    return objective(metrics, mode)


def epsilon_at(sample_index: int, n_samples: int, cfg: SystemConfig) -> float:
    """Linear decay from epsilon_start to epsilon_end over the first
    epsilon_decay_fraction of training, then held at the floor."""
    lc = cfg.learning
    decay_end = int(round(lc.epsilon_decay_fraction * n_samples))
    if decay_end <= 0 or sample_index >= decay_end:
        return lc.epsilon_end
    frac = sample_index / decay_end
    return lc.epsilon_start + (lc.epsilon_end - lc.epsilon_start) * frac


@dataclass
class LogRow:
    """One training-log record, written every 1,000 samples."""

    sample_index: int
    epsilon: float
    mean_reward_window: float
    feasible_fraction: float


@dataclass
class TrainResult:
    phase_agent: PhaseAgent
    alloc_agent: AllocAgent
    log: list[LogRow]


def _train_step(agent, buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator,
                is_phase: bool) -> float:
    feats, actions, rewards = buffer.sample(batch_size, rng)
    if is_phase:
        feats, actions = agent.augment_batch(feats, actions, rng)
        mask = agent.branch_mask(actions)
    else:
        mask = actions  # (n, 1) flat ids
    x = agent.normalizer.transform(feats)
    grads, loss = agent.net.backward_mse(x, rewards, mask)
    agent.net.adam_step(grads)
    return loss


def train(cfg: SystemConfig, seed: int, mode: str = "ee") -> TrainResult:
    """Run the full dual-agent training loop over i.i.d. channel samples.

    Per sample: draw a realization, let the phase agent act, feed the
    phase-conditioned gains to the allocation agent, evaluate the link,
    and store the shared reward in both replay buffers.  Once a buffer
    holds a minibatch, its agent takes one masked-MSE Adam step per
    sample.  Fully deterministic for a fixed seed: four independent
    PCG64 substreams (channels, phase agent, allocation agent, minibatch
    sampling) are spawned from ``SeedSequence(seed)``.
    """
    cfg.validate()
    lc = cfg.learning
    ss = np.random.SeedSequence(seed)
    rng_chan, rng_phase, rng_alloc, rng_batch = (np.random.default_rng(s) for s in ss.spawn(4))

    chash = cfg.config_hash()
    phase_agent = PhaseAgent(
        cfg.k_ris, cfg.phase_levels, lc.phase_hidden, lc.learning_rate,
        lc.normalizer_warmup, rng_phase, chash,
    )
    alloc_agent = AllocAgent(
        cfg.m_tags, len(cfg.alpha_grid), len(cfg.beta_grid), lc.alloc_hidden,
        lc.learning_rate, lc.normalizer_warmup, rng_alloc, chash,
    )
    phase_buf = ReplayBuffer(lc.buffer_capacity, 2 * cfg.k_ris, action_width=cfg.k_ris)
    alloc_buf = ReplayBuffer(lc.buffer_capacity, 2 + 2 * cfg.m_tags, action_width=1)

    n = lc.train_samples
    log: list[LogRow] = []
    window_rewards: list[float] = []
    window_feasible = 0

    for i in range(n):
        eps = epsilon_at(i, n, cfg)
        chan = sample_realization(cfg, rng_chan)

        pf = phase_agent.net_features(phase_features(chan))
        phase_agent.normalizer.observe(pf)
        phase_action = phase_agent.act(phase_agent.normalizer.transform(pf), eps, rng_phase)

        af = alloc_features(chan, phase_action)
        alloc_agent.normalizer.observe(af)
        alloc_action = alloc_agent.act(alloc_agent.normalizer.transform(af), eps, rng_alloc)

        metrics = evaluate(cfg, chan, phase_action, alloc_action)
        r = reward(metrics, mode)
        if not np.isfinite(r):
            raise NumericalError(f"non-finite reward at training sample {i}")

        h2 = effective_ris_channel(chan.h_br, chan.h_ru, phase_action)
        phase_buf.push(Transition(pf, phase_agent.canonical_levels(phase_action.levels, h2), r))
        alloc_buf.push(Transition(
            af,
            encode_alloc_id(alloc_action.alpha1_idx, alloc_action.beta_idx,
                            alloc_action.tag_idx, alloc_agent.n_beta, cfg.m_tags),
            r,
        ))

        if phase_buf.size >= lc.minibatch_size:
            _train_step(phase_agent, phase_buf, lc.minibatch_size, rng_batch, is_phase=True)
        if alloc_buf.size >= lc.minibatch_size:
            _train_step(alloc_agent, alloc_buf, lc.minibatch_size, rng_batch, is_phase=False)

        window_rewards.append(r)
        window_feasible += int(metrics.feasible)
        if (i + 1) % 1000 == 0:
            log.append(LogRow(
                sample_index=i + 1,
                epsilon=eps,
                mean_reward_window=float(np.mean(window_rewards)),
                feasible_fraction=window_feasible / len(window_rewards),
            ))
            window_rewards.clear()
            window_feasible = 0

    return TrainResult(phase_agent=phase_agent, alloc_agent=alloc_agent, log=log)
