"""Experiment configuration: link physics plus learning hyperparameters.

One :class:`SystemConfig` describes a complete experiment.  Configs load
from a plain JSON document whose keys match the dataclass fields exactly;
unknown keys raise ``ValueError`` so typos never silently fall back to
defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class LinkVariances:
    """Average channel power per link (path loss folded in, no geometry).

    Backscatter cascades default weaker than the direct/RIS links because
    the tag hops attenuate twice in practice.
    """

    bs_u1: float = 1.0
    bs_ris: float = 1.0
    ris_u2: float = 1.0
    bs_tag: float = 0.5
    tag_u1: float = 0.5

    def validate(self) -> None:
        for name in ("bs_u1", "bs_ris", "ris_u2", "bs_tag", "tag_u1"):
            v = getattr(self, name)
            if not (v >= 0.0):
                raise ValueError(f"link variance {name} must be >= 0, got {v}")


@dataclass(frozen=True)
class LearningConfig:
    """Hyperparameters shared by the two Q-learning agents.

    Buffer capacity 50,000 and minibatch 1,000 follow the reference
    configuration; the remaining knobs are standard defaults.  Hidden
    layer widths are per-agent so small desk runs stay fast while the
    full-scale (1000, 500) / (200, 100) architectures remain default.
    """

    learning_rate: float = 1e-3
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.5
    buffer_capacity: int = 50_000
    minibatch_size: int = 1_000
    train_samples: int = 200_000
    test_samples: int = 20_000
    normalizer_warmup: int = 1_000
    phase_hidden: tuple[int, ...] = (1000, 500)
    alloc_hidden: tuple[int, ...] = (200, 100)

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0):
            raise ValueError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not (0.0 < self.epsilon_decay_fraction <= 1.0):
            raise ValueError("epsilon_decay_fraction must be in (0, 1]")
        if self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be >= 1")
        if not (1 <= self.minibatch_size <= self.buffer_capacity):
            raise ValueError("minibatch_size must be in [1, buffer_capacity]")
        if self.train_samples < 1 or self.test_samples < 1:
            raise ValueError("train_samples and test_samples must be >= 1")
        if self.normalizer_warmup < 1:
            raise ValueError("normalizer_warmup must be >= 1")
        for dims in (self.phase_hidden, self.alloc_hidden):
            if len(dims) == 0 or any(int(d) < 1 for d in dims):
                raise ValueError("hidden layer widths must be positive")


@dataclass(frozen=True)
class SystemConfig:
    """All physical and learning parameters of one experiment.

    Attributes:
        p_max: BS transmit power budget in watts.
        p_c: circuit power consumption in watts.
        noise_var: receiver noise variance in watts (same normalized
            scale as transmit power).
        k_ris: number of RIS elements.
        m_tags: number of backscatter tags.
        beta_sic: residual interference fraction left by imperfect SIC,
            in [0, 1).
        r_min: minimum rate per NOMA user in bits/s/Hz.
        eh_efficiency: tag energy-harvesting efficiency in (0, 1].
        p_tag_circuit: tag circuit power threshold in watts.
        link_vars: per-link average channel powers.
        phase_levels: number of discrete RIS phase levels L; element k
            applies 2*pi*level/L radians.
        alpha_grid: candidate power shares for the direct user, each in
            (0, 0.5) so the RIS user always gets the larger share.
        beta_grid: candidate tag reflection coefficients, each in (0, 1).
        learning: agent hyperparameters.
    """

    p_max: float = 1.0
    p_c: float = 0.01
    noise_var: float = 0.1
    k_ris: int = 25
    m_tags: int = 4
    beta_sic: float = 0.2
    r_min: float = 0.1
    eh_efficiency: float = 0.6
    p_tag_circuit: float = 1e-6
    link_vars: LinkVariances = field(default_factory=LinkVariances)
    phase_levels: int = 8
    alpha_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4)
    beta_grid: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    learning: LearningConfig = field(default_factory=LearningConfig)

    def validate(self) -> None:
        """Raise ``ValueError`` on any violated invariant."""
        if not (self.p_max > 0):
            raise ValueError(f"p_max must be > 0, got {self.p_max}")
        if not (self.p_c >= 0):
            raise ValueError(f"p_c must be >= 0, got {self.p_c}")
        if not (self.noise_var > 0):
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")
        if self.k_ris < 1:
            raise ValueError(f"k_ris must be >= 1, got {self.k_ris}")
        if self.m_tags < 1:
            raise ValueError(f"m_tags must be >= 1, got {self.m_tags}")
        if not (0.0 <= self.beta_sic < 1.0):
            raise ValueError(f"beta_sic must be in [0, 1), got {self.beta_sic}")
        if not (self.r_min >= 0):
            raise ValueError(f"r_min must be >= 0, got {self.r_min}")
        if not (0.0 < self.eh_efficiency <= 1.0):
            raise ValueError(f"eh_efficiency must be in (0, 1], got {self.eh_efficiency}")
        if not (self.p_tag_circuit >= 0):
            raise ValueError(f"p_tag_circuit must be >= 0, got {self.p_tag_circuit}")
        if self.phase_levels < 2:
            raise ValueError(f"phase_levels must be >= 2, got {self.phase_levels}")
        if len(self.alpha_grid) == 0 or any(not (0.0 < a < 0.5) for a in self.alpha_grid):
            raise ValueError("every alpha_grid entry must satisfy 0 < alpha1 < 0.5")
        if len(self.beta_grid) == 0 or any(not (0.0 < b < 1.0) for b in self.beta_grid):
            raise ValueError("every beta_grid entry must lie in (0, 1)")
        self.link_vars.validate()
        self.learning.validate()

    @property
    def n_alloc_actions(self) -> int:
        """Size of the joint (alpha1, beta, tag) action space."""
        return len(self.alpha_grid) * len(self.beta_grid) * self.m_tags

    def to_dict(self) -> dict:
        """Resolved config as plain JSON-serializable types."""
        d = dataclasses.asdict(self)
        d["alpha_grid"] = list(self.alpha_grid)
        d["beta_grid"] = list(self.beta_grid)
        d["learning"]["phase_hidden"] = list(self.learning.phase_hidden)
        d["learning"]["alloc_hidden"] = list(self.learning.alloc_hidden)
        return d

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, used to stamp artifacts."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        """Build and validate a config; unknown keys are an error."""
        if not isinstance(data, dict):
            raise ValueError("config document must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "link_vars" in kwargs:
            kwargs["link_vars"] = _sub_config(LinkVariances, kwargs["link_vars"], "link_vars")
        if "learning" in kwargs:
            kwargs["learning"] = _sub_config(LearningConfig, kwargs["learning"], "learning")
        if "alpha_grid" in kwargs:
            kwargs["alpha_grid"] = tuple(float(a) for a in kwargs["alpha_grid"])
        if "beta_grid" in kwargs:
            kwargs["beta_grid"] = tuple(float(b) for b in kwargs["beta_grid"])
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str | Path) -> "SystemConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data)


def _sub_config(cls, data, name):
    if isinstance(data, cls):
        return data
    if not isinstance(data, dict):
        raise ValueError(f"{name} must be a JSON object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {name} keys: {sorted(unknown)}")
    kwargs = dict(data)
    for key in ("phase_hidden", "alloc_hidden"):
        if key in kwargs:
            kwargs[key] = tuple(int(v) for v in kwargs[key])
    return cls(**kwargs)
