"""Random channel generation and the RIS effective cascade channel.

All links fade i.i.d. Rayleigh: each coefficient is circularly-symmetric
complex Gaussian CN(0, var) with the per-link variance from the config.
Randomness comes from ``numpy.random.Generator`` (PCG64 under
``default_rng``), so streams are seedable and reproducible; draw order
within one realization is fixed (h1, h_br, h_ru, f, g).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

TWO_PI = 2.0 * np.pi


@dataclass
class ChannelRealization:
    """One i.i.d. draw of every channel coefficient.

    Attributes:
        h1: BS -> U1 direct channel.
        h_br: BS -> RIS per-element channels, length K.
        h_ru: RIS -> U2 per-element channels, length K.
        f: BS -> tag channels, length M.
        g: tag -> U1 channels, length M.
    """

    h1: complex
    h_br: np.ndarray
    h_ru: np.ndarray
    f: np.ndarray
    g: np.ndarray


@dataclass
class PhaseAction:
    """Quantized RIS phase configuration.

    ``levels[k]`` is an integer in [0, n_levels); element k applies
    2*pi*levels[k]/n_levels radians.
    """

    levels: np.ndarray
    n_levels: int

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.int64)
        if self.n_levels < 2:
            raise ValueError(f"n_levels must be >= 2, got {self.n_levels}")
        if self.levels.ndim != 1:
            raise ValueError("levels must be a 1-D integer vector")
        if np.any(self.levels < 0) or np.any(self.levels >= self.n_levels):
            raise ValueError("phase levels out of range [0, n_levels)")

    def radians(self) -> np.ndarray:
        return TWO_PI * self.levels / self.n_levels


def _cn_sample(rng: np.random.Generator, var: float, size=None):
    """CN(0, var) draw: independent real/imag parts with variance var/2."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_realization(cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw one full channel realization from ``rng``.

    Consecutive calls on the same stream advance it deterministically, so
    a fixed seed reproduces the whole sequence bitwise.
    """
    lv = cfg.link_vars
    h1 = complex(_cn_sample(rng, lv.bs_u1))
    h_br = _cn_sample(rng, lv.bs_ris, cfg.k_ris)
    h_ru = _cn_sample(rng, lv.ris_u2, cfg.k_ris)
    f = _cn_sample(rng, lv.bs_tag, cfg.m_tags)
    g = _cn_sample(rng, lv.tag_u1, cfg.m_tags)
    return ChannelRealization(h1=h1, h_br=h_br, h_ru=h_ru, f=f, g=g)


def effective_ris_channel(h_br: np.ndarray, h_ru: np.ndarray, phases) -> complex:
    """Coherent cascade sum sum_k h_br[k] * exp(j*theta_k) * h_ru[k].

    Args:
        h_br, h_ru: per-element channel vectors of equal length K.
        phases: a :class:`PhaseAction` or a raw vector of K angles in
            radians (continuous phases are allowed for analysis).

    Returns:
        The complex effective channel seen by the RIS-served user.
    """
    if isinstance(phases, PhaseAction):
        rad = phases.radians()
    else:
        rad = np.asarray(phases, dtype=float)
    h_br = np.asarray(h_br)
    h_ru = np.asarray(h_ru)
    if h_br.shape != h_ru.shape or rad.shape != h_br.shape:
        raise ValueError(
            f"dimension mismatch: h_br {h_br.shape}, h_ru {h_ru.shape}, phases {rad.shape}"
        )
    return complex(np.sum(h_br * np.exp(1j * rad) * h_ru))


def aligned_phase_bound(h_br: np.ndarray, h_ru: np.ndarray) -> float:
    """Coherent-combining ceiling sum_k |h_br[k]| * |h_ru[k]|.

    No phase choice can exceed this magnitude (triangle inequality); the
    continuous angles from :func:`continuous_alignment` achieve it.
    """
    h_br = np.asarray(h_br)
    h_ru = np.asarray(h_ru)
    if h_br.shape != h_ru.shape:
        raise ValueError(f"dimension mismatch: h_br {h_br.shape}, h_ru {h_ru.shape}")
    return float(np.sum(np.abs(h_br) * np.abs(h_ru)))


def continuous_alignment(h_br: np.ndarray, h_ru: np.ndarray) -> np.ndarray:
    """Continuous phases that rotate every cascade term onto the real axis.

    theta_k = -arg(h_br[k]) - arg(h_ru[k]); with these angles the
    effective channel magnitude equals :func:`aligned_phase_bound`.
    """
    h_br = np.asarray(h_br)
    h_ru = np.asarray(h_ru)
    if h_br.shape != h_ru.shape:
        raise ValueError(f"dimension mismatch: h_br {h_br.shape}, h_ru {h_ru.shape}")
    return np.mod(-np.angle(h_br) - np.angle(h_ru), TWO_PI)
