"""SINRs, rates, efficiency metrics, and feasibility for one action.

Decoding contract at U1 (layered SIC): U1 first decodes the RIS user's
stream, cancels it with residual fraction beta_sic, decodes its own
stream treating the backscatter signal as interference, then decodes the
backscatter stream with residual beta_sic of the whole superposed signal.
U2 decodes its stream directly, treating U1's share as interference.

With h2 the effective RIS channel, c_m = f[m]*g[m] the selected tag
cascade, P the transmit power, and sigma2 the noise variance:

    sinr2  = alpha2*P*|h2|^2 / (alpha1*P*|h2|^2 + sigma2)
    sinr1  = alpha1*P*|h1|^2 / (beta_sic*alpha2*P*|h1|^2 + beta*P*|c_m|^2 + sigma2)
    sinr_b = beta*P*|c_m|^2  / (beta_sic*P*|h1|^2 + sigma2)

Rates are Shannon, log2(1 + sinr), in bits/s/Hz.  The tag harvests the
non-reflected fraction: (1-beta)*eta*P*|f_m|^2 must cover its circuit
power for the action to be feasible, and both NOMA users must reach the
minimum rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, PhaseAction, effective_ris_channel
from .config import SystemConfig

INFEASIBLE_PENALTY = -1.0

MODES = ("ee", "se")


@dataclass
class AllocAction:
    """Indices into the configured allocation grids.

    alpha2 = 1 - alpha1 is implied; alpha_grid lies in (0, 0.5) so the
    RIS user always receives the larger power share.
    """

    alpha1_idx: int
    beta_idx: int
    tag_idx: int


@dataclass
class LinkMetrics:
    """Per-stream SINRs and rates plus system-level verdicts for one action."""

    sinr1: float
    sinr2: float
    sinr_b: float
    r1: float
    r2: float
    r_b: float
    se: float
    ee: float
    tag_harvest_ok: bool
    rate_ok: bool
    feasible: bool


def _check_alloc(cfg: SystemConfig, alloc: AllocAction) -> None:
    if not (0 <= alloc.alpha1_idx < len(cfg.alpha_grid)):
        raise ValueError(f"alpha1_idx {alloc.alpha1_idx} out of range")
    if not (0 <= alloc.beta_idx < len(cfg.beta_grid)):
        raise ValueError(f"beta_idx {alloc.beta_idx} out of range")
    if not (0 <= alloc.tag_idx < cfg.m_tags):
        raise ValueError(f"tag_idx {alloc.tag_idx} out of range")


def evaluate(
    cfg: SystemConfig,
    chan: ChannelRealization,
    phases: PhaseAction,
    alloc: AllocAction,
) -> LinkMetrics:
    """Compute all link metrics for one (realization, action) pair."""
    _check_alloc(cfg, alloc)
    h2 = effective_ris_channel(chan.h_br, chan.h_ru, phases)

    alpha1 = cfg.alpha_grid[alloc.alpha1_idx]
    alpha2 = 1.0 - alpha1
    beta = cfg.beta_grid[alloc.beta_idx]
    p = cfg.p_max
    sigma2 = cfg.noise_var

    g1 = abs(chan.h1) ** 2
    g2 = abs(h2) ** 2
    f_m = chan.f[alloc.tag_idx]
    c_m = f_m * chan.g[alloc.tag_idx]
    gc = abs(c_m) ** 2

    sinr2 = alpha2 * p * g2 / (alpha1 * p * g2 + sigma2)
    sinr1 = alpha1 * p * g1 / (cfg.beta_sic * alpha2 * p * g1 + beta * p * gc + sigma2)
    sinr_b = beta * p * gc / (cfg.beta_sic * p * g1 + sigma2)

    r1 = math.log2(1.0 + sinr1)
    r2 = math.log2(1.0 + sinr2)
    r_b = math.log2(1.0 + sinr_b)
    se = r1 + r2 + r_b
    ee = se / (p + cfg.p_c)

    harvested = (1.0 - beta) * cfg.eh_efficiency * p * abs(f_m) ** 2
    tag_harvest_ok = bool(harvested >= cfg.p_tag_circuit)
    rate_ok = bool(r1 >= cfg.r_min and r2 >= cfg.r_min)

    return LinkMetrics(
        sinr1=sinr1,
        sinr2=sinr2,
        sinr_b=sinr_b,
        r1=r1,
        r2=r2,
        r_b=r_b,
        se=se,
        ee=ee,
        tag_harvest_ok=tag_harvest_ok,
        rate_ok=rate_ok,
        feasible=tag_harvest_ok and rate_ok,
    )


def objective(metrics: LinkMetrics, mode: str, penalty: float = INFEASIBLE_PENALTY) -> float:
    """EE or SE when feasible, the infeasibility penalty otherwise."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not metrics.feasible:
        return penalty
    return metrics.ee if mode == "ee" else metrics.se


def evaluate_alloc_grid(cfg: SystemConfig, chan: ChannelRealization, phases: PhaseAction) -> dict:
    """Vectorized :func:`evaluate` over the whole joint allocation grid.

    Returns arrays of length ``cfg.n_alloc_actions`` keyed by metric name,
    flattened in action-id order (alpha-major, then beta, then tag).
    Elementwise formulas match :func:`evaluate` exactly, so the two routes
    agree bitwise; the scalar path stays the reference.
    """
    alpha1 = np.asarray(cfg.alpha_grid, dtype=float)[:, None, None]
    beta = np.asarray(cfg.beta_grid, dtype=float)[None, :, None]
    alpha2 = 1.0 - alpha1
    p = cfg.p_max
    sigma2 = cfg.noise_var

    h2 = effective_ris_channel(chan.h_br, chan.h_ru, phases)
    g1 = abs(chan.h1) ** 2
    g2 = abs(h2) ** 2
    gf = (np.abs(chan.f) ** 2)[None, None, :]
    gc = (np.abs(chan.f * chan.g) ** 2)[None, None, :]

    sinr2 = alpha2 * p * g2 / (alpha1 * p * g2 + sigma2)
    sinr1 = alpha1 * p * g1 / (cfg.beta_sic * alpha2 * p * g1 + beta * p * gc + sigma2)
    sinr_b = beta * p * gc / (cfg.beta_sic * p * g1 + sigma2)

    r1 = np.log2(1.0 + sinr1)
    r2 = np.log2(1.0 + sinr2)
    r_b = np.log2(1.0 + sinr_b)
    se = r1 + r2 + r_b
    ee = se / (p + cfg.p_c)

    harvested = (1.0 - beta) * cfg.eh_efficiency * p * gf
    tag_harvest_ok = harvested >= cfg.p_tag_circuit
    rate_ok = (r1 >= cfg.r_min) & (r2 >= cfg.r_min)

    shape = (len(cfg.alpha_grid), len(cfg.beta_grid), cfg.m_tags)
    full = {
        "sinr1": np.broadcast_to(sinr1, shape),
        "sinr2": np.broadcast_to(sinr2, shape),
        "sinr_b": np.broadcast_to(sinr_b, shape),
        "r1": np.broadcast_to(r1, shape),
        "r2": np.broadcast_to(r2, shape),
        "r_b": np.broadcast_to(r_b, shape),
        "se": np.broadcast_to(se, shape),
        "ee": np.broadcast_to(ee, shape),
        "tag_harvest_ok": np.broadcast_to(tag_harvest_ok, shape),
        "rate_ok": np.broadcast_to(rate_ok, shape),
    }
    out = {k: v.reshape(-1).copy() for k, v in full.items()}
    out["feasible"] = out["tag_harvest_ok"] & out["rate_ok"]
    return out
