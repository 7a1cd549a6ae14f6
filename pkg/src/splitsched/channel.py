"""Wireless channel model: block-fading gains, Shannon rate, packet capacity.

Gains are squared channel magnitudes (linear scale).  Rayleigh fading draws
the per-slot gain as path_loss_gain * Exponential(1); the frame-level gain
used by the task scheduler is the mean (path_loss_gain itself), i.e. the
scheduler plans on channel statistics while the slot loop sees realizations.
``noise_power`` is the total in-band noise power in watts — rates are
ω·log2(1 + g·p/σ²) with no per-Hz rescaling.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelModelConfig:
    path_loss_gain: float
    noise_power: float
    fading: str = "rayleigh"   # "rayleigh" | "none"

    def __post_init__(self):
        if self.path_loss_gain <= 0 or self.noise_power <= 0:
            raise ValueError("path_loss_gain and noise_power must be positive")
        if self.fading not in ("rayleigh", "none"):
            raise ValueError("fading must be 'rayleigh' or 'none'")


@dataclass(frozen=True)
class ChannelState:
    """Channel realization for one user over one frame window."""
    frame_gain: float        # decision-time gain (ensemble mean)
    slot_gains: np.ndarray   # realized per-slot gains, length = #slots


def sample_frame(cfg, n_slots, rng):
    """Draw a ChannelState for one user and frame.

    >>> cfg = ChannelModelConfig(1e-14, 1e-13, fading="none")
    >>> st = sample_frame(cfg, 3, np.random.default_rng(0))
    >>> st.slot_gains.tolist() == [1e-14] * 3
    True
    """
    if cfg.fading == "rayleigh":
        gains = cfg.path_loss_gain * rng.exponential(1.0, size=n_slots)
    else:
        gains = np.full(n_slots, cfg.path_loss_gain)
    return ChannelState(frame_gain=cfg.path_loss_gain, slot_gains=gains)


def shannon_rate(bandwidth, gain, power, noise_power):
    """Achievable rate in bits/s: ω·log2(1 + g·p/σ²).

    >>> shannon_rate(1e6, 1.0, 1.0, 1.0)   # SNR = 1 -> 1 bit/s/Hz
    1000000.0
    """
    if bandwidth < 0 or power < 0:
        raise ValueError("bandwidth and power must be non-negative")
    return bandwidth * math.log2(1.0 + gain * power / noise_power)


def packet_capacity(rate, t_slot, quant_bits, map_h, map_w):
    """Whole packets (feature maps) deliverable in one slot.

    >>> packet_capacity(1e8, 1e-3, 8, 56, 56)   # 1e5 bits vs 25088-bit maps
    3
    """
    map_bits = quant_bits * map_h * map_w
    return int(rate * t_slot // map_bits)
