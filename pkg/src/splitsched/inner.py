"""Packet-level progressive transmission inside one frame.

Given the task-level decision (split, bandwidth share, reference power), the
device transmits quantized feature maps most-important-first, one slot at a
time.  A power-deficit virtual queue q tracks overshoot above the reference
power; the per-slot transmit power maximizes the drift-plus-penalty
relaxation  v·(packet payoff) − q·p, which gives a water-filling-style
threshold: idle when the channel is poor relative to the accumulated
deficit, burst up to p_max when q is still slack.  Transmission stops when
the remaining-importance uncertainty drops below a threshold, when every
packet is through, or when the slot window closes.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k

H_MAX_NATS = math.log(1000.0)   # ln L for the default 1000-class head

_STOP_REASONS = {0: "threshold", 1: "exhausted", 2: "deadline"}


def update_power_queue(q, p_used, p_ref):
    """Power-deficit queue: [q + p_k − p̃]+ (starts at 0)."""
    return max(q + p_used - p_ref, 0.0)


def slot_power(v_inner, bandwidth, q, quant_bits, map_h, map_w, gain,
               noise_power, t_slot, p_max, q_floor=1e-9):
    """Per-slot transmit power maximizing v·ω·t_slot·log2(1+g·p/σ²)/map_bits
    − q·p, clipped to [0, p_max]; q below q_floor returns p_max."""
    map_bits = float(quant_bits * map_h * map_w)
    return _k.slot_power_k(float(v_inner), float(bandwidth), float(q),
                           map_bits, float(gain), float(noise_power),
                           float(t_slot), float(p_max), float(q_floor))


def select_packets(order, n_sent, capacity):
    """Next packets to send: the ``capacity`` most important not yet sent.

    ``order`` is the importance ordering (most important first); returns a
    (possibly empty) slice of packet indices.
    """
    if capacity <= 0:
        return order[n_sent:n_sent]
    return order[n_sent:n_sent + capacity]


def synthetic_uncertainty(difficulty, mass_received, kappa=1.0,
                          h_max=H_MAX_NATS):
    """Residual predictive entropy proxy: H_max·d·(1 − mass)^κ (nats).

    mass_received is the normalized importance mass of the packets already
    delivered; difficulty d scales per-task hardness.
    """
    rem = max(1.0 - mass_received, 0.0)
    return h_max * difficulty * rem ** kappa


@dataclass(frozen=True)
class TransmissionLog:
    """Slot-level outcome of one user's frame transmission."""
    powers: np.ndarray        # transmit power per executed slot
    packets: np.ndarray       # whole packets delivered per executed slot
    stop_slot: int            # slots actually executed
    stop_reason: str          # "threshold" | "exhausted" | "deadline"
    energy: float             # Σ p_k · t_slot over transmitting slots
    q_final: float
    n_sent: int
    beta_final: float
    uncertainty_final: float


def run_frame_transmission(slot_gains, bandwidth, ref_power, v_inner,
                           map_bits, n_maps, importance_cum, difficulty,
                           h_threshold, noise_power, t_slot, p_max,
                           kappa=1.0, h_max=H_MAX_NATS, q_floor=1e-9):
    """Run the slot loop for one user and frame.

    Parameters
    ----------
    slot_gains : realized channel gains, one per admissible slot (length
        already clipped to the transmission window / batch start).
    importance_cum : normalized cumulative importance mass, length
        n_maps + 1 with importance_cum[0] == 0 and [-1] == 1.
    h_threshold : stop threshold on the synthetic uncertainty (nats).

    Returns a TransmissionLog.  Energy is charged for every slot with
    positive power even when the integer packet capacity that slot is zero
    (the partial packet is discarded).
    """
    slot_gains = np.ascontiguousarray(slot_gains, dtype=float)
    importance_cum = np.ascontiguousarray(importance_cum, dtype=float)
    if importance_cum.shape[0] != n_maps + 1:
        raise ValueError("importance_cum must have n_maps + 1 entries")
    powers, packets, stop_slot, stop_code, e_tr, q_final, n_sent, u = \
        _k.frame_transmission_k(slot_gains, float(v_inner), float(bandwidth),
                                float(ref_power), float(noise_power),
                                float(map_bits), int(n_maps), importance_cum,
                                float(difficulty), float(h_max),
                                float(h_threshold), float(kappa),
                                float(t_slot), float(p_max), float(q_floor))
    beta = n_sent / n_maps if n_maps > 0 else 0.0
    return TransmissionLog(powers=np.asarray(powers),
                           packets=np.asarray(packets),
                           stop_slot=int(stop_slot),
                           stop_reason=_STOP_REASONS[int(stop_code)],
                           energy=float(e_tr), q_final=float(q_final),
                           n_sent=int(n_sent), beta_final=float(beta),
                           uncertainty_final=float(u))
