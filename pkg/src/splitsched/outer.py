"""Task-level scheduling: per-frame split selection, bandwidth shares and
closed-form reference powers under a drift-plus-penalty objective.

Per frame the scheduler maximizes  Σ_n V·Â_n(β̂_n) − Q_n·Ẽ_n  where Q_n is the
user's energy-deficit queue, β̂_n the transmit fraction predicted from the
frame-level channel gain, and Ẽ_n = E_local + p̃·T_eff the energy estimate at
the reference power p̃ (T_eff caps the billed window at the time the payload
actually needs).  Bandwidth and power alternate to a fixed point
(proportional-fair shares from per-user rewards at equal unit bandwidth,
then per-user closed-form powers via Lambert W); split points come from a
coordinate-wise greedy search on top.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .profile import payload_bits, packet_bits, surrogate_accuracy


@dataclass(frozen=True)
class SchedulerParams:
    v_outer: float = 50.0
    p_max: float = 2.0
    p_min: float = 1e-6
    q_floor: float = 1e-9
    eps_phi: float = 1e-9
    eps_conv: float = 1e-6
    max_iters: int = 50

    def __post_init__(self):
        if self.v_outer < 0 or self.p_max <= 0:
            raise ValueError("need v_outer >= 0 and p_max > 0")
        if not 0 < self.p_min < self.p_max:
            raise ValueError("need 0 < p_min < p_max")


def update_energy_queue(backlog, energy, budget):
    """Energy-deficit virtual queue: [Q + E − Ē]+ (starts at 0)."""
    return max(backlog + energy - budget, 0.0)


def local_delay(workload, frequency):
    """Device compute time: MACs / (cycles/s at 1 MAC/cycle)."""
    return workload / frequency


def local_energy(alpha_eff, frequency, workload):
    """Device compute energy α·f²·R.

    >>> local_energy(1e-28, 2e9, 1e9)
    0.4
    """
    return alpha_eff * frequency * frequency * workload


def edge_delay(workload, frequency):
    """Edge compute time for the remaining layers."""
    return workload / frequency


def transmission_window(frame_period, t_local, t_edge):
    """Time left for transmission inside one frame (may be negative —
    callers treat that split as infeasible)."""
    return frame_period - t_local - t_edge


def batch_deadline(frame_period, edge_delays):
    """Latest edge batch start so every task finishes inside the frame.

    >>> batch_deadline(0.3, [0.02, 0.05])
    0.25
    """
    delays = list(edge_delays)
    if not delays:
        return frame_period
    return frame_period - max(delays)


def kkt_reference_power(v_outer, queue, gain, noise_power, t_tr, coeffs,
                        bits_total, bandwidth, p_max, p_min=1e-6,
                        q_floor=1e-9):
    """Closed-form reference power (Lambert-W stationary point).

    Maximizes V·Â(β̂(p)) − Q·p·T_tr over p on the saturating branch of the
    surrogate, then clips to [p_min, p_max].  queue < q_floor (no energy
    pressure) returns p_max; a zero window or payload returns 0.

    This is the raw closed form; allocation additionally caps the result at
    ``saturation_power`` because past β̂ = 1 the estimated reward is strictly
    decreasing in p (see ``allocate_resources``).
    """
    if gain <= 0 or noise_power <= 0:
        raise ValueError("gain and noise_power must be positive")
    return _k.kkt_power_k(float(v_outer), float(queue), float(gain),
                          float(noise_power), float(t_tr), coeffs.a0,
                          coeffs.a1, float(bits_total), float(bandwidth),
                          float(p_max), float(p_min), float(q_floor))


def saturation_power(gain, noise_power, t_tr, bits_total, bandwidth):
    """Power at which the predicted fraction reaches 1 (full payload inside
    the window).  Infinite-like (1e30) when the window or payload is
    degenerate or the exponent would overflow."""
    return _k.saturation_power_k(float(gain), float(noise_power),
                                 float(t_tr), float(bits_total),
                                 float(bandwidth))


def predicted_fraction(bandwidth, t_tr, gain, power, noise_power, bits_total):
    """β̂ = clip(ω·T_tr·log2(1+g·p/σ²) / payload_bits, 0, 1)."""
    return _k.predicted_beta_k(float(bandwidth), float(t_tr), float(gain),
                               float(power), float(noise_power),
                               float(bits_total))


def utility(v_outer, queue, coeffs, gain, noise_power, bandwidth, power,
            t_tr, bits_total, e_local, transmits=True, acc_fixed=0.0):
    """Estimated frame reward V·Â − Q·Ẽ for one user/decision."""
    return _k.utility_k(float(v_outer), float(queue), 1 if transmits else 0,
                        coeffs.a0 if coeffs is not None else 0.0,
                        coeffs.a1 if coeffs is not None else 1.0,
                        coeffs.a2 if coeffs is not None else 0.0,
                        float(acc_fixed), float(gain), float(noise_power),
                        float(bandwidth), float(power), float(t_tr),
                        float(bits_total), float(e_local))


def unit_bandwidth_reward(v_outer, queue, coeffs, gain, noise_power,
                          omega_unit, power, t_tr, bits_total, e_local,
                          eps_phi=1e-9):
    """Per-user reward at equal-share unit bandwidth, floored at eps_phi so
    proportional shares stay positive and finite."""
    u = utility(v_outer, queue, coeffs, gain, noise_power, omega_unit, power,
                t_tr, bits_total, e_local)
    return max(u, eps_phi)


def proportional_bandwidth(rewards, omega_total):
    """Split total bandwidth proportionally to positive rewards; the largest
    share absorbs the float remainder so the result sums to omega_total
    (exactly once the correction converges, never more than one ulp off).

    >>> proportional_bandwidth([2.0, 1.0, 1.0], 4e6).tolist()
    [2000000.0, 1000000.0, 1000000.0]
    """
    r = np.asarray(rewards, dtype=float)
    if r.size == 0:
        return np.zeros(0)
    if r.min() <= 0:
        raise ValueError("rewards must be positive (apply the floor first)")
    shares = omega_total * r / r.sum()
    i = int(np.argmax(shares))
    for _ in range(3):      # re-summing after the add can shift one ulp
        resid = omega_total - shares.sum()
        if resid == 0.0:
            break
        shares[i] += resid
    return shares


@dataclass(frozen=True)
class SplitTable:
    """Per-split constants the scheduler needs, as flat arrays."""
    splits: np.ndarray       # split ids
    bits_total: np.ndarray   # payload bits (0 for device-only)
    map_bits: np.ndarray     # bits per packet
    n_maps: np.ndarray
    e_local: np.ndarray
    t_local: np.ndarray
    t_edge: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    acc_fixed: np.ndarray    # accuracy with zero packets / device-only acc
    transmits: np.ndarray    # uint8


def build_split_table(profile, quant_bits, device_frequency, edge_frequency,
                      alpha_eff):
    from .profile import local_workload, edge_workload

    S = len(profile.split_points)
    t = SplitTable(
        splits=np.zeros(S, np.int64), bits_total=np.zeros(S),
        map_bits=np.zeros(S), n_maps=np.zeros(S, np.int64),
        e_local=np.zeros(S), t_local=np.zeros(S), t_edge=np.zeros(S),
        a0=np.zeros(S), a1=np.ones(S), a2=np.zeros(S),
        acc_fixed=np.zeros(S), transmits=np.zeros(S, np.uint8))
    for i, s in enumerate(profile.split_points):
        rl = local_workload(profile, s)
        re = edge_workload(profile, s)
        t.splits[i] = s
        t.t_local[i] = local_delay(rl, device_frequency)
        t.t_edge[i] = edge_delay(re, edge_frequency)
        t.e_local[i] = local_energy(alpha_eff, device_frequency, rl)
        if s < profile.k_m:
            c = profile.surrogates[s]
            t.bits_total[i] = payload_bits(profile, s, quant_bits)
            t.map_bits[i] = packet_bits(profile, s, quant_bits)
            t.n_maps[i] = profile.layers[s].out_maps
            t.a0[i] = c.a0
            t.a1[i] = c.a1
            t.a2[i] = c.a2
            t.acc_fixed[i] = surrogate_accuracy(c, 0.0)
            t.transmits[i] = 1
        else:
            t.acc_fixed[i] = profile.full_accuracy
    return t


@dataclass(frozen=True)
class TaskDecision:
    """One user's task-level decision for one frame."""
    user: int
    split: int               # -1 when no split fits the deadline
    bandwidth: float
    ref_power: float
    t_local: float
    t_edge: float
    window: float            # transmission window T - t_local - t_edge
    bits_total: float
    map_bits: float
    n_maps: int
    e_local: float
    pred_beta: float
    pred_acc: float
    pred_energy: float       # Ẽ = E_local + p̃·T_eff
    util: float
    transmits: bool


def allocate_resources(params, queues, gains, e_local, t_tr, bits_total,
                       a0, a1, a2, acc_fixed, transmits, omega_total,
                       noise_power):
    """Alternate bandwidth/power to a fixed point for fixed splits.

    Returns (omega, p_ref, per-user utilities, total utility, iterations).
    Keeps the best iterate seen, including the uniform-bandwidth baseline
    with per-user closed-form powers, so the result never falls below it.
    Reference powers are capped at ``saturation_power``: beyond full
    predicted delivery the reward V·Â − Q·Ẽ is strictly decreasing in p, so
    the cap is where the per-user argmax actually sits whenever the
    unsaturated stationary point overshoots it.
    """
    return _k.allocate_k(
        float(params.v_outer), np.ascontiguousarray(queues, dtype=float),
        np.ascontiguousarray(gains, dtype=float),
        np.ascontiguousarray(e_local, dtype=float),
        np.ascontiguousarray(t_tr, dtype=float),
        np.ascontiguousarray(bits_total, dtype=float),
        np.ascontiguousarray(a0, dtype=float),
        np.ascontiguousarray(a1, dtype=float),
        np.ascontiguousarray(a2, dtype=float),
        np.ascontiguousarray(acc_fixed, dtype=float),
        np.ascontiguousarray(transmits, dtype=np.uint8),
        float(omega_total), float(noise_power), params.p_max, params.p_min,
        params.q_floor, params.eps_conv, params.max_iters, params.eps_phi)


def greedy_partition_search(params, table, queues, gains, frame_period,
                            omega_total, noise_power):
    """Joint split/bandwidth/power decision for one frame.

    Coordinate-wise greedy over deadline-feasible splits (ties prefer the
    smaller split); each candidate is scored by a full bandwidth/power
    fixed point.  Returns a list of TaskDecision, one per user.
    """
    queues = np.ascontiguousarray(queues, dtype=float)
    gains = np.ascontiguousarray(gains, dtype=float)
    split_idx, omega, p_ref, util, _ = _k.greedy_k(
        float(params.v_outer), queues, gains,
        table.bits_total, table.e_local, table.t_local, table.t_edge,
        table.a0, table.a1, table.a2, table.acc_fixed, table.transmits,
        float(frame_period), float(omega_total), float(noise_power),
        params.p_max, params.p_min, params.q_floor, params.eps_conv,
        params.max_iters, params.eps_phi)

    decisions = []
    for n in range(queues.shape[0]):
        i = int(split_idx[n])
        if i < 0:
            decisions.append(TaskDecision(
                user=n, split=-1, bandwidth=0.0, ref_power=0.0, t_local=0.0,
                t_edge=0.0, window=0.0, bits_total=0.0, map_bits=0.0,
                n_maps=0, e_local=0.0, pred_beta=0.0, pred_acc=0.0,
                pred_energy=0.0, util=0.0, transmits=False))
            continue
        window = max(frame_period - table.t_local[i] - table.t_edge[i], 0.0)
        tx = bool(table.transmits[i]) and window > 0 and table.bits_total[i] > 0
        if tx:
            beta = predicted_fraction(omega[n], window, gains[n], p_ref[n],
                                      noise_power, table.bits_total[i])
            acc = _k.surrogate_k(table.a0[i], table.a1[i], table.a2[i], beta)
            t_eff = _k.effective_tx_time_k(omega[n], window, gains[n],
                                           p_ref[n], noise_power,
                                           table.bits_total[i])
            e_pred = table.e_local[i] + p_ref[n] * t_eff
        else:
            beta = 0.0
            acc = table.acc_fixed[i]
            e_pred = table.e_local[i]
        decisions.append(TaskDecision(
            user=n, split=int(table.splits[i]), bandwidth=float(omega[n]),
            ref_power=float(p_ref[n]), t_local=float(table.t_local[i]),
            t_edge=float(table.t_edge[i]), window=float(window),
            bits_total=float(table.bits_total[i]),
            map_bits=float(table.map_bits[i]), n_maps=int(table.n_maps[i]),
            e_local=float(table.e_local[i]), pred_beta=float(beta),
            pred_acc=float(acc), pred_energy=float(e_pred),
            util=float(util[n]), transmits=tx))
    return decisions
