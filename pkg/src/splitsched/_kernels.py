"""Numeric kernels (numba-compatible subset of Python).

Every function here is written against scalars and plain ndarrays so the same
source runs compiled (numba backend) or interpreted (numpy backend).  Public
modules wrap these with validation, dataclasses and docs; tests exercise the
wrappers, plus a dedicated cross-backend equivalence test.

Conventions:
  * noise is total in-band noise power (W); rates are ω·log2(1+g·p/σ²) bits/s
  * queues are never negative ([.]+ projection after every update)
  * stop codes: 0 = uncertainty threshold met, 1 = all packets sent,
    2 = window exhausted (deadline)
"""

import math

import numpy as np

from .backend import maybe_jit

LN2 = math.log(2.0)


@maybe_jit
def w0_f64(x):
    # principal-branch Lambert W, float64 Halley iteration (kernel-side;
    # the public extended-precision version lives in lambertw.py)
    if x == 0.0:
        return 0.0
    if x < -0.36787944117144233:
        return math.nan
    if x > 1.5:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    elif x > -0.25:
        w = x * (1.0 - x + 1.5 * x * x)
    else:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w = w - dw
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


@maybe_jit
def surrogate_k(a0, a1, a2, beta):
    denom = a0 * beta - a1
    if denom == 0.0:
        return 1.0
    acc = -1.0 / denom + a2
    if acc < 0.0:
        acc = 0.0
    if acc > 1.0:
        acc = 1.0
    return acc


@maybe_jit
def predicted_beta_k(omega, t_tr, gain, p, noise, bits_total):
    if bits_total <= 0.0 or t_tr <= 0.0 or p <= 0.0 or omega <= 0.0:
        return 0.0
    beta = omega * t_tr * math.log2(1.0 + gain * p / noise) / bits_total
    if beta < 0.0:
        beta = 0.0
    if beta > 1.0:
        beta = 1.0
    return beta


@maybe_jit
def slot_power_k(v_inner, omega, q, map_bits, gain, noise, t_slot, p_max, q_floor):
    # argmax of the per-slot drift-plus-penalty relaxation
    #   v·ω·t_slot·log2(1+g·p/σ²)/map_bits − q·p   over p ∈ [0, p_max]
    if q < q_floor:
        return p_max
    p = v_inner * omega * t_slot / (q * map_bits * LN2) - noise / gain
    if p <= 0.0:
        return 0.0
    if p > p_max:
        return p_max
    return p


@maybe_jit
def kkt_power_k(v_outer, queue, gain, noise, t_tr, a0, a1, bits_total, omega,
                p_max, p_min, q_floor):
    # closed-form stationary point of V·Â(β(p)) − Q·p·T_tr on the saturating
    # branch of the surrogate, via the principal Lambert W
    if t_tr <= 0.0 or bits_total <= 0.0 or omega <= 0.0:
        return 0.0
    if a0 <= 0.0:
        # flat surrogate: utility strictly decreasing in p
        return p_min
    if queue < q_floor:
        return p_max
    gamma = a1 * bits_total / (a0 * omega * t_tr)
    arg = math.sqrt(LN2 * gamma * gain * v_outer / (a1 * noise * t_tr * queue))
    w = w0_f64(arg / (2.0 * math.sqrt(2.0 ** gamma)))
    p = (noise / gain) * (2.0 ** gamma * math.exp(2.0 * w) - 1.0)
    if p < p_min:
        p = p_min
    if p > p_max:
        p = p_max
    return p


@maybe_jit
def saturation_power_k(gain, noise, t_tr, bits_total, omega):
    # power at which the predicted fraction β̂ reaches 1.  Past it the
    # estimated reward can only fall — predicted accuracy is saturated while
    # the billed energy p·T_eff keeps growing — so allocation caps the
    # reference power here rather than spending reward-free watts.
    if t_tr <= 0.0 or bits_total <= 0.0 or omega <= 0.0:
        return 1e30
    ex = bits_total / (omega * t_tr)
    if ex > 60.0:
        return 1e30
    return (noise / gain) * (2.0 ** ex - 1.0)


@maybe_jit
def effective_tx_time_k(omega, t_tr, gain, p, noise, bits_total):
    # time to push the whole payload at rate ω·log2(1+g·p/σ²), capped at the
    # window — when capacity exceeds the payload the transmission just ends
    # early, so surplus window must not be billed as transmit energy
    if t_tr <= 0.0 or bits_total <= 0.0 or p <= 0.0 or omega <= 0.0:
        return 0.0
    rate = omega * math.log2(1.0 + gain * p / noise)
    if rate <= 0.0:
        return t_tr
    t_need = bits_total / rate
    if t_need > t_tr:
        return t_tr
    return t_need


@maybe_jit
def utility_k(v_outer, queue, transmits, a0, a1, a2, acc_fixed, gain, noise,
              omega, p, t_tr, bits_total, e_local):
    # estimated per-frame reward: V·Â(β̂) − Q·Ẽ with Ẽ = E_local + p·T_eff,
    # T_eff the effective transmission time (full window unless the payload
    # finishes sooner)
    if transmits == 1 and t_tr > 0.0 and bits_total > 0.0:
        beta = predicted_beta_k(omega, t_tr, gain, p, noise, bits_total)
        acc = surrogate_k(a0, a1, a2, beta)
        t_eff = effective_tx_time_k(omega, t_tr, gain, p, noise, bits_total)
        energy = e_local + p * t_eff
    else:
        acc = acc_fixed
        energy = e_local
    return v_outer * acc - queue * energy


@maybe_jit
def total_utility_k(v_outer, queues, transmits, a0, a1, a2, acc_fixed, gains,
                    noise, omega, p_ref, t_tr, bits_total, e_local):
    tot = 0.0
    for i in range(queues.shape[0]):
        tot += utility_k(v_outer, queues[i], transmits[i], a0[i], a1[i], a2[i],
                         acc_fixed[i], gains[i], noise, omega[i], p_ref[i],
                         t_tr[i], bits_total[i], e_local[i])
    return tot


@maybe_jit
def allocate_k(v_outer, queues, gains, e_local, t_tr, bits_total,
               a0, a1, a2, acc_fixed, transmits,
               omega_total, noise, p_max, p_min, q_floor,
               eps_conv, max_iters, eps_phi):
    """Alternating bandwidth/power fixed point (best iterate kept).

    Iterate 0 is the uniform-bandwidth point with per-user closed-form powers;
    each subsequent iterate recomputes proportional-fair bandwidth from the
    per-user rewards at equal-share unit bandwidth, then the closed-form
    reference powers.  Powers are capped at the saturation power (β̂ = 1):
    the closed form is a stationary point of the unsaturated branch, and once
    predicted delivery is complete the reward only loses from extra watts.
    Returns (omega, p_ref, per-user utils, total, iters).
    """
    n = queues.shape[0]
    omega = np.zeros(n)
    p_ref = np.zeros(n)
    util = np.zeros(n)
    phi = np.zeros(n)

    n_tx = 0
    for i in range(n):
        if transmits[i] == 1:
            n_tx += 1

    if n_tx == 0:
        tot = 0.0
        for i in range(n):
            util[i] = utility_k(v_outer, queues[i], transmits[i], a0[i], a1[i],
                                a2[i], acc_fixed[i], gains[i], noise, 0.0, 0.0,
                                t_tr[i], bits_total[i], e_local[i])
            tot += util[i]
        return omega, p_ref, util, tot, 0

    share = omega_total / n_tx
    for i in range(n):
        if transmits[i] == 1:
            omega[i] = share
            p = kkt_power_k(v_outer, queues[i], gains[i], noise,
                            t_tr[i], a0[i], a1[i], bits_total[i],
                            share, p_max, p_min, q_floor)
            p_sat = saturation_power_k(gains[i], noise, t_tr[i],
                                       bits_total[i], share)
            if p_sat < p_min:
                p_sat = p_min
            if p > p_sat:
                p = p_sat
            p_ref[i] = p
    best_total = total_utility_k(v_outer, queues, transmits, a0, a1, a2,
                                 acc_fixed, gains, noise, omega, p_ref, t_tr,
                                 bits_total, e_local)
    best_omega = omega.copy()
    best_p = p_ref.copy()
    prev_total = best_total
    iters = 0

    for it in range(max_iters):
        phisum = 0.0
        for i in range(n):
            if transmits[i] == 1:
                u0 = utility_k(v_outer, queues[i], 1, a0[i], a1[i], a2[i],
                               acc_fixed[i], gains[i], noise, share, p_ref[i],
                               t_tr[i], bits_total[i], e_local[i])
                phi[i] = u0 if u0 > eps_phi else eps_phi
                phisum += phi[i]
            else:
                phi[i] = 0.0
        ssum = 0.0
        imax = -1
        vmax = -1.0
        for i in range(n):
            if transmits[i] == 1:
                omega[i] = omega_total * phi[i] / phisum
                ssum += omega[i]
                if omega[i] > vmax:
                    vmax = omega[i]
                    imax = i
        if imax >= 0:
            # largest-remainder touch-up so the shares sum exactly to ω
            omega[imax] += omega_total - ssum
        for i in range(n):
            if transmits[i] == 1:
                p = kkt_power_k(v_outer, queues[i], gains[i], noise,
                                t_tr[i], a0[i], a1[i], bits_total[i],
                                omega[i], p_max, p_min, q_floor)
                p_sat = saturation_power_k(gains[i], noise, t_tr[i],
                                           bits_total[i], omega[i])
                if p_sat < p_min:
                    p_sat = p_min
                if p > p_sat:
                    p = p_sat
                p_ref[i] = p
        tot = total_utility_k(v_outer, queues, transmits, a0, a1, a2,
                              acc_fixed, gains, noise, omega, p_ref, t_tr,
                              bits_total, e_local)
        iters = it + 1
        if tot > best_total:
            best_total = tot
            for i in range(n):
                best_omega[i] = omega[i]
                best_p[i] = p_ref[i]
        if abs(tot - prev_total) < eps_conv:
            break
        prev_total = tot

    tot = 0.0
    for i in range(n):
        util[i] = utility_k(v_outer, queues[i], transmits[i], a0[i], a1[i],
                            a2[i], acc_fixed[i], gains[i], noise,
                            best_omega[i], best_p[i], t_tr[i], bits_total[i],
                            e_local[i])
        tot += util[i]
    return best_omega, best_p, util, tot, iters


@maybe_jit
def eval_assignment_k(split, v_outer, queues, gains,
                      bits_s, e_local_s, t_local_s, t_edge_s,
                      a0_s, a1_s, a2_s, acc_fixed_s, transmits_s,
                      deadline, omega_total, noise, p_max, p_min, q_floor,
                      eps_conv, max_iters, eps_phi):
    # build per-user vectors for one split assignment, then allocate
    n = split.shape[0]
    e_local = np.zeros(n)
    t_tr = np.zeros(n)
    bits = np.zeros(n)
    a0 = np.zeros(n)
    a1 = np.ones(n)
    a2 = np.zeros(n)
    accf = np.zeros(n)
    tx = np.zeros(n, np.uint8)
    for i in range(n):
        s = split[i]
        if s < 0:
            continue
        e_local[i] = e_local_s[s]
        tt = deadline - t_local_s[s] - t_edge_s[s]
        if tt < 0.0:
            tt = 0.0
        t_tr[i] = tt
        bits[i] = bits_s[s]
        a0[i] = a0_s[s]
        a1[i] = a1_s[s]
        a2[i] = a2_s[s]
        accf[i] = acc_fixed_s[s]
        if transmits_s[s] == 1 and tt > 0.0 and bits_s[s] > 0.0:
            tx[i] = 1
    return allocate_k(v_outer, queues, gains, e_local, t_tr, bits,
                      a0, a1, a2, accf, tx, omega_total, noise,
                      p_max, p_min, q_floor, eps_conv, max_iters, eps_phi)


@maybe_jit
def greedy_k(v_outer, queues, gains,
             bits_s, e_local_s, t_local_s, t_edge_s,
             a0_s, a1_s, a2_s, acc_fixed_s, transmits_s,
             deadline, omega_total, noise, p_max, p_min, q_floor,
             eps_conv, max_iters, eps_phi):
    """Coordinate-wise greedy split search over the joint assignment.

    Users are visited in index order; each tries every deadline-feasible
    split with the others held fixed and keeps a strictly improving move
    (ties resolve to the smaller split index).  Returns
    (split, omega, p_ref, util, total).
    """
    n = queues.shape[0]
    n_splits = bits_s.shape[0]
    feas = np.zeros(n_splits, np.uint8)
    for s in range(n_splits):
        if t_local_s[s] + t_edge_s[s] <= deadline + 1e-12:
            feas[s] = 1
    s_init = -1
    for s in range(n_splits):
        if feas[s] == 1:
            s_init = s
            break
    split = np.full(n, s_init, np.int64)

    res = eval_assignment_k(split, v_outer, queues, gains, bits_s, e_local_s,
                            t_local_s, t_edge_s, a0_s, a1_s, a2_s, acc_fixed_s,
                            transmits_s, deadline, omega_total, noise, p_max,
                            p_min, q_floor, eps_conv, max_iters, eps_phi)
    best_tot = res[3]
    if s_init >= 0:
        for i in range(n):
            s_best = split[i]
            for c in range(n_splits):
                if feas[c] == 0 or c == s_best:
                    continue
                old = split[i]
                split[i] = c
                res = eval_assignment_k(split, v_outer, queues, gains, bits_s,
                                        e_local_s, t_local_s, t_edge_s, a0_s,
                                        a1_s, a2_s, acc_fixed_s, transmits_s,
                                        deadline, omega_total, noise, p_max,
                                        p_min, q_floor, eps_conv, max_iters,
                                        eps_phi)
                if res[3] > best_tot:
                    best_tot = res[3]
                    s_best = c
                split[i] = old
            split[i] = s_best

    res = eval_assignment_k(split, v_outer, queues, gains, bits_s, e_local_s,
                            t_local_s, t_edge_s, a0_s, a1_s, a2_s, acc_fixed_s,
                            transmits_s, deadline, omega_total, noise, p_max,
                            p_min, q_floor, eps_conv, max_iters, eps_phi)
    return split, res[0], res[1], res[2], res[3]


@maybe_jit
def frame_transmission_k(slot_gains, v_inner, omega, p_ref, noise,
                         map_bits, n_maps, imp_cum, difficulty,
                         h_max, h_th, kappa, t_slot, p_max, q_floor):
    """Reference-tracking progressive transmission over one frame window.

    imp_cum[j] is the normalized importance mass of the first j packets in
    transmission order (imp_cum[0] = 0, imp_cum[n_maps] = 1).  Returns
    (powers, sent, stop_slot, stop_code, e_tr, q_final, n_sent, u_final).
    """
    n_slots = slot_gains.shape[0]
    powers = np.zeros(n_slots)
    sent = np.zeros(n_slots, np.int64)
    q = 0.0
    n_sent = 0
    e_tr = 0.0

    u = h_max * difficulty
    if u <= h_th:
        return powers[:0], sent[:0], 0, 0, 0.0, 0.0, 0, u

    stop_slot = n_slots
    stop_code = 2
    for k in range(n_slots):
        g = slot_gains[k]
        p = slot_power_k(v_inner, omega, q, map_bits, g, noise, t_slot,
                         p_max, q_floor)
        b = 0
        if p > 0.0:
            bits = omega * math.log2(1.0 + g * p / noise) * t_slot
            b = int(bits / map_bits)
            if b > n_maps - n_sent:
                b = n_maps - n_sent
            n_sent += b
            e_tr += p * t_slot
        powers[k] = p
        sent[k] = b
        q = q + p - p_ref
        if q < 0.0:
            q = 0.0
        rem = 1.0 - imp_cum[n_sent]
        if rem < 0.0:
            rem = 0.0
        u = h_max * difficulty * rem ** kappa
        if u <= h_th:
            stop_slot = k + 1
            stop_code = 0
            break
        if n_sent >= n_maps:
            stop_slot = k + 1
            stop_code = 1
            break
    return (powers[:stop_slot], sent[:stop_slot], stop_slot, stop_code,
            e_tr, q, n_sent, u)
