"""Slot-level progressive transmission: power law, packets, stopping."""

import math

import numpy as np
import pytest

from splitsched.inner import (H_MAX_NATS, TransmissionLog,
                              run_frame_transmission, select_packets,
                              slot_power, synthetic_uncertainty,
                              update_power_queue)
from splitsched.profile import cumulative_importance


def test_power_queue_update():
    assert update_power_queue(0.0, 0.5, 1.0) == 0.0      # under reference
    assert update_power_queue(0.0, 1.5, 1.0) == pytest.approx(0.5)
    assert update_power_queue(0.2, 1.0, 1.0) == pytest.approx(0.2)
    assert update_power_queue(0.1, 0.0, 1.0) == 0.0      # clamp at zero


def test_slot_power_idles_on_poor_channel():
    # v*omega*t_slot/(q*map_bits*ln2) - sigma^2/h: with 8-bit 56x56 maps,
    # v=5, omega=3 MHz, q=1 and unit sigma^2/h the water level sits below
    # the floor, so the slot stays silent
    p = slot_power(5.0, 3e6, 1.0, 8, 56, 56, 1e-13, 1e-13, 1e-3, 2.0)
    assert p == 0.0


def test_slot_power_interior_value():
    # strong channel: interior stationary point matches the formula
    v, omega, q, t_slot = 5.0, 3e6, 1.0, 1e-3
    map_bits = 8 * 56 * 56
    gain, noise = 1e-13, 1e-15          # sigma^2/h = 0.01
    expect = v * omega * t_slot / (q * map_bits * math.log(2)) - 0.01
    p = slot_power(v, omega, q, 8, 56, 56, gain, noise, t_slot, 2.0)
    assert p == pytest.approx(expect, rel=1e-12)
    assert 0.0 < p < 2.0


def test_slot_power_clips_and_bursts():
    # tiny queue -> no deficit pressure -> burst at p_max
    assert slot_power(5.0, 3e6, 0.0, 8, 56, 56, 3e-15, 1e-13, 1e-3, 2.0) == 2.0
    assert slot_power(5.0, 3e6, 1e-12, 8, 2, 1, 3e-15, 1e-13, 1e-3, 2.0) == 2.0
    # small maps raise the water level far above p_max -> clip
    assert slot_power(5.0, 3e6, 0.5, 8, 2, 1, 1e-13, 1e-13, 1e-3, 2.0) == 2.0


def test_select_packets():
    order = np.array([2, 0, 1])
    assert select_packets(order, 0, 1).tolist() == [2]
    assert select_packets(order, 1, 2).tolist() == [0, 1]
    assert select_packets(order, 3, 2).tolist() == []    # nothing left
    assert select_packets(order, 0, 0).tolist() == []    # no capacity
    assert select_packets(order, 0, 99).tolist() == [2, 0, 1]


def test_synthetic_uncertainty():
    # full mass resolves the task; zero mass leaves h_max * difficulty
    assert synthetic_uncertainty(1.0, 1.0) == 0.0
    assert synthetic_uncertainty(1.0, 0.0) == pytest.approx(H_MAX_NATS)
    assert synthetic_uncertainty(2.0, 0.5) == pytest.approx(H_MAX_NATS)
    # kappa sharpens the decay
    assert synthetic_uncertainty(1.0, 0.5, kappa=2.0) \
        == pytest.approx(H_MAX_NATS * 0.25)
    assert synthetic_uncertainty(1.0, 1.2) == 0.0        # mass overshoot


def _run(profile, split, n_slots, ref_power=1.0, difficulty=1.0,
         h_frac=0.1, gains=None, bandwidth=1.6e6, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    if gains is None:
        gains = 3e-15 * rng.exponential(1.0, n_slots)
    layer = profile.layers[split]
    map_bits = 8 * layer.map_h * layer.map_w
    cum = cumulative_importance(profile, split)
    return run_frame_transmission(
        gains, bandwidth, ref_power, 5.0, map_bits, layer.out_maps, cum,
        difficulty, h_frac * H_MAX_NATS, 1e-13, 1e-3, 2.0), cum


def test_frame_transmission_accounting(profile):
    log, cum = _run(profile, 1, 220)
    assert isinstance(log, TransmissionLog)
    assert log.stop_slot == len(log.powers) == len(log.packets)
    assert log.energy == pytest.approx(float(log.powers.sum()) * 1e-3)
    assert int(log.packets.sum()) == log.n_sent
    assert 0 <= log.n_sent <= profile.layers[1].out_maps
    assert log.beta_final == pytest.approx(
        log.n_sent / profile.layers[1].out_maps)
    assert log.uncertainty_final == pytest.approx(
        synthetic_uncertainty(1.0, float(cum[log.n_sent])))
    assert np.all(log.powers >= 0.0)
    assert np.all(log.powers <= 2.0 + 1e-12)
    assert log.stop_reason in ("threshold", "exhausted", "deadline")


def test_frame_transmission_threshold_stop(profile):
    # easy task (low difficulty) on a long window stops on the uncertainty
    # threshold with a partial tensor
    log, cum = _run(profile, 1, 260, difficulty=0.4)
    assert log.stop_reason == "threshold"
    assert 0 < log.n_sent < profile.layers[1].out_maps
    assert synthetic_uncertainty(0.4, float(cum[log.n_sent])) \
        <= 0.1 * H_MAX_NATS + 1e-12


def test_frame_transmission_deadline_stop(profile):
    # 3 slots cannot move a meaningful fraction of the split-0 tensor
    log, _ = _run(profile, 0, 3, difficulty=2.0)
    assert log.stop_reason == "deadline"
    assert log.stop_slot == 3
    assert log.n_sent < profile.layers[0].out_maps


def test_frame_transmission_full_delivery(profile):
    # hard task, deep split, huge bandwidth: every packet goes through; the
    # residual uncertainty then reads zero, which the threshold test catches
    # (the separate all-sent stop is a defensive branch behind it)
    log, _ = _run(profile, 4, 200, difficulty=50.0, bandwidth=1e8)
    assert log.stop_reason == "threshold"
    assert log.n_sent == profile.layers[4].out_maps
    assert log.beta_final == 1.0
    assert log.uncertainty_final == 0.0


def test_frame_transmission_exhausted_guard(profile):
    # the all-sent stop only decides when the threshold can never fire
    # (negative threshold); it must still terminate the loop cleanly
    layer = profile.layers[4]
    cum = cumulative_importance(profile, 4)
    log = run_frame_transmission(
        np.full(200, 3e-15), 1e8, 1.0, 5.0, 16.0, layer.out_maps, cum,
        50.0, -1.0, 1e-13, 1e-3, 2.0)
    assert log.stop_reason == "exhausted"
    assert log.n_sent == layer.out_maps
    assert log.beta_final == 1.0


def test_frame_transmission_trivial_task_sends_nothing(profile):
    # initial uncertainty already under the threshold: zero slots, no energy
    log, _ = _run(profile, 1, 100, difficulty=0.05)
    assert log.stop_reason == "threshold"
    assert log.stop_slot == 0
    assert log.energy == 0.0
    assert log.n_sent == 0


def test_frame_transmission_zero_window(profile):
    log, _ = _run(profile, 1, 0)
    assert log.stop_reason == "deadline"
    assert log.stop_slot == 0
    assert log.energy == 0.0
    assert log.n_sent == 0


def test_frame_transmission_validates_cumulative_mass(profile):
    rng = np.random.Generator(np.random.PCG64(1))
    with pytest.raises(ValueError):
        run_frame_transmission(
            3e-15 * rng.exponential(1.0, 10), 1.6e6, 1.0, 5.0, 16, 1290,
            np.array([0.0, 0.5, 1.0]), 1.0, 0.69, 1e-13, 1e-3, 2.0)


def test_energy_billed_even_when_packet_rounds_to_zero(profile):
    # a slot with positive power but sub-packet capacity still pays for the
    # transmission; importance mass only moves on whole packets
    layer = profile.layers[0]
    gains = np.full(4, 3e-17)   # terrible channel: capacity rounds to 0
    cum = cumulative_importance(profile, 0)
    log = run_frame_transmission(
        gains, 1.6e6, 2.0, 5.0, 16.0, layer.out_maps, cum, 1.0,
        0.05 * H_MAX_NATS, 1e-13, 1e-3, 2.0)
    if float(log.powers.sum()) > 0:
        assert log.energy > 0.0
    assert log.n_sent == int(log.packets.sum())


def test_power_queue_recursion_matches_trace(profile):
    # q_{k+1} = [q_k + p_k - p_ref]+ applied to the logged powers must land
    # exactly on q_final (idle slots drain the deficit too)
    log, _ = _run(profile, 0, 280, ref_power=0.8, difficulty=3.0, seed=9)
    q = 0.0
    for p in log.powers:
        q = update_power_queue(q, float(p), 0.8)
    assert log.q_final == pytest.approx(q, abs=1e-12)
    assert log.q_final >= 0.0
