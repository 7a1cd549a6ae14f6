"""Property-based invariants for the control laws and queue dynamics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitsched.inner import (select_packets, slot_power,
                              synthetic_uncertainty, update_power_queue)
from splitsched.lambertw import lambert_w0
from splitsched.outer import (kkt_reference_power, predicted_fraction,
                              proportional_bandwidth, saturation_power,
                              update_energy_queue, utility)
from splitsched.profile import surrogate_accuracy, surrogate_from_targets

finite = {"allow_nan": False, "allow_infinity": False}


@given(st.floats(0, 1e3, **finite), st.floats(0, 10, **finite),
       st.floats(0, 10, **finite), st.floats(1e-3, 10, **finite))
def test_energy_queue_nonneg_and_lipschitz(q, e1, e2, budget):
    a = update_energy_queue(q, e1, budget)
    b = update_energy_queue(q, e2, budget)
    assert a >= 0.0 and b >= 0.0
    # 1-Lipschitz in the arrival: queues can't amplify energy differences
    assert abs(a - b) <= abs(e1 - e2) + 1e-12


@given(st.floats(0, 1e3, **finite), st.floats(0, 1e3, **finite),
       st.floats(0, 4, **finite), st.floats(0, 4, **finite))
def test_power_queue_lipschitz_in_backlog(q1, q2, p, ref):
    a = update_power_queue(q1, p, ref)
    b = update_power_queue(q2, p, ref)
    assert abs(a - b) <= abs(q1 - q2) + 1e-12


@given(st.floats(0.1, 50, **finite), st.floats(0.01, 0.99, **finite),
       st.floats(0, 1, **finite), st.floats(0, 1, **finite))
def test_surrogate_monotone_bounded(a0, floor_frac, b1, b2):
    c = surrogate_from_targets(a0, 0.4 * floor_frac, 0.41 + 0.5 * floor_frac)
    lo, hi = min(b1, b2), max(b1, b2)
    v_lo, v_hi = surrogate_accuracy(c, lo), surrogate_accuracy(c, hi)
    assert 0.0 <= v_lo <= v_hi <= 1.0


@given(st.floats(0.1, 100, **finite), st.floats(1e5, 1e8, **finite),
       st.floats(0, 1e4, **finite), st.floats(1e-16, 1e-11, **finite))
def test_slot_power_stays_in_range(v, omega, q, gain):
    p = slot_power(v, omega, q, 8, 8, 8, gain, 1e-13, 1e-3, 2.0)
    assert 0.0 <= p <= 2.0


@given(st.floats(0.5, 500, **finite), st.floats(1e-3, 50, **finite),
       st.floats(1e-15, 1e-12, **finite), st.floats(0.01, 0.29, **finite),
       st.floats(1e3, 1e6, **finite), st.floats(2e5, 2e7, **finite))
@settings(deadline=None)
def test_reference_power_stays_in_range(v, q, gain, t_tr, bits, omega):
    c = surrogate_from_targets(4.0, 0.4, 0.8)
    p = kkt_reference_power(v, q, gain, 1e-13, t_tr, c, bits, omega,
                            p_max=2.0)
    assert 1e-6 <= p <= 2.0


@given(st.floats(0, 4, **finite), st.floats(0, 4, **finite),
       st.floats(1e-15, 1e-12, **finite), st.floats(0.01, 0.3, **finite),
       st.floats(1e3, 1e6, **finite))
def test_predicted_fraction_bounded_monotone(p1, p2, gain, t_tr, bits):
    lo, hi = min(p1, p2), max(p1, p2)
    b_lo = predicted_fraction(1e6, t_tr, gain, lo, 1e-13, bits)
    b_hi = predicted_fraction(1e6, t_tr, gain, hi, 1e-13, bits)
    assert 0.0 <= b_lo <= b_hi <= 1.0


@given(st.floats(1e-15, 1e-12, **finite), st.floats(0.01, 0.3, **finite),
       st.floats(1e3, 3e5, **finite), st.floats(2e5, 2e7, **finite),
       st.floats(1e-2, 50, **finite), st.floats(1.0, 500, **finite),
       st.floats(0, 1, **finite))
@settings(deadline=None)
def test_utility_declines_past_saturation(gain, t_tr, bits, omega, q, v, t):
    # once predicted delivery is complete, extra watts only add billed
    # energy: utility is non-increasing beyond the saturation power
    c = surrogate_from_targets(4.0, 0.4, 0.8)
    p_sat = saturation_power(gain, 1e-13, t_tr, bits, omega)
    if p_sat >= 2.0 or q <= 0.0:
        return
    p1 = p_sat + t * (2.0 - p_sat) * 0.5
    p2 = p1 + (2.0 - p1) * 0.5
    u_sat = utility(v, q, c, gain, 1e-13, omega, p_sat, t_tr, bits, 0.1)
    u1 = utility(v, q, c, gain, 1e-13, omega, p1, t_tr, bits, 0.1)
    u2 = utility(v, q, c, gain, 1e-13, omega, p2, t_tr, bits, 0.1)
    assert u1 <= u_sat + 1e-9
    assert u2 <= u1 + 1e-9


@given(st.lists(st.floats(1e-9, 1e3, **finite), min_size=1, max_size=8),
       st.floats(1e5, 1e8, **finite))
def test_bandwidth_shares_sum_exactly(rewards, total):
    shares = proportional_bandwidth(rewards, total)
    assert abs(shares.sum() - total) <= np.spacing(total)   # ulp-exact
    assert np.all(shares > 0)
    # proportionality: ordering of rewards is preserved
    order = np.argsort(rewards)
    assert np.all(np.diff(shares[order]) >= -1e-6 * total)


@given(st.integers(2, 64), st.integers(0, 64), st.integers(0, 64))
def test_select_packets_no_repeats(n, sent, cap):
    rng = np.random.Generator(np.random.PCG64(0))
    order = rng.permutation(n)
    sent = min(sent, n)
    picked = select_packets(order, sent, cap)
    assert len(picked) == min(cap if cap > 0 else 0, n - sent)
    assert len(set(picked.tolist())) == len(picked)
    assert not set(picked.tolist()) & set(order[:sent].tolist())


@given(st.floats(0.01, 20, **finite), st.floats(0, 1, **finite),
       st.floats(0.2, 5, **finite))
def test_uncertainty_nonincreasing_in_mass(d, mass, kappa):
    u0 = synthetic_uncertainty(d, 0.0, kappa)
    u = synthetic_uncertainty(d, mass, kappa)
    u1 = synthetic_uncertainty(d, 1.0, kappa)
    assert u1 == 0.0
    assert 0.0 <= u <= u0


@given(st.floats(0, 1e6, **finite))
@settings(max_examples=200)
def test_lambert_defining_equation(x):
    w = lambert_w0(x)
    assert abs(float(w * np.exp(w) - x)) <= 1e-10
    assert float(w) >= 0.0
