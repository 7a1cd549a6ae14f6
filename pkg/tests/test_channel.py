"""Channel model: fading draws, Shannon rate, per-slot packet capacity."""

import numpy as np
import pytest

from splitsched.channel import (ChannelModelConfig, packet_capacity,
                                sample_frame, shannon_rate)


def test_shannon_rate_values():
    assert shannon_rate(1e6, 1.0, 1.0, 1.0) == 1e6        # SNR 1 -> 1 b/s/Hz
    assert shannon_rate(1e6, 1.0, 3.0, 1.0) == pytest.approx(2e6)
    assert shannon_rate(0.0, 1.0, 1.0, 1.0) == 0.0
    assert shannon_rate(1e6, 1.0, 0.0, 1.0) == 0.0


def test_shannon_rate_rejects_negative():
    with pytest.raises(ValueError):
        shannon_rate(-1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        shannon_rate(1e6, 1.0, -0.1, 1.0)


def test_packet_capacity():
    assert packet_capacity(1e8, 1e-3, 8, 56, 56) == 3
    assert packet_capacity(25088e3 - 1, 1e-3, 8, 56, 56) == 0
    assert packet_capacity(0.0, 1e-3, 8, 2, 1) == 0
    # exactly one map's worth of bits in a slot
    assert packet_capacity(16e3, 1e-3, 8, 2, 1) == 1


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelModelConfig(0.0, 1e-13)
    with pytest.raises(ValueError):
        ChannelModelConfig(1e-14, -1e-13)
    with pytest.raises(ValueError):
        ChannelModelConfig(1e-14, 1e-13, fading="nakagami")


def test_sample_frame_no_fading(rng):
    cfg = ChannelModelConfig(1e-14, 1e-13, fading="none")
    st = sample_frame(cfg, 5, rng)
    assert st.frame_gain == 1e-14
    np.testing.assert_array_equal(st.slot_gains, np.full(5, 1e-14))


def test_sample_frame_rayleigh_statistics():
    cfg = ChannelModelConfig(3e-15, 1e-13)
    rng = np.random.Generator(np.random.PCG64(7))
    st = sample_frame(cfg, 200000, rng)
    assert st.frame_gain == 3e-15            # scheduler plans on the mean
    assert st.slot_gains.min() > 0
    # exponential(1) scaling: mean == path loss, std == mean
    assert st.slot_gains.mean() == pytest.approx(3e-15, rel=0.01)
    assert st.slot_gains.std() == pytest.approx(3e-15, rel=0.02)


def test_sample_frame_reproducible():
    cfg = ChannelModelConfig(3e-15, 1e-13)
    a = sample_frame(cfg, 50, np.random.Generator(np.random.PCG64(11)))
    b = sample_frame(cfg, 50, np.random.Generator(np.random.PCG64(11)))
    np.testing.assert_array_equal(a.slot_gains, b.slot_gains)
