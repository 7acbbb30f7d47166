import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import stats

from semkb import channel as ch

N = 10**6


def unit_block(n, seed=0):
    rng = np.random.default_rng(seed)
    return ch.power_normalize(rng.standard_normal(n) + 1j * rng.standard_normal(n))


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False), min_size=1, max_size=50),
       st.floats(1e-3, 1e3))
def test_power_normalize(xs, c):
    x = np.array(xs)
    assume(np.mean(np.abs(x) ** 2) > 1e-100)
    y = ch.power_normalize(x)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(ch.power_normalize(c * x), y, atol=1e-9)


def test_zero_block_rejected():
    with pytest.raises(ValueError, match="zero-power block"):
        ch.power_normalize(np.zeros(4))


def test_awgn_gain_is_one():
    assert ch.sample_gain(ch.ChannelConfig("awgn"), np.random.default_rng(0)) == 1 + 0j


def test_rayleigh_second_moment():
    rng = np.random.default_rng(1)
    h = ch.draw_gains(ch.ChannelConfig("rayleigh"), rng, N)
    assert 0.995 <= np.mean(np.abs(h) ** 2) <= 1.005
    assert abs(np.mean(h)) < 5e-3


def test_rician_moments_and_limit():
    rng = np.random.default_rng(2)
    cfg = ch.ChannelConfig("rician", rician_k_db=10.0)
    h = ch.draw_gains(cfg, rng, N)
    k = 10.0
    assert np.mean(h.real) == pytest.approx(math.sqrt(k / (k + 1)), abs=2e-3)
    assert np.var(h) == pytest.approx(1 / (k + 1), rel=1e-2)
    assert 0.995 <= np.mean(np.abs(h) ** 2) <= 1.005
    big = ch.ChannelConfig("rician", rician_k_db=60.0)
    hs = np.array([ch.sample_gain(big, rng) for _ in range(2000)])
    assert np.mean(np.abs(hs - 1) < 0.01) >= 0.99


def test_noiseless_awgn_is_identity():
    x = unit_block(64)
    y, real = ch.transmit(x, ch.ChannelConfig("awgn", math.inf), np.random.default_rng(0))
    np.testing.assert_array_equal(y, x)
    np.testing.assert_array_equal(ch.equalize(y, real), x)


@pytest.mark.parametrize("kind", ch.KINDS)
@pytest.mark.parametrize("snr", [0.0, 10.0])
def test_empirical_snr_calibration(kind, snr):
    # per-symbol gains resolve E|h|^2 over N draws; slow fading would give one draw per block
    x = unit_block(N, 4)
    _, real = ch.transmit(x, ch.ChannelConfig(kind, snr, per_symbol_fading=True), np.random.default_rng(3))
    sig, noise = np.sum(np.abs(real.gain * x) ** 2), np.sum(np.abs(real.noise) ** 2)
    assert abs(10 * math.log10(sig / noise) - snr) < 0.05


def test_transmit_determinism_and_gain_constancy():
    x = unit_block(50)
    cfg = ch.ChannelConfig("rayleigh", 5.0)
    y1, r1 = ch.transmit(x, cfg, np.random.default_rng(9))
    y2, r2 = ch.transmit(x, cfg, np.random.default_rng(9))
    np.testing.assert_array_equal(y1, y2)
    np.testing.assert_array_equal(r1.noise, r2.noise)
    assert np.ndim(r1.gain) == 0
    per_symbol = ch.ChannelConfig("rayleigh", 5.0, per_symbol_fading=True)
    _, r3 = ch.transmit(x, per_symbol, np.random.default_rng(9))
    assert np.shape(r3.gain) == (50,)


def test_unnormalised_block_warns():
    with pytest.warns(UserWarning):
        ch.transmit(np.full(4, 3.0 + 0j), ch.ChannelConfig("awgn", 10.0), np.random.default_rng(0))


def test_equalize():
    x = unit_block(32)
    cfg = ch.ChannelConfig("rician", math.inf)
    y, real = ch.transmit(x, cfg, np.random.default_rng(5))
    np.testing.assert_allclose(ch.equalize(y, real), x, atol=1e-12)
    with pytest.raises(ch.DeepFade, match="channel in deep fade"):
        ch.equalize(y, ch.ChannelRealization(1e-13 + 0j, np.zeros(32)))


def test_noise_is_gaussian():
    n = ch.complex_noise(10**5, 0.5, np.random.default_rng(6))
    assert stats.normaltest(n.real).pvalue > 0.01
    assert np.var(n.real) == pytest.approx(0.25, rel=0.02)


def test_real_pair_interleaving():
    z = np.array([1 + 2j, 3 - 4j])
    np.testing.assert_array_equal(ch.complex_to_reals(z), [1, 2, 3, -4])
    np.testing.assert_array_equal(ch.reals_to_complex(ch.complex_to_reals(z)), z)


def test_noise_variance_definition():
    assert ch.ChannelConfig("awgn", 10.0).noise_variance == pytest.approx(0.1)
    assert ch.ChannelConfig("awgn", math.inf).noise_variance == 0.0
    with pytest.raises(ValueError):
        ch.ChannelConfig("optical")
