import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecloak.channel import multipath
from wavecloak.errors import InvalidLengthError, InvalidParameterError
from wavecloak.frames import IqFrame
from wavecloak.modems import ModulationScheme, map_symbols
from wavecloak.obfuscate import ObfuscationParams, apply, remove
from wavecloak.ofdm import (
    OfdmConfig,
    channel_frequency_response,
    ofdm_demodulate,
    ofdm_equalize,
    ofdm_modulate,
)


def random_qam_grid(rng, num_symbols, n):
    bits = rng.integers(0, 2, num_symbols * n * 6)
    return map_symbols(bits, ModulationScheme.QAM64).reshape(num_symbols, n)


class TestOfdmConfig:
    def test_defaults_match_table(self):
        cfg = OfdmConfig()
        assert cfg.num_subcarriers == 64
        assert cfg.cp_len == 16
        assert cfg.symbol_len == 80

    def test_cp_must_be_shorter_than_symbol(self):
        with pytest.raises(InvalidParameterError):
            OfdmConfig(num_subcarriers=16, cp_len=16)

    def test_needs_a_data_carrier(self):
        with pytest.raises(InvalidParameterError):
            OfdmConfig(num_subcarriers=4, cp_len=1, data_carrier_mask=np.zeros(4, bool))


class TestModulate:
    def test_dc_subcarrier_constant_body(self):
        cfg = OfdmConfig(num_subcarriers=64, cp_len=16)
        X = np.zeros(64, dtype=complex)
        X[0] = 1.0
        frame = ofdm_modulate(X, cfg)
        body = frame.samples[16:]
        np.testing.assert_allclose(body, np.full(64, 1 / 8), atol=1e-12)

    def test_single_subcarrier_constant_modulus(self):
        cfg = OfdmConfig(num_subcarriers=64, cp_len=16)
        X = np.zeros(64, dtype=complex)
        X[5] = 1.0
        frame = ofdm_modulate(X, cfg)
        np.testing.assert_allclose(np.abs(frame.samples), 1 / 8, atol=1e-12)
        body = frame.samples[16:]
        expected = np.exp(2j * np.pi * 5 * np.arange(64) / 64) / 8
        np.testing.assert_allclose(body, expected, atol=1e-12)

    def test_roundtrip_random_qam(self):
        cfg = OfdmConfig()
        rng = np.random.default_rng(0)
        X = random_qam_grid(rng, 4, 64)
        back = ofdm_demodulate(ofdm_modulate(X, cfg), cfg)
        np.testing.assert_allclose(back, X, atol=1e-10)

    def test_wrong_length_rejected(self):
        cfg = OfdmConfig()
        with pytest.raises(InvalidLengthError):
            ofdm_modulate(np.ones(63, dtype=complex), cfg)


class TestDemodulate:
    def test_flat_gain_passes_through(self):
        cfg = OfdmConfig()
        rng = np.random.default_rng(1)
        X = random_qam_grid(rng, 2, 64)
        frame = ofdm_modulate(X, cfg)
        h = 0.7 - 0.4j
        faded = frame.with_samples(frame.samples * h)
        got = ofdm_demodulate(faded, cfg)
        np.testing.assert_allclose(got, h * X, atol=1e-10)

    def test_two_tap_channel_is_circular(self):
        # Circular-convolution oracle: a channel shorter than the CP acts as
        # H[k] = DFT(taps) per subcarrier.
        cfg = OfdmConfig()
        rng = np.random.default_rng(2)
        X = random_qam_grid(rng, 3, 64)
        taps = np.array([1.0, 0.5 - 0.25j])
        frame = ofdm_modulate(X, cfg)
        faded = multipath(frame, taps)
        got = ofdm_demodulate(faded, cfg)
        H = channel_frequency_response(taps, 64)
        # First symbol's head is a startup transient of the linear
        # convolution; it lives entirely inside that symbol's CP.
        np.testing.assert_allclose(got, H[None, :] * X, atol=1e-9)

    def test_length_must_be_multiple(self):
        cfg = OfdmConfig()
        with pytest.raises(InvalidLengthError):
            ofdm_demodulate(IqFrame(np.ones(81, dtype=complex), cfg.sample_rate), cfg)


class TestEqualize:
    def test_all_ones_identity(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        out, erased = ofdm_equalize(X, np.ones(64))
        np.testing.assert_allclose(out, X, atol=1e-12)
        assert not erased.any()

    def test_constant_phase_derotation(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        H = np.full(64, np.exp(1j * 0.3))
        out, _ = ofdm_equalize(H * X, H)
        np.testing.assert_allclose(out, X, atol=1e-12)

    def test_recovers_through_random_two_tap_channel(self):
        cfg = OfdmConfig()
        rng = np.random.default_rng(5)
        X = random_qam_grid(rng, 2, 64)
        taps = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) * [1.0, 0.4]
        frame = ofdm_modulate(X, cfg)
        faded = multipath(frame, taps)
        got = ofdm_demodulate(faded, cfg)
        H = channel_frequency_response(taps, 64)
        eq, erased = ofdm_equalize(got, H)
        assert not erased.any()
        np.testing.assert_allclose(eq, X, atol=1e-9)

    def test_singular_subcarrier_erased(self):
        X = np.ones(4, dtype=complex)
        H = np.array([1.0, 0.0, 1.0, 1e-12])
        out, erased = ofdm_equalize(X, H)
        np.testing.assert_array_equal(erased, [False, True, False, True])
        assert out[1] == 0.0 and out[3] == 0.0


class TestInvariants:
    @settings(max_examples=12, deadline=None)
    @given(
        n=st.sampled_from([2, 7, 64, 257, 1024, 4096]),
        seed=st.integers(0, 2**16),
    )
    def test_roundtrip_any_size(self, n, seed):
        rng = np.random.default_rng(seed)
        cfg = OfdmConfig(num_subcarriers=n, cp_len=min(16, n - 1), subcarrier_spacing=1e3)
        X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        back = ofdm_demodulate(ofdm_modulate(X, cfg), cfg)
        np.testing.assert_allclose(back[0], X, atol=1e-10 * max(1.0, np.max(np.abs(X))))

    def test_unitary_power(self):
        cfg = OfdmConfig()
        rng = np.random.default_rng(6)
        X = random_qam_grid(rng, 8, 64)
        frame = ofdm_modulate(X, cfg)
        body = frame.samples.reshape(8, 80)[:, 16:]
        assert np.mean(np.abs(body) ** 2) == pytest.approx(
            np.mean(np.abs(X) ** 2), rel=1e-10
        )

    def test_cloaking_interop(self):
        # Removing the cloak in the time domain before the DFT must match the
        # demodulation of the never-cloaked payload.
        cfg = OfdmConfig()
        rng = np.random.default_rng(7)
        X = random_qam_grid(rng, 13, 64)
        frame = ofdm_modulate(X, cfg)
        frame = IqFrame(frame.samples, frame.sample_rate, payload_range=(0, len(frame)))
        params = ObfuscationParams(4.6875e5, 1.5625e5)
        cloaked = apply(frame, params)
        recovered = remove(cloaked, params)
        clean = ofdm_demodulate(frame, cfg)
        via_removal = ofdm_demodulate(recovered, cfg)
        np.testing.assert_allclose(via_removal, clean, atol=1e-9)
