import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import binomial_ci95, qpsk_ser_theory
from wavecloak.channel import awgn
from wavecloak.errors import (
    InvalidLengthError,
    InvalidParameterError,
    UnsupportedSchemeError,
)
from wavecloak.frames import IqFrame, normalize_power, spectrogram, spectrogram_freqs
from wavecloak.modems import (
    LINEAR_SCHEMES,
    ModulationScheme,
    analog_message,
    bits_to_indices,
    constellation,
    demod_gfsk,
    demod_hard,
    indices_to_bits,
    map_symbols,
    modulate_analog,
    modulate_digital,
    multitone_message,
    symbol_estimates,
)
from wavecloak.pulses import ROOT_RAISED_COSINE, design_pulse


class TestConstellations:
    @pytest.mark.parametrize("scheme", LINEAR_SCHEMES)
    def test_unit_average_energy(self, scheme):
        const = constellation(scheme)
        assert np.mean(np.abs(const.points) ** 2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("scheme", LINEAR_SCHEMES)
    def test_labeling_bijection(self, scheme):
        const = constellation(scheme)
        assert sorted(const.labeling.tolist()) == list(range(const.size))

    @pytest.mark.parametrize("scheme", LINEAR_SCHEMES)
    def test_gray_neighbors_differ_by_one_bit(self, scheme):
        # PSK/PAM neighbors along the ring/line; QAM neighbors along each axis.
        const = constellation(scheme)
        inv = const.index_to_bits_value()
        points = const.points
        for i in range(const.size):
            dists = np.abs(points - points[i])
            dists[i] = np.inf
            j = int(np.argmin(dists))
            assert bin(int(inv[i]) ^ int(inv[j])).count("1") == 1

    def test_qpsk_documented_map(self):
        np.testing.assert_allclose(
            map_symbols([0, 0], ModulationScheme.QPSK),
            [(1 + 1j) / np.sqrt(2)],
            atol=1e-15,
        )

    def test_bpsk_antipodal(self):
        np.testing.assert_allclose(map_symbols([0], ModulationScheme.BPSK), [1.0])
        np.testing.assert_allclose(map_symbols([1], ModulationScheme.BPSK), [-1.0])

    def test_pam4_real_valued(self):
        points = constellation(ModulationScheme.PAM4).points
        assert np.all(points.imag == 0.0)

    def test_map_symbols_rejects_bad_length(self):
        with pytest.raises(InvalidLengthError):
            map_symbols([0, 1, 0], ModulationScheme.QPSK)

    def test_map_symbols_rejects_gfsk_and_analog(self):
        with pytest.raises(UnsupportedSchemeError):
            map_symbols([0, 1], ModulationScheme.GFSK)
        with pytest.raises(UnsupportedSchemeError):
            map_symbols([0, 1], ModulationScheme.BFM)


class TestModulateDigital:
    def test_single_qpsk_symbol_matched_filter(self):
        pulse = design_pulse(ROOT_RAISED_COSINE, 0.5, 10, 8)
        frame = modulate_digital([0, 1], ModulationScheme.QPSK, 8, pulse)
        est = symbol_estimates(frame, pulse)
        expected = map_symbols([0, 1], ModulationScheme.QPSK)[0]
        assert abs(est[0] - expected) < 1e-6

    def test_alternating_bpsk_square_wave(self):
        frame = modulate_digital([0, 1, 0, 1], ModulationScheme.BPSK, 4, pulse=None)
        expected = np.repeat([1.0, -1.0, 1.0, -1.0], 4)
        np.testing.assert_allclose(frame.samples, expected, atol=1e-15)

    def test_gfsk_constant_modulus(self):
        frame = modulate_digital([0, 1, 0, 1], ModulationScheme.GFSK, 8)
        np.testing.assert_allclose(np.abs(frame.samples), 1.0, atol=1e-9)

    def test_steady_state_power_near_unity(self):
        pulse = design_pulse(ROOT_RAISED_COSINE, 0.5, 10, 8)
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, 4000)
        frame = modulate_digital(bits, ModulationScheme.QPSK, 8, pulse)
        power = np.mean(np.abs(frame.samples) ** 2)
        assert power == pytest.approx(1.0, abs=0.05)


class TestDemodHard:
    def test_noiseless_loopback_qpsk(self):
        pulse = design_pulse(ROOT_RAISED_COSINE, 0.5, 10, 8)
        rng = np.random.default_rng(1)
        bits = rng.integers(0, 2, 2000)
        frame = modulate_digital(bits, ModulationScheme.QPSK, 8, pulse)
        got = demod_hard(frame, ModulationScheme.QPSK, pulse)
        want = bits_to_indices(bits, ModulationScheme.QPSK)
        assert np.array_equal(got, want)

    def test_known_gain_compensation(self):
        pulse = design_pulse(ROOT_RAISED_COSINE, 0.5, 10, 8)
        rng = np.random.default_rng(2)
        bits = rng.integers(0, 2, 1000)
        frame = modulate_digital(bits, ModulationScheme.QPSK, 8, pulse)
        h = np.exp(1j * np.pi / 4)
        rotated = frame.with_samples(frame.samples * h)
        got = demod_hard(rotated, ModulationScheme.QPSK, pulse, channel_gain=h)
        assert np.array_equal(got, bits_to_indices(bits, ModulationScheme.QPSK))

    def test_qpsk_awgn_matches_theory(self):
        # Closed-form SER oracle at Es/N0 = 8 dB, 1e5 symbols, 3-sigma gate.
        esn0_db = 8.0
        sps, span = 8, 10
        num_symbols = 100000
        pulse = design_pulse(ROOT_RAISED_COSINE, 0.5, span, sps)
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, 2 * (num_symbols + 2 * span))
        frame = modulate_digital(bits, ModulationScheme.QPSK, sps, pulse)
        frame = normalize_power(
            IqFrame(frame.samples, frame.sample_rate, payload_range=(0, len(frame)))
        )
        noisy = awgn(frame, esn0_db - 10 * math.log10(sps), seed=33)
        got = demod_hard(noisy, ModulationScheme.QPSK, pulse)
        want = bits_to_indices(bits, ModulationScheme.QPSK)
        sl = slice(span, span + num_symbols)
        ser = np.mean(got[sl] != want[sl])
        theory = qpsk_ser_theory(esn0_db)
        sigma = math.sqrt(theory * (1 - theory) / num_symbols)
        assert abs(ser - theory) < 3 * sigma

    def test_gfsk_rejected(self):
        with pytest.raises(UnsupportedSchemeError):
            demod_hard(IqFrame(np.ones(8, dtype=complex), 1.0), ModulationScheme.GFSK)


@settings(max_examples=25, deadline=None)
@given(
    scheme=st.sampled_from(LINEAR_SCHEMES),
    seed=st.integers(0, 2**20),
    num_symbols=st.integers(1, 64),
)
def test_roundtrip_bits_exact(scheme, seed, num_symbols):
    """Noiseless unit-gain loopback recovers the bit stream exactly."""
    pulse = design_pulse(ROOT_RAISED_COSINE, 0.35, 6, 4)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, num_symbols * constellation(scheme).bits_per_symbol)
    frame = modulate_digital(bits, scheme, 4, pulse)
    indices = demod_hard(frame, scheme, pulse)
    np.testing.assert_array_equal(indices_to_bits(indices, scheme), bits)


def test_gfsk_loopback():
    rng = np.random.default_rng(4)
    bits = rng.integers(0, 2, 256)
    frame = modulate_digital(bits, ModulationScheme.GFSK, 8)
    got = demod_gfsk(frame, 8)
    np.testing.assert_array_equal(got, bits)


class TestModulateAnalog:
    def test_zero_message_bfm_constant(self):
        frame = modulate_analog(np.zeros(128), ModulationScheme.BFM)
        np.testing.assert_allclose(frame.samples, np.ones(128), atol=1e-15)

    def test_bfm_constant_modulus(self):
        m = multitone_message(1024, 1000.0, [3.0, 7.0])
        frame = modulate_analog(m, ModulationScheme.BFM, 1000.0)
        np.testing.assert_allclose(np.abs(frame.samples), 1.0, atol=1e-9)

    def test_zero_message_dsb_carrier(self):
        frame = modulate_analog(np.zeros(128), ModulationScheme.DSBAM, mod_index=0.5)
        np.testing.assert_allclose(frame.samples, np.ones(128), atol=1e-15)

    def test_ssb_single_sided(self):
        # Spectrogram oracle: a single-tone upper-sideband signal must keep
        # essentially all energy above DC (image rejection > 30 dB).
        fs = 1000.0
        m = multitone_message(4096, fs, [32 * fs / 256])
        frame = modulate_analog(m, ModulationScheme.SSBAM, fs)
        mat = spectrogram(frame, 256, 256, 256, window="rect")
        freqs = spectrogram_freqs(256, fs)
        power = np.sum(mat**2, axis=0)
        upper = power[freqs > 10].sum()
        lower = power[freqs < -10].sum()
        assert 10 * math.log10(upper / lower) > 30.0

    def test_am_index_validated(self):
        with pytest.raises(InvalidParameterError):
            modulate_analog(np.zeros(64), ModulationScheme.DSBAM, mod_index=0.0)
        with pytest.raises(InvalidParameterError):
            modulate_analog(np.zeros(64), ModulationScheme.DSBAM, mod_index=1.5)

    def test_message_amplitude_validated(self):
        with pytest.raises(InvalidParameterError):
            modulate_analog(2.0 * np.ones(64), ModulationScheme.BFM)

    def test_digital_scheme_rejected(self):
        with pytest.raises(UnsupportedSchemeError):
            modulate_analog(np.zeros(64), ModulationScheme.QPSK)


def test_analog_message_band_limited_and_bounded():
    rng = np.random.default_rng(9)
    m = analog_message(4096, 40e6, rng)
    assert np.max(np.abs(m)) <= 1.0
    spec = np.abs(np.fft.fft(m)) ** 2
    freqs = np.fft.fftfreq(len(m), d=1 / 40e6)
    in_band = spec[np.abs(freqs) <= 2 * 40e6 / 80].sum()
    assert in_band / spec.sum() > 0.99
