import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecloak.errors import (
    DegenerateInputError,
    FrameTooShortError,
    InvalidParameterError,
)
from wavecloak.frames import (
    IqFrame,
    mean_power,
    normalize_power,
    occupied_bandwidth,
    spectrogram,
    spectrogram_freqs,
    spectrogram_times,
)
from wavecloak.obfuscate import ObfuscationParams, obf_waveform, instantaneous_frequency


class TestIqFrame:
    def test_rejects_bad_sample_rate(self):
        with pytest.raises(InvalidParameterError):
            IqFrame(np.ones(4, dtype=complex), 0.0)

    def test_rejects_payload_out_of_bounds(self):
        with pytest.raises(InvalidParameterError):
            IqFrame(np.ones(4, dtype=complex), 1.0, payload_range=(2, 5))

    def test_payload_view(self):
        frame = IqFrame(np.arange(6, dtype=complex), 1.0, payload_range=(2, 5))
        np.testing.assert_array_equal(frame.payload(), np.array([2, 3, 4], dtype=complex))


class TestNormalizePower:
    def test_uniform_scaling(self):
        frame = IqFrame(np.full(16, 2.0 + 0j), 1.0)
        out = normalize_power(frame)
        np.testing.assert_allclose(out.samples, np.ones(16), atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        frame = IqFrame(rng.standard_normal(64) + 1j * rng.standard_normal(64), 1.0)
        once = normalize_power(frame)
        twice = normalize_power(once)
        np.testing.assert_allclose(once.samples, twice.samples, rtol=1e-12)

    def test_random_frame_unit_power(self):
        rng = np.random.default_rng(3)
        frame = IqFrame(rng.standard_normal(1024) + 1j * rng.standard_normal(1024), 1.0)
        out = normalize_power(frame)
        assert mean_power(out.samples) == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(DegenerateInputError):
            normalize_power(IqFrame(np.zeros(8, dtype=complex), 1.0))

    @settings(max_examples=30, deadline=None)
    @given(
        re=st.floats(-5, 5),
        im=st.floats(-5, 5),
        seed=st.integers(0, 2**16),
    )
    def test_scale_invariance(self, re, im, seed):
        c = complex(re, im)
        if abs(c) < 1e-3:
            c = 1.0 + 1.0j
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        base = normalize_power(IqFrame(x, 1.0)).samples
        scaled = normalize_power(IqFrame(c * x, 1.0)).samples
        # Scaling by any non-zero complex c only changes the phase uniformly.
        np.testing.assert_allclose(scaled, base * (c / abs(c)), rtol=1e-10, atol=1e-10)


class TestSpectrogram:
    def test_pure_tone_concentrates(self):
        fs = 1000.0
        tone_hz = 125.0
        t = np.arange(4096) / fs
        frame = IqFrame(np.exp(2j * np.pi * tone_hz * t), fs)
        mat = spectrogram(frame, 128, 32, 256)
        freqs = spectrogram_freqs(256, fs)
        expected_bin = int(np.argmin(np.abs(freqs - tone_hz)))
        peaks = np.argmax(mat, axis=1)
        assert np.all(peaks == expected_bin)

    def test_all_zero(self):
        frame = IqFrame(np.zeros(512, dtype=complex), 1.0)
        mat = spectrogram(frame, 128, 32, 256)
        assert np.all(mat == 0.0)

    def test_shape_and_nonnegative(self):
        rng = np.random.default_rng(5)
        frame = IqFrame(rng.standard_normal(1000) + 0j, 1.0)
        mat = spectrogram(frame, 128, 32, 256)
        assert mat.shape == ((1000 - 128) // 32 + 1, 256)
        assert np.all(mat >= 0.0)

    def test_parseval_rectangular(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
        frame = IqFrame(x, 1.0)
        mat = spectrogram(frame, 128, 128, 128, window="rect")
        spectral = np.sum(mat**2)
        temporal = np.sum(np.abs(x) ** 2)
        assert spectral == pytest.approx(temporal, rel=1e-9)

    def test_too_short_frame(self):
        with pytest.raises(FrameTooShortError):
            spectrogram(IqFrame(np.ones(64, dtype=complex), 1.0), 128, 32, 256)

    def test_bad_geometry(self):
        frame = IqFrame(np.ones(512, dtype=complex), 1.0)
        with pytest.raises(InvalidParameterError):
            spectrogram(frame, 512, 32, 256)
        with pytest.raises(InvalidParameterError):
            spectrogram(frame, 128, 0, 256)

    def test_obfuscated_tone_tracks_instantaneous_frequency(self):
        # The peak-bin trajectory of a cloaked carrier must follow
        # delta_f*cos(2*pi*f_m*t) evaluated at each slice center.
        fs = 1.0
        params = ObfuscationParams(delta_f=0.2, f_m=fs / 8192.0)
        n = 8192
        window_len, hop, fft_len = 128, 64, 512
        carrier = np.ones(n, dtype=complex)
        cloaked = carrier * obf_waveform(params, n, fs)
        mat = spectrogram(IqFrame(cloaked, fs), window_len, hop, fft_len)
        freqs = spectrogram_freqs(fft_len, fs)
        times = spectrogram_times(n, window_len, hop, fs)
        expected = instantaneous_frequency(params, times)
        peak_freqs = freqs[np.argmax(mat, axis=1)]
        bin_width = fs / fft_len
        # Frequency drift across one window blurs the ridge; allow for it.
        drift = 2.0 * np.pi * params.f_m * params.delta_f * (window_len / 2) / fs
        tol = 2 * bin_width + drift
        assert np.max(np.abs(peak_freqs - expected)) <= tol


class TestOccupiedBandwidth:
    def test_tone_is_narrow(self):
        fs = 1000.0
        tone = 512 * fs / 4096  # exact DFT bin, no leakage
        t = np.arange(4096) / fs
        bw = occupied_bandwidth(np.exp(2j * np.pi * tone * t), fs)
        assert bw < 5.0

    def test_white_noise_is_wide(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
        bw = occupied_bandwidth(x, 1000.0)
        assert bw > 900.0
