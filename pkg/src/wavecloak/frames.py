"""Complex baseband frames, power normalization, and spectrograms."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import (
    DegenerateInputError,
    FrameTooShortError,
    InvalidParameterError,
)


@dataclass(frozen=True)
class IqFrame:
    """A block of complex baseband samples.

    Attributes:
        samples: Complex amplitudes (dimensionless baseband).
        sample_rate: Sampling rate in Hz, > 0.
        payload_range: Optional half-open ``(start, stop)`` index interval
            marking the payload region. For analog waveforms this covers the
            whole frame.
        label: Optional modulation label attached by generators.
    """

    samples: np.ndarray
    sample_rate: float
    payload_range: Optional[Tuple[int, int]] = None
    label: Optional[object] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise InvalidParameterError("samples must be one-dimensional")
        if not self.sample_rate > 0:
            raise InvalidParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.payload_range is not None:
            start, stop = self.payload_range
            if not (0 <= start <= stop <= len(samples)):
                raise InvalidParameterError(
                    f"payload_range {self.payload_range} outside [0, {len(samples)})"
                )
            object.__setattr__(self, "payload_range", (int(start), int(stop)))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def payload(self) -> np.ndarray:
        """Samples inside payload_range (whole frame when unset)."""
        if self.payload_range is None:
            return self.samples
        start, stop = self.payload_range
        return self.samples[start:stop]

    def with_samples(self, samples: np.ndarray) -> "IqFrame":
        return replace(self, samples=np.asarray(samples, dtype=np.complex128))


def mean_power(samples: np.ndarray) -> float:
    return float(np.mean(np.abs(samples) ** 2))


def normalize_power(frame: IqFrame) -> IqFrame:
    """Scale a frame to unit average power, mean(|x|^2) == 1.

    Raises:
        DegenerateInputError: on an empty or all-zero frame.
    """
    if len(frame) == 0:
        raise DegenerateInputError("cannot normalize an empty frame")
    p = mean_power(frame.samples)
    if p == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero frame")
    return frame.with_samples(frame.samples / np.sqrt(p))


def spectrogram(
    frame: IqFrame,
    window_len: int = 128,
    hop: int = 32,
    fft_len: int = 256,
    window: str = "hann",
) -> np.ndarray:
    """Short-time Fourier magnitude of a frame, time x frequency.

    Rows are time slices (``floor((N - window_len)/hop) + 1`` of them), columns
    are fft_len frequency bins in fftshift order (DC centered). Magnitudes are
    scaled by 1/sqrt(fft_len) so that with a rectangular window and
    hop == window_len the summed squared magnitudes equal the time-domain
    energy of the covered samples (unitary DFT convention).

    Raises:
        InvalidParameterError: on inconsistent STFT geometry or a frame
            shorter than window_len.
    """
    if hop < 1:
        raise InvalidParameterError("hop must be >= 1")
    if window_len > fft_len:
        raise InvalidParameterError("window_len must be <= fft_len")
    x = frame.samples
    if len(x) < window_len:
        raise FrameTooShortError(
            f"frame of {len(x)} samples is shorter than window_len={window_len}"
        )
    if window == "hann":
        win = np.hanning(window_len)
    elif window in ("rect", "rectangular"):
        win = np.ones(window_len)
    else:
        raise InvalidParameterError(f"unknown window {window!r}")
    num_slices = (len(x) - window_len) // hop + 1
    starts = np.arange(num_slices) * hop
    segs = np.stack([x[s : s + window_len] * win for s in starts])
    spec = np.fft.fft(segs, n=fft_len, axis=1) / np.sqrt(fft_len)
    return np.abs(np.fft.fftshift(spec, axes=1))


def spectrogram_freqs(fft_len: int, sample_rate: float) -> np.ndarray:
    """Frequency axis (Hz) matching spectrogram columns (DC centered)."""
    return np.fft.fftshift(np.fft.fftfreq(fft_len, d=1.0 / sample_rate))


def spectrogram_times(
    num_samples: int, window_len: int, hop: int, sample_rate: float
) -> np.ndarray:
    """Center time (s) of each spectrogram slice."""
    num_slices = (num_samples - window_len) // hop + 1
    return (np.arange(num_slices) * hop + window_len / 2) / sample_rate


def occupied_bandwidth(samples: np.ndarray, sample_rate: float, fraction: float = 0.99) -> float:
    """Width in Hz of the smallest central band holding `fraction` of the power.

    Computed from the periodogram: bins are sorted by frequency, and the band
    between the lower and upper ``(1 - fraction)/2`` power quantiles is
    returned. Used to verify that obfuscation leaves the spectrum footprint
    essentially unchanged.
    """
    if not 0 < fraction < 1:
        raise InvalidParameterError("fraction must be in (0, 1)")
    x = np.asarray(samples, dtype=np.complex128)
    if len(x) < 2:
        raise FrameTooShortError("need at least 2 samples for a bandwidth estimate")
    psd = np.abs(np.fft.fftshift(np.fft.fft(x))) ** 2
    freqs = np.fft.fftshift(np.fft.fftfreq(len(x), d=1.0 / sample_rate))
    cum = np.cumsum(psd)
    total = cum[-1]
    if total == 0:
        raise DegenerateInputError("all-zero input has no bandwidth")
    tail = (1.0 - fraction) / 2.0
    lo = int(np.searchsorted(cum, tail * total))
    hi = int(np.searchsorted(cum, (1.0 - tail) * total))
    hi = min(hi, len(freqs) - 1)
    return float(freqs[hi] - freqs[lo])
