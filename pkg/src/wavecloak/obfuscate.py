"""Unit-modulus FM obfuscating waveform: generation, mixing, and removal.

The cloaking waveform is exp(j * (delta_f/f_m) * sin(2*pi*f_m*t)): a pure
phase rotation whose instantaneous frequency swings between -delta_f and
+delta_f at rate f_m. Mixed into the payload it leaves instantaneous power
untouched; a receiver that knows (delta_f, f_m, t0) removes it exactly by
conjugate multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, MissingPayloadRangeError
from .frames import IqFrame, occupied_bandwidth


@dataclass(frozen=True)
class ObfuscationParams:
    """Parameters of the cloaking waveform.

    Attributes:
        delta_f: Maximum instantaneous frequency shift, Hz, > 0.
        f_m: Oscillation rate of the frequency sweep, Hz, > 0.
        t0: Time origin (s) of the waveform clock relative to the first
            payload sample. Frames reset the clock at their payload start, so
            t0 = 0 reproduces the transmit-side mixing.
    """

    delta_f: float
    f_m: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.delta_f > 0:
            raise InvalidParameterError(f"delta_f must be > 0, got {self.delta_f}")
        if not self.f_m > 0:
            raise InvalidParameterError(f"f_m must be > 0, got {self.f_m}")
        beta = self.delta_f / self.f_m
        if not np.isfinite(beta):
            raise InvalidParameterError("delta_f / f_m must be finite")

    @property
    def phase_index(self) -> float:
        """Peak phase excursion delta_f / f_m, radians."""
        return self.delta_f / self.f_m


def obf_waveform(params: ObfuscationParams, num_samples: int, sample_rate: float) -> np.ndarray:
    """Sampled cloaking waveform; sample n is taken at t0 + n/sample_rate.

    Every value has unit modulus by construction (exponential of a purely
    imaginary argument).
    """
    if num_samples < 1:
        raise InvalidParameterError(f"num_samples must be >= 1, got {num_samples}")
    if not sample_rate > 0:
        raise InvalidParameterError(f"sample_rate must be > 0, got {sample_rate}")
    t = params.t0 + np.arange(num_samples) / sample_rate
    phase = params.phase_index * np.sin(2.0 * np.pi * params.f_m * t)
    return np.exp(1j * phase)


def instantaneous_frequency(params: ObfuscationParams, t: np.ndarray) -> np.ndarray:
    """Baseband instantaneous frequency delta_f * cos(2*pi*f_m*t), Hz."""
    return params.delta_f * np.cos(2.0 * np.pi * params.f_m * np.asarray(t))


def _payload_slice(frame: IqFrame) -> slice:
    if frame.payload_range is None:
        raise MissingPayloadRangeError(
            "frame has no payload_range; set it to the payload interval "
            "(the whole frame for analog waveforms)"
        )
    start, stop = frame.payload_range
    return slice(start, stop)


def apply(frame: IqFrame, params: ObfuscationParams) -> IqFrame:
    """Mix the cloaking waveform into the payload region of a frame.

    Samples outside payload_range pass through untouched; the waveform clock
    starts at the first payload sample. |out[i]| == |in[i]| for every i.
    """
    region = _payload_slice(frame)
    out = frame.samples.copy()
    num = region.stop - region.start
    if num > 0:
        out[region] *= obf_waveform(params, num, frame.sample_rate)
    return frame.with_samples(out)


def remove(frame: IqFrame, params: ObfuscationParams) -> IqFrame:
    """Undo apply() by conjugate multiplication over the payload region.

    For r = h * w * x + n this yields h * x + n * conj(w): the noise is only
    rotated sample by sample, so its modulus (and power) is preserved.
    """
    region = _payload_slice(frame)
    out = frame.samples.copy()
    num = region.stop - region.start
    if num > 0:
        out[region] *= np.conj(obf_waveform(params, num, frame.sample_rate))
    return frame.with_samples(out)


def bandwidth_expansion(
    frame: IqFrame, params: ObfuscationParams, fraction: float = 0.99
) -> float:
    """Ratio of 99%-occupied bandwidth after mixing to before.

    A ratio near 1 confirms the cloaked waveform still fits the original
    channel; values well above 1 flag parameter choices that would not
    survive the receiver's band filter.
    """
    region = _payload_slice(frame)
    clean = frame.samples[region]
    mixed = clean * obf_waveform(params, len(clean), frame.sample_rate)
    bw_clean = occupied_bandwidth(clean, frame.sample_rate, fraction)
    bw_mixed = occupied_bandwidth(mixed, frame.sample_rate, fraction)
    return bw_mixed / bw_clean
