"""Bit-to-waveform modulators and waveform-to-bit demodulators.

Digital linear schemes (PSK/QAM/PAM) use binary-reflected Gray labelings;
the tables are committed in docs/constellations.md. GFSK and the analog
schemes follow separate, non-linear paths.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import hilbert

from .errors import (
    InvalidLengthError,
    InvalidParameterError,
    UnsupportedSchemeError,
)
from .frames import IqFrame
from .pulses import PulseShape, filter_and_resample, gaussian_taps, matched_filter


class ModulationScheme(enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    PSK8 = "8psk"
    QAM16 = "16qam"
    QAM64 = "64qam"
    PAM4 = "pam4"
    GFSK = "gfsk"
    BFM = "b-fm"
    DSBAM = "dsb-am"
    SSBAM = "ssb-am"

    @property
    def is_analog(self) -> bool:
        return self in (ModulationScheme.BFM, ModulationScheme.DSBAM, ModulationScheme.SSBAM)

    @property
    def is_digital(self) -> bool:
        return not self.is_analog

    @property
    def is_linear(self) -> bool:
        """Digital schemes with a complex symbol alphabet (everything but GFSK)."""
        return self.is_digital and self is not ModulationScheme.GFSK


DIGITAL_SCHEMES = tuple(s for s in ModulationScheme if s.is_digital)
ANALOG_SCHEMES = tuple(s for s in ModulationScheme if s.is_analog)
LINEAR_SCHEMES = tuple(s for s in ModulationScheme if s.is_linear)
OFDM_SCHEMES = (
    ModulationScheme.BPSK,
    ModulationScheme.QPSK,
    ModulationScheme.PSK8,
    ModulationScheme.QAM16,
    ModulationScheme.QAM64,
)

# GFSK shaping, fixed toolkit-wide: 2-level, Gaussian BT product and
# modulation index below.
GFSK_BT = 0.35
GFSK_MOD_INDEX = 0.5
GFSK_SPAN_SYMBOLS = 4


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _gray_inverse(n: int) -> int:
    mask = n
    while mask:
        mask >>= 1
        n ^= mask
    return n


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy symbol alphabet with a Gray bits->point map."""

    points: np.ndarray
    bits_per_symbol: int
    labeling: np.ndarray  # labeling[bits_value] = point index

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.complex128))
        object.__setattr__(self, "labeling", np.asarray(self.labeling, dtype=np.int64))

    @property
    def size(self) -> int:
        return len(self.points)

    def index_to_bits_value(self) -> np.ndarray:
        inv = np.empty(self.size, dtype=np.int64)
        inv[self.labeling] = np.arange(self.size)
        return inv


def _psk(order: int) -> Constellation:
    bps = int(np.log2(order))
    angles = 2.0 * np.pi * np.arange(order) / order
    if order == 4:
        angles = angles + np.pi / 4.0  # QPSK on the diagonals
    points = np.exp(1j * angles)
    labeling = np.array([_gray_inverse(m) for m in range(order)])
    return Constellation(points, bps, labeling)


def _pam(order: int) -> Constellation:
    bps = int(np.log2(order))
    levels = 2.0 * np.arange(order) - (order - 1)
    levels = levels / np.sqrt(np.mean(levels**2))
    labeling = np.array([_gray_inverse(m) for m in range(order)])
    return Constellation(levels.astype(np.complex128), bps, labeling)


def _square_qam(order: int) -> Constellation:
    side = int(np.sqrt(order))
    bps_axis = int(np.log2(side))
    levels = 2.0 * np.arange(side) - (side - 1)
    points = (levels[:, None] + 1j * levels[None, :]).reshape(-1)
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    labeling = np.empty(order, dtype=np.int64)
    for m in range(order):
        i_idx = _gray_inverse(m >> bps_axis)
        q_idx = _gray_inverse(m & (side - 1))
        labeling[m] = i_idx * side + q_idx
    return Constellation(points, 2 * bps_axis, labeling)


_CONSTELLATIONS = {
    ModulationScheme.BPSK: Constellation(np.array([1.0, -1.0]), 1, np.array([0, 1])),
    ModulationScheme.QPSK: _psk(4),
    ModulationScheme.PSK8: _psk(8),
    ModulationScheme.QAM16: _square_qam(16),
    ModulationScheme.QAM64: _square_qam(64),
    ModulationScheme.PAM4: _pam(4),
}


def constellation(scheme: ModulationScheme) -> Constellation:
    """The committed constellation for a linear digital scheme."""
    try:
        return _CONSTELLATIONS[scheme]
    except KeyError:
        raise UnsupportedSchemeError(f"{scheme.name} has no linear constellation") from None


def _bits_to_groups(bits: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1:
        raise InvalidParameterError("bits must be one-dimensional")
    if np.any((bits != 0) & (bits != 1)):
        raise InvalidParameterError("bits must be 0/1 valued")
    if len(bits) % bits_per_symbol != 0:
        raise InvalidLengthError(
            f"bit count {len(bits)} not divisible by bits_per_symbol={bits_per_symbol}"
        )
    groups = bits.reshape(-1, bits_per_symbol)
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return groups @ weights


def bits_to_indices(bits: Sequence[int], scheme: ModulationScheme) -> np.ndarray:
    """Gray-map a bit sequence (MSB first within each group) to point indices."""
    const = constellation(scheme)
    values = _bits_to_groups(np.asarray(bits), const.bits_per_symbol)
    return const.labeling[values]


def indices_to_bits(indices: Sequence[int], scheme: ModulationScheme) -> np.ndarray:
    """Inverse of bits_to_indices."""
    const = constellation(scheme)
    values = const.index_to_bits_value()[np.asarray(indices, dtype=np.int64)]
    bps = const.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((values[:, None] >> shifts[None, :]) & 1).reshape(-1)


def map_symbols(bits: Sequence[int], scheme: ModulationScheme) -> np.ndarray:
    """Map bits to complex constellation symbols via the Gray labeling.

    Raises:
        UnsupportedSchemeError: for GFSK and analog schemes.
        InvalidLengthError: when len(bits) is not a multiple of bits/symbol.
    """
    if not scheme.is_linear:
        raise UnsupportedSchemeError(f"{scheme.name} is not a linear digital scheme")
    return constellation(scheme).points[bits_to_indices(bits, scheme)]


def nearest_point_indices(values: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    """Minimum-distance decisions against the scheme's constellation."""
    points = constellation(scheme).points
    values = np.asarray(values, dtype=np.complex128)
    return np.argmin(np.abs(values[:, None] - points[None, :]), axis=1)


def _modulate_gfsk(bits: np.ndarray, samples_per_symbol: int, sample_rate: float) -> IqFrame:
    nrz = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    held = np.repeat(nrz, samples_per_symbol)
    g = gaussian_taps(GFSK_BT, GFSK_SPAN_SYMBOLS, samples_per_symbol)
    delay = (len(g) - 1) // 2
    smoothed = np.convolve(held, g)[delay : delay + len(held)]
    freq_cycles = (GFSK_MOD_INDEX / (2.0 * samples_per_symbol)) * smoothed
    phase = 2.0 * np.pi * np.cumsum(freq_cycles)
    return IqFrame(np.exp(1j * phase), sample_rate, label=ModulationScheme.GFSK)


def modulate_digital(
    bits: Sequence[int],
    scheme: ModulationScheme,
    samples_per_symbol: int = 8,
    pulse: Optional[PulseShape] = None,
    sample_rate: float = 1.0,
) -> IqFrame:
    """Modulate a bit sequence at samples_per_symbol samples per symbol.

    Linear schemes are pulse shaped with `pulse` (zero-order hold when None)
    and scaled for unit steady-state average power. GFSK follows the
    Gaussian-filtered continuous-phase path and is constant modulus.
    """
    if not scheme.is_digital:
        raise UnsupportedSchemeError(f"{scheme.name} is analog; use modulate_analog")
    bits = np.asarray(bits, dtype=np.int64)
    if scheme is ModulationScheme.GFSK:
        if np.any((bits != 0) & (bits != 1)):
            raise InvalidParameterError("bits must be 0/1 valued")
        return _modulate_gfsk(bits, samples_per_symbol, sample_rate)
    symbols = map_symbols(bits, scheme)
    if pulse is None:
        samples = np.repeat(symbols, samples_per_symbol)
    else:
        if pulse.samples_per_symbol != samples_per_symbol:
            raise InvalidParameterError(
                "pulse.samples_per_symbol disagrees with samples_per_symbol"
            )
        # Full burst: the complete pulse response of every symbol is kept, so
        # symbol k is centered at k*sps + pulse.group_delay.
        shaped = filter_and_resample(
            IqFrame(symbols, sample_rate / samples_per_symbol),
            pulse,
            samples_per_symbol,
            trim="none",
        )
        samples = shaped.samples * np.sqrt(samples_per_symbol)
    return IqFrame(samples, sample_rate, label=scheme)


def symbol_estimates(
    frame: IqFrame,
    pulse: Optional[PulseShape],
    channel_gain: complex = 1.0,
) -> np.ndarray:
    """Matched-filter and sample a frame back to unit-scale symbol estimates.

    Assumes the modulate_digital burst convention: symbol k is centered at
    k*sps + pulse.group_delay, and only fully-supported symbols are returned.
    With a matched root pair the estimates are ISI-free.
    """
    if channel_gain == 0:
        raise InvalidParameterError("channel_gain must be non-zero")
    y = frame.samples / channel_gain
    if pulse is None:
        return y
    sps = pulse.samples_per_symbol
    num_symbols = (len(y) - len(pulse.taps) + 1) // sps
    if num_symbols <= 0:
        return np.empty(0, dtype=np.complex128)
    z = matched_filter(y, pulse) / np.sqrt(sps)
    return z[pulse.group_delay + sps * np.arange(num_symbols)]


def demod_hard(
    frame: IqFrame,
    scheme: ModulationScheme,
    pulse: Optional[PulseShape] = None,
    channel_gain: complex = 1.0,
) -> np.ndarray:
    """Matched filter, symbol sampling, gain compensation, hard decisions.

    Returns point indices (see indices_to_bits for the bit view).

    Raises:
        UnsupportedSchemeError: for GFSK (see demod_gfsk) and analog schemes.
    """
    if not scheme.is_linear:
        raise UnsupportedSchemeError(
            f"{scheme.name} needs its own demodulation path, not demod_hard"
        )
    est = symbol_estimates(frame, pulse, channel_gain)
    return nearest_point_indices(est, scheme)


def demod_gfsk(frame: IqFrame, samples_per_symbol: int = 8) -> np.ndarray:
    """Discriminator + per-symbol integration + threshold detection for GFSK."""
    x = frame.samples
    if len(x) < 2 * samples_per_symbol:
        raise InvalidLengthError("frame too short for GFSK detection")
    inst_freq = np.angle(x[1:] * np.conj(x[:-1]))
    num_symbols = len(x) // samples_per_symbol
    bits = np.empty(num_symbols, dtype=np.int64)
    for k in range(num_symbols):
        window = inst_freq[k * samples_per_symbol : (k + 1) * samples_per_symbol]
        bits[k] = 0 if np.sum(window) > 0 else 1
    return bits


def modulate_analog(
    message: Sequence[float],
    scheme: ModulationScheme,
    sample_rate: float = 1.0,
    deviation_hz: Optional[float] = None,
    mod_index: float = 0.5,
    sideband: str = "upper",
) -> IqFrame:
    """Analog modulation of a real message with |message| <= 1.

    B-FM integrates the message into a constant-modulus phase (peak deviation
    `deviation_hz`, default sample_rate/40). DSB-AM emits 1 + mod_index *
    message; SSB-AM emits the analytic-signal single sideband.
    """
    if not scheme.is_analog:
        raise UnsupportedSchemeError(f"{scheme.name} is digital; use modulate_digital")
    m = np.asarray(message, dtype=np.float64)
    if m.ndim != 1 or len(m) == 0:
        raise InvalidParameterError("message must be a non-empty real sequence")
    if np.max(np.abs(m)) > 1.0 + 1e-12:
        raise InvalidParameterError("message amplitude must satisfy |message| <= 1")
    if scheme is ModulationScheme.BFM:
        dev = sample_rate / 40.0 if deviation_hz is None else deviation_hz
        if dev <= 0:
            raise InvalidParameterError("deviation_hz must be > 0")
        phase = 2.0 * np.pi * dev * np.concatenate(([0.0], np.cumsum(m)[:-1])) / sample_rate
        samples = np.exp(1j * phase)
    elif scheme is ModulationScheme.DSBAM:
        if not 0.0 < mod_index <= 1.0:
            raise InvalidParameterError(f"mod_index must be in (0, 1], got {mod_index}")
        samples = (1.0 + mod_index * m).astype(np.complex128)
    else:  # SSB-AM
        if not 0.0 < mod_index <= 1.0:
            raise InvalidParameterError(f"mod_index must be in (0, 1], got {mod_index}")
        analytic = hilbert(m)
        if sideband == "upper":
            samples = analytic
        elif sideband == "lower":
            samples = np.conj(analytic)
        else:
            raise InvalidParameterError(f"unknown sideband {sideband!r}")
    return IqFrame(samples, sample_rate, label=scheme)


def analog_message(
    num_samples: int,
    sample_rate: float,
    rng: np.random.Generator,
    cutoff_hz: Optional[float] = None,
    peak: float = 0.95,
) -> np.ndarray:
    """Band-limited Gaussian noise message, scaled to the requested peak.

    Default cutoff is a tenth of the symbol-rate equivalent at 8 samples per
    symbol, i.e. sample_rate/80.
    """
    if num_samples < 1:
        raise InvalidParameterError("num_samples must be >= 1")
    cutoff = sample_rate / 80.0 if cutoff_hz is None else cutoff_hz
    if not 0 < cutoff < sample_rate / 2:
        raise InvalidParameterError("cutoff_hz must be within (0, sample_rate/2)")
    taps = _lowpass_taps(129, cutoff, sample_rate)
    white = rng.standard_normal(num_samples + len(taps) - 1)
    m = np.convolve(white, taps, mode="valid")
    return m * (peak / np.max(np.abs(m)))


def multitone_message(
    num_samples: int,
    sample_rate: float,
    freqs_hz: Sequence[float],
    peak: float = 0.95,
) -> np.ndarray:
    """Deterministic multitone message for reproducible analog tests."""
    t = np.arange(num_samples) / sample_rate
    m = np.sum([np.cos(2.0 * np.pi * f * t) for f in freqs_hz], axis=0)
    return m * (peak / np.max(np.abs(m)))


def _lowpass_taps(num_taps: int, cutoff_hz: float, sample_rate: float) -> np.ndarray:
    n = np.arange(num_taps) - (num_taps - 1) / 2.0
    taps = 2.0 * cutoff_hz / sample_rate * np.sinc(2.0 * cutoff_hz / sample_rate * n)
    taps *= np.hamming(num_taps)
    return taps / np.sum(taps)
