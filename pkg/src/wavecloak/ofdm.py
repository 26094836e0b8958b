"""OFDM modulation, demodulation, and one-tap equalization.

The symbol body is the unitary inverse DFT x[n] = (1/sqrt(N)) * sum_k X[k]
exp(j*2*pi*k*n/N), preceded by a cyclic prefix copied from its tail. The CP
turns a linear channel shorter than itself into a circular one, so a known
frequency response is undone per subcarrier.

Note on durations: the symbol body lasts N/sample_rate seconds (sample_rate =
N * subcarrier_spacing); quoting the duration as N * subcarrier_spacing is
dimensionally inconsistent and not used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidLengthError, InvalidParameterError
from .frames import IqFrame


@dataclass(frozen=True)
class OfdmConfig:
    """Geometry of one OFDM symbol.

    data_carrier_mask marks subcarriers that carry payload symbols; the
    default uses every subcarrier for data.
    """

    num_subcarriers: int = 64
    cp_len: int = 16
    subcarrier_spacing: float = 625e3
    data_carrier_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.num_subcarriers < 1:
            raise InvalidParameterError("num_subcarriers must be >= 1")
        if not 0 <= self.cp_len < self.num_subcarriers:
            raise InvalidParameterError("cp_len must satisfy 0 <= cp_len < num_subcarriers")
        if not self.subcarrier_spacing > 0:
            raise InvalidParameterError("subcarrier_spacing must be > 0")
        mask = self.data_carrier_mask
        if mask is None:
            mask = np.ones(self.num_subcarriers, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (self.num_subcarriers,):
                raise InvalidParameterError("data_carrier_mask length must equal num_subcarriers")
            if not mask.any():
                raise InvalidParameterError("at least one data subcarrier is required")
        object.__setattr__(self, "data_carrier_mask", mask)

    @property
    def symbol_len(self) -> int:
        return self.num_subcarriers + self.cp_len

    @property
    def sample_rate(self) -> float:
        return self.num_subcarriers * self.subcarrier_spacing

    @property
    def num_data_carriers(self) -> int:
        return int(np.count_nonzero(self.data_carrier_mask))


def ofdm_modulate(freq_symbols: np.ndarray, config: OfdmConfig) -> IqFrame:
    """Unitary-IDFT modulate one or more OFDM symbols and prepend CPs.

    freq_symbols has shape (N,) or (num_symbols, N); the output frame holds
    the serialized CP + body samples of every symbol in order.
    """
    X = np.atleast_2d(np.asarray(freq_symbols, dtype=np.complex128))
    n = config.num_subcarriers
    if X.shape[1] != n:
        raise InvalidLengthError(f"expected {n} subcarrier values per symbol, got {X.shape[1]}")
    body = np.fft.ifft(X, axis=1) * np.sqrt(n)
    if config.cp_len:
        with_cp = np.concatenate([body[:, -config.cp_len :], body], axis=1)
    else:
        with_cp = body
    return IqFrame(with_cp.reshape(-1), config.sample_rate)


def ofdm_demodulate(frame: IqFrame, config: OfdmConfig) -> np.ndarray:
    """Strip CPs and forward-DFT back to subcarrier symbols.

    Returns an array of shape (num_symbols, N): the inverse of ofdm_modulate
    in the noiseless case.
    """
    x = frame.samples
    step = config.symbol_len
    if len(x) == 0 or len(x) % step != 0:
        raise InvalidLengthError(
            f"frame length {len(x)} is not a positive multiple of N+cp = {step}"
        )
    blocks = x.reshape(-1, step)[:, config.cp_len :]
    return np.fft.fft(blocks, axis=1) / np.sqrt(config.num_subcarriers)


def channel_frequency_response(taps: np.ndarray, num_subcarriers: int) -> np.ndarray:
    """Per-subcarrier response H[k] of a time-domain tap vector."""
    return np.fft.fft(np.asarray(taps, dtype=np.complex128), n=num_subcarriers)


def ofdm_equalize(
    freq_symbols: np.ndarray,
    channel_freq_response: np.ndarray,
    min_gain: float = 1e-9,
) -> Tuple[np.ndarray, np.ndarray]:
    """One-tap equalization: output[k] = input[k] / H[k].

    Subcarriers with |H[k]| <= min_gain cannot be inverted; they are zeroed
    and reported through the returned boolean `erased` mask instead of
    amplifying noise without bound.
    """
    X = np.asarray(freq_symbols, dtype=np.complex128)
    H = np.asarray(channel_freq_response, dtype=np.complex128)
    if X.shape[-1] != H.shape[-1]:
        raise InvalidLengthError("channel response length must match subcarrier count")
    erased = np.abs(H) <= min_gain
    safe = np.where(erased, 1.0, H)
    out = X / safe
    if erased.any():
        out = np.where(np.broadcast_to(erased, out.shape), 0.0, out)
    return out, erased
