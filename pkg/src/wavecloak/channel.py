"""Channel models and equalizers for the single-carrier ISI case.

All randomness flows through explicit seeds; repeated calls with the same
inputs are bit-identical. Channels act on the already-cloaked waveform:
pipelines mix the obfuscating waveform first, then fade, then add noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    InvalidParameterError,
    StateSpaceTooLargeError,
)
from .frames import IqFrame, mean_power
from .modems import ModulationScheme, constellation
from .pulses import PulseShape

MLSD_MAX_STATES = 4096


@dataclass(frozen=True)
class ChannelSpec:
    """One channel realization: AWGN level plus flat gain or tap vector."""

    kind: str  # "awgn" | "flat" | "multipath"
    snr_db: float = math.inf
    h: Optional[complex] = None
    taps: Optional[np.ndarray] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("awgn", "flat", "multipath"):
            raise InvalidParameterError(f"unknown channel kind {self.kind!r}")
        if self.kind == "flat":
            if self.h is None or self.h == 0:
                raise InvalidParameterError("flat channel requires a non-zero gain h")
            if self.taps is not None:
                raise InvalidParameterError("flat channel must not carry taps")
        elif self.kind == "multipath":
            if self.taps is None:
                raise InvalidParameterError("multipath channel requires taps")
            taps = np.asarray(self.taps, dtype=np.complex128)
            if taps.ndim != 1 or len(taps) == 0 or taps[0] == 0:
                raise InvalidParameterError("taps must be non-empty with a non-zero first tap")
            object.__setattr__(self, "taps", taps)
            if self.h is not None:
                raise InvalidParameterError("multipath channel must not carry a flat gain")
        else:
            if self.h is not None or self.taps is not None:
                raise InvalidParameterError("awgn channel carries only snr_db and seed")


def awgn(frame: IqFrame, snr_db: float, seed: int) -> IqFrame:
    """Add circularly-symmetric complex Gaussian noise at the requested SNR.

    Signal power is measured over the payload region (the whole frame when no
    payload_range is set); per-sample noise variance is P / 10^(snr/10).
    snr_db = +inf returns the frame unchanged.
    """
    if len(frame) == 0:
        raise DegenerateInputError("cannot add noise to an empty frame")
    if math.isinf(snr_db) and snr_db > 0:
        return frame
    p_signal = mean_power(frame.payload())
    if p_signal == 0.0:
        raise DegenerateInputError("zero-power frame has no defined SNR")
    sigma2 = p_signal / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(frame)) + 1j * rng.standard_normal(len(frame))
    noise *= np.sqrt(sigma2 / 2.0)
    return frame.with_samples(frame.samples + noise)


def flat_fade(frame: IqFrame, h: complex) -> IqFrame:
    """Multiply a frame by a flat complex gain."""
    if h == 0:
        raise DegenerateInputError("flat gain h must be non-zero")
    return frame.with_samples(frame.samples * h)


def multipath(frame: IqFrame, taps: Sequence[complex]) -> IqFrame:
    """Convolve a frame with a tap vector, truncated to the input length.

    Zero prehistory is assumed; the final len(taps)-1 output samples miss the
    tail of the response (they fall beyond the kept window).
    """
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.ndim != 1 or len(taps) == 0:
        raise InvalidParameterError("taps must be a non-empty sequence")
    out = np.convolve(frame.samples, taps)[: len(frame)]
    return frame.with_samples(out)


def rayleigh_taps(
    num_taps: int, decay_db_per_tap: float, seed: int, normalize: bool = True
) -> np.ndarray:
    """I.i.d. complex Gaussian taps under an exponential power-delay profile.

    Tap i has expected power 10^(-decay_db_per_tap * i / 10) before
    normalization; with normalize=True the realization is scaled so
    sum(|taps|^2) == 1 exactly.
    """
    if num_taps < 1:
        raise InvalidParameterError(f"num_taps must be >= 1, got {num_taps}")
    rng = np.random.default_rng(seed)
    profile = 10.0 ** (-decay_db_per_tap * np.arange(num_taps) / 10.0)
    taps = (rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps)) / np.sqrt(2.0)
    taps *= np.sqrt(profile)
    if normalize:
        taps /= np.sqrt(np.sum(np.abs(taps) ** 2))
    return taps


def apply_channel(frame: IqFrame, spec: ChannelSpec) -> IqFrame:
    """Fade per the spec's kind, then add AWGN at spec.snr_db."""
    if spec.kind == "flat":
        frame = flat_fade(frame, spec.h)
    elif spec.kind == "multipath":
        frame = multipath(frame, spec.taps)
    return awgn(frame, spec.snr_db, spec.seed)


def _symbol_observations(
    frame: IqFrame, pulse: Optional[PulseShape]
) -> np.ndarray:
    if pulse is None:
        return frame.samples
    from .modems import symbol_estimates

    return symbol_estimates(frame, pulse)


def _mlsd_small(y: np.ndarray, taps: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exhaustive ML over all sequences; only used when len(y) <= memory."""
    m = len(points)
    n = len(y)
    grids = np.meshgrid(*([np.arange(m)] * n), indexing="ij")
    seqs = np.stack([g.reshape(-1) for g in grids], axis=1)  # (m^n, n)
    sym = points[seqs]
    pred = np.zeros_like(sym)
    for i in range(len(taps)):
        if i < n:
            pred[:, i:] += taps[i] * sym[:, : n - i]
    cost = np.sum(np.abs(y[None, :] - pred) ** 2, axis=1)
    return seqs[int(np.argmin(cost))].astype(np.int64)


def mlsd_equalize(
    frame: IqFrame,
    taps: Sequence[complex],
    scheme: ModulationScheme,
    pulse: Optional[PulseShape] = None,
) -> np.ndarray:
    """Viterbi maximum-likelihood sequence detection over an ISI channel.

    Models symbol-rate observations y_n = sum_i taps[i] * s[n-i] + noise with
    zero prehistory (s[k] = 0 for k < 0) and minimizes the summed squared
    error over all symbol sequences. When `pulse` is given the frame is first
    matched-filtered and sampled at symbol instants (a matched root pair
    leaves the noise white at symbol spacing, so the metric stays exact).

    Returns the ML symbol-index sequence.

    Raises:
        StateSpaceTooLargeError: when constellation_size**(len(taps)-1)
            exceeds the trellis budget; fall back to mmse_equalize.
    """
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.ndim != 1 or len(taps) == 0 or taps[0] == 0:
        raise InvalidParameterError("taps must be non-empty with a non-zero first tap")
    points = constellation(scheme).points
    m = len(points)
    memory = len(taps) - 1
    num_states = m**memory
    if num_states > MLSD_MAX_STATES:
        raise StateSpaceTooLargeError(
            f"{m}^{memory} = {num_states} trellis states exceed the {MLSD_MAX_STATES} budget"
        )
    y = _symbol_observations(frame, pulse)
    num_symbols = len(y)
    if num_symbols == 0:
        return np.empty(0, dtype=np.int64)
    if memory == 0:
        return np.argmin(np.abs(y[:, None] - taps[0] * points[None, :]), axis=1)
    if num_symbols <= memory:
        return _mlsd_small(y, taps, points)

    # State index encodes the last `memory` decided symbols, most recent in
    # the least significant digit: state = s[n] + s[n-1]*m + ... after step n.
    digits = np.stack([(np.arange(num_states) // m**d) % m for d in range(memory)], axis=1)

    # Warmup: enumerate every length-`memory` prefix exactly (zero prehistory
    # means the first observations see fewer taps, so the steady-state
    # prediction table does not apply yet). State digits d = s[memory-1-d].
    prefix_sym = points[digits[:, ::-1]]  # (num_states, memory), column k = s[k]
    path = np.zeros(num_states)
    for n in range(memory):
        pred_n = np.zeros(num_states, dtype=np.complex128)
        for i in range(min(n, len(taps) - 1) + 1):
            pred_n += taps[i] * prefix_sym[:, n - i]
        path += np.abs(y[n] - pred_n) ** 2

    # Steady state: prediction for (state, new symbol u).
    hist = np.zeros(num_states, dtype=np.complex128)
    for d in range(memory):
        hist += taps[d + 1] * points[digits[:, d]]
    pred = taps[0] * points[None, :] + hist[:, None]  # (num_states, m)

    high = m ** (memory - 1)
    backptr = np.zeros((num_symbols, num_states), dtype=np.int32)
    low_idx = np.arange(high)[:, None]
    for n in range(memory, num_symbols):
        metric = path[:, None] + np.abs(y[n] - pred) ** 2
        # Transition (state, u) -> u + (state mod high) * m: group incoming
        # paths by state mod high and pick the best leading digit.
        grouped = metric.reshape(m, high, m)
        best_lead = np.argmin(grouped, axis=0)  # (high, m)
        path = np.take_along_axis(grouped, best_lead[None, :, :], axis=0)[0].reshape(-1)
        backptr[n] = (best_lead * high + low_idx).reshape(-1)
    state = int(np.argmin(path))
    out = np.empty(num_symbols, dtype=np.int64)
    for n in range(num_symbols - 1, memory - 1, -1):
        out[n] = state % m
        state = int(backptr[n, state])
    # The surviving warmup state encodes the whole prefix.
    for k in range(memory):
        out[k] = digits[state, memory - 1 - k]
    return out


def mmse_equalize(
    frame: IqFrame,
    taps: Sequence[complex],
    noise_var: float,
    filter_len: int = 33,
    decision_delay: Optional[int] = None,
) -> IqFrame:
    """Linear MMSE equalization of symbol-rate observations.

    The frame samples are modeled as y = conv(s, taps) + noise with unit
    symbol power; the returned frame carries the delay-compensated symbol
    estimates. With taps=[1] and noise_var=0 the filter is an identity.
    """
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.ndim != 1 or len(taps) == 0:
        raise InvalidParameterError("taps must be a non-empty sequence")
    if noise_var < 0:
        raise InvalidParameterError("noise_var must be >= 0")
    if filter_len < 1:
        raise InvalidParameterError("filter_len must be >= 1")
    L = len(taps)
    F = filter_len
    if decision_delay is None:
        decision_delay = (F + L - 2) // 2
    if not 0 <= decision_delay < F + L - 1:
        raise InvalidParameterError("decision_delay outside the filter span")
    # Stack y_n..y_{n-F+1} = H s + v with H the F x (F+L-1) banded matrix.
    H = np.zeros((F, F + L - 1), dtype=np.complex128)
    for r in range(F):
        H[r, r : r + L] = taps
    R = H @ H.conj().T + (noise_var + 1e-15) * np.eye(F)
    p = H[:, decision_delay]
    w = np.linalg.solve(R, p)
    y = frame.samples
    # est[n] = w^H [y_n ... y_{n-F+1}] estimates s[n - delay]; align to s[k].
    est_full = np.convolve(y, np.conj(w))
    est = est_full[decision_delay : decision_delay + len(y)]
    return frame.with_samples(est)
