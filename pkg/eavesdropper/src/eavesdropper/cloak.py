"""Cloaking-waveform mixing for adversarial training.

The attacker knows the waveform family (a unit-modulus FM phase rotation
parameterized by a peak frequency shift delta_f and sweep rate f_m) but not
the transmitter's parameters, so augmentation draws random pairs per frame.
Dataset records carry the payload only and their cloaking clock starts at the
first sample, matching the manifest's payload-start convention.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np


def cloak_waveform(delta_f: float, f_m: float, num_samples: int, sample_rate: float) -> np.ndarray:
    """exp(j * (delta_f/f_m) * sin(2*pi*f_m*t)) sampled from t = 0."""
    if delta_f <= 0 or f_m <= 0:
        raise ValueError("delta_f and f_m must be positive")
    t = np.arange(num_samples) / sample_rate
    return np.exp(1j * (delta_f / f_m) * np.sin(2.0 * np.pi * f_m * t))


def mix_frames(frames: np.ndarray, delta_f: float, f_m: float, sample_rate: float) -> np.ndarray:
    """Mix a (n, 2, w) batch of I/Q frames with one cloaking waveform."""
    w = cloak_waveform(delta_f, f_m, frames.shape[-1], sample_rate)
    x = frames[:, 0, :] + 1j * frames[:, 1, :]
    mixed = x * w[None, :]
    return np.stack([mixed.real, mixed.imag], axis=1).astype(frames.dtype)


def random_pairs(
    rng: np.random.Generator,
    count: int,
    delta_f_range: Tuple[float, float],
    f_m_range: Tuple[float, float],
) -> np.ndarray:
    """Log-uniform (delta_f, f_m) draws inside the configured budget box."""
    for low, high in (delta_f_range, f_m_range):
        if not 0 < low <= high:
            raise ValueError(f"invalid range ({low}, {high})")
    d = np.exp(rng.uniform(np.log(delta_f_range[0]), np.log(delta_f_range[1]), count))
    f = np.exp(rng.uniform(np.log(f_m_range[0]), np.log(f_m_range[1]), count))
    return np.stack([d, f], axis=1)


def mix_batch_random(
    frames: np.ndarray,
    rng: np.random.Generator,
    delta_f_range: Tuple[float, float],
    f_m_range: Tuple[float, float],
    sample_rate: float,
) -> np.ndarray:
    """Mix every frame of a batch with its own randomly drawn pair."""
    pairs = random_pairs(rng, len(frames), delta_f_range, f_m_range)
    out = np.empty_like(frames)
    t = np.arange(frames.shape[-1]) / sample_rate
    x = frames[:, 0, :] + 1j * frames[:, 1, :]
    phase = (pairs[:, 0] / pairs[:, 1])[:, None] * np.sin(
        2.0 * np.pi * pairs[:, 1][:, None] * t[None, :]
    )
    mixed = x * np.exp(1j * phase)
    out[:, 0, :] = mixed.real
    out[:, 1, :] = mixed.imag
    return out
