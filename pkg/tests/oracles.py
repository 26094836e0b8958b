"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written from first principles (closed forms,
exhaustive enumeration, direct struct parsing) and never calls the code paths
it is used to verify.
"""

import struct

import numpy as np
from scipy.special import erfc


def q_function(x: float) -> float:
    return 0.5 * erfc(x / np.sqrt(2.0))


def qpsk_ser_theory(esn0_db: float) -> float:
    """Closed-form Gray-QPSK symbol error rate over AWGN at Es/N0."""
    gamma = 10.0 ** (esn0_db / 10.0)
    q = q_function(np.sqrt(gamma))
    return 2.0 * q - q * q


def brute_force_mlsd(y: np.ndarray, taps: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exhaustive maximum-likelihood search with zero prehistory.

    Enumerates every one of the m^n candidate sequences (in chunks, to bound
    memory) and scores sum |y - conv(seq, taps)[:n]|^2 directly.
    """
    m, n = len(points), len(y)
    total = m**n
    chunk = 1 << 18
    best_cost, best_seq = np.inf, None
    place = m ** np.arange(n - 1, -1, -1)
    for start in range(0, total, chunk):
        nums = np.arange(start, min(start + chunk, total))
        digits = (nums[:, None] // place[None, :]) % m
        s = points[digits]
        pred = np.zeros_like(s)
        for j in range(min(len(taps), n)):
            if j == 0:
                pred += taps[0] * s
            else:
                pred[:, j:] += taps[j] * s[:, :-j]
        cost = np.sum(np.abs(y[None, :] - pred) ** 2, axis=1)
        k = int(np.argmin(cost))
        if cost[k] < best_cost:
            best_cost = float(cost[k])
            best_seq = digits[k]
    return best_seq.astype(np.int64)


def parse_record_minimal(path: str, byte_offset: int, num_samples: int) -> np.ndarray:
    """Struct-based reader of one dataset record (little-endian f32 I/Q pairs)."""
    with open(path, "rb") as fh:
        fh.seek(byte_offset)
        raw = fh.read(8 * num_samples)
    floats = struct.unpack("<" + "f" * (2 * num_samples), raw)
    arr = np.array(floats, dtype=np.float32)
    return arr[0::2] + 1j * arr[1::2]


def symbol_cumulants(symbols: np.ndarray) -> dict:
    """Sample-moment cumulants of raw symbols, normalized by c21 powers."""
    x = symbols - np.mean(symbols)
    c21 = np.mean(np.abs(x) ** 2)
    c20 = np.mean(x**2)
    c40 = np.mean(x**4) - 3.0 * c20**2
    c41 = np.mean(x**3 * np.conj(x)) - 3.0 * c20 * c21
    c42 = np.mean(np.abs(x) ** 4) - np.abs(c20) ** 2 - 2.0 * c21**2
    return {
        "c20": abs(c20) / c21,
        "c40": abs(c40) / c21**2,
        "c41": abs(c41) / c21**2,
        "c42": abs(c42) / c21**2,
    }


def binomial_ci95(errors: int, trials: int) -> tuple:
    p = errors / trials
    half = 1.96 * np.sqrt(max(p * (1 - p), 1e-300) / trials)
    return max(0.0, p - half), min(1.0, p + half)
