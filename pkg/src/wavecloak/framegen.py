"""Wireless frame assembly and dataset generation.

A digital frame is a clean 64-symbol QPSK preamble followed by a cloaked
payload; analog waveforms have no preamble and are cloaked end to end. The
exported dataset record of a frame is the first samples_per_frame samples of
its payload region, so the cloaking clock of every record starts at its first
sample (t0 = 0) and a legitimate receiver can strip the waveform from the
record alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import dataset_io
from .channel import ChannelSpec, apply_channel, rayleigh_taps
from .errors import InvalidConfigError, InvalidParameterError
from .frames import IqFrame, normalize_power
from .modems import (
    ModulationScheme,
    OFDM_SCHEMES,
    analog_message,
    constellation,
    map_symbols,
    _modulate_gfsk,
)
from .obfuscate import ObfuscationParams, apply as apply_obfuscation
from .ofdm import OfdmConfig, ofdm_modulate
from .pulses import PulseShape, RAISED_COSINE, design_pulse, filter_and_resample

# Known preamble: 64 QPSK symbols from this fixed 128-bit pattern (MSB first).
PREAMBLE_BITS_HEX = "c0459df87dcb47ba606ef87b1e7aa21b"
PREAMBLE_NUM_SYMBOLS = 64

DEFAULT_SAMPLE_RATE = 40e6
DEFAULT_SPS = 8
DEFAULT_SAMPLES_PER_FRAME = 1024
DEFAULT_ROLLOFF = 0.5
DEFAULT_SPAN = 10


def preamble_bits() -> np.ndarray:
    raw = int(PREAMBLE_BITS_HEX, 16)
    n = 2 * PREAMBLE_NUM_SYMBOLS
    return np.array([(raw >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int64)


def preamble_symbols() -> np.ndarray:
    return map_symbols(preamble_bits(), ModulationScheme.QPSK)


@dataclass(frozen=True)
class FrameSpec:
    """Everything needed to build one frame deterministically."""

    scheme: ModulationScheme
    snr_db: float
    seed: int
    obf: Optional[ObfuscationParams] = None
    ofdm: Optional[OfdmConfig] = None
    channel: Optional[ChannelSpec] = None
    sample_rate: float = DEFAULT_SAMPLE_RATE
    samples_per_symbol: int = DEFAULT_SPS
    payload_samples: int = DEFAULT_SAMPLES_PER_FRAME
    rolloff: float = DEFAULT_ROLLOFF
    span_symbols: int = DEFAULT_SPAN

    def __post_init__(self):
        if self.ofdm is not None and self.scheme not in OFDM_SCHEMES:
            raise InvalidParameterError(
                f"OFDM wrapping is defined for {[s.name for s in OFDM_SCHEMES]}, "
                f"not {self.scheme.name}"
            )
        if self.payload_samples < 1:
            raise InvalidParameterError("payload_samples must be >= 1")


def _frame_rng(seed: int, domain: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, domain)))


def _noise_seed(seed: int) -> int:
    return int(np.random.SeedSequence((seed, 3)).generate_state(1, np.uint64)[0])


def _shape_symbols(symbols: np.ndarray, pulse: PulseShape, sample_rate: float) -> np.ndarray:
    sps = pulse.samples_per_symbol
    shaped = filter_and_resample(IqFrame(symbols, sample_rate / sps), pulse, sps)
    return shaped.samples * np.sqrt(sps)


def _preamble_samples(pulse: PulseShape, sample_rate: float, rng: np.random.Generator) -> np.ndarray:
    """Steady-state preamble waveform with random QPSK guard symbols shaped in."""
    span = pulse.span_symbols
    sps = pulse.samples_per_symbol
    qpsk = constellation(ModulationScheme.QPSK).points
    guard_head = qpsk[rng.integers(0, 4, span)]
    guard_tail = qpsk[rng.integers(0, 4, span)]
    stream = np.concatenate([guard_head, preamble_symbols(), guard_tail])
    shaped = _shape_symbols(stream, pulse, sample_rate)
    start = span * sps
    return shaped[start : start + PREAMBLE_NUM_SYMBOLS * sps]


def _linear_payload_frame(spec: FrameSpec, rng: np.random.Generator) -> IqFrame:
    """Single shaping pass over guard + preamble + payload + guard symbols."""
    pulse = design_pulse(RAISED_COSINE, spec.rolloff, spec.span_symbols, spec.samples_per_symbol)
    sps = spec.samples_per_symbol
    span = spec.span_symbols
    const = constellation(spec.scheme)
    num_payload_symbols = math.ceil(spec.payload_samples / sps)
    bits = rng.integers(0, 2, num_payload_symbols * const.bits_per_symbol)
    payload_syms = map_symbols(bits, spec.scheme)
    qpsk = constellation(ModulationScheme.QPSK).points
    guard_head = qpsk[rng.integers(0, 4, span)]
    guard_tail = const.points[rng.integers(0, const.size, span)]
    stream = np.concatenate([guard_head, preamble_symbols(), payload_syms, guard_tail])
    shaped = _shape_symbols(stream, pulse, spec.sample_rate)
    start = span * sps
    preamble_len = PREAMBLE_NUM_SYMBOLS * sps
    keep = preamble_len + spec.payload_samples
    samples = shaped[start : start + keep]
    return IqFrame(
        samples,
        spec.sample_rate,
        payload_range=(preamble_len, keep),
        label=spec.scheme,
    )


def _gfsk_payload_frame(spec: FrameSpec, rng: np.random.Generator) -> IqFrame:
    pulse = design_pulse(RAISED_COSINE, spec.rolloff, spec.span_symbols, spec.samples_per_symbol)
    sps = spec.samples_per_symbol
    preamble = _preamble_samples(pulse, spec.sample_rate, rng)
    guard = 4  # Gaussian frequency-pulse warmup, symbols
    num_symbols = math.ceil(spec.payload_samples / sps) + 2 * guard
    bits = rng.integers(0, 2, num_symbols)
    burst = _modulate_gfsk(bits, sps, spec.sample_rate).samples
    payload = burst[guard * sps : guard * sps + spec.payload_samples]
    samples = np.concatenate([preamble, payload])
    return IqFrame(
        samples,
        spec.sample_rate,
        payload_range=(len(preamble), len(samples)),
        label=spec.scheme,
    )


def _ofdm_payload_frame(spec: FrameSpec, rng: np.random.Generator) -> IqFrame:
    pulse = design_pulse(RAISED_COSINE, spec.rolloff, spec.span_symbols, spec.samples_per_symbol)
    preamble = _preamble_samples(pulse, spec.sample_rate, rng)
    cfg = spec.ofdm if spec.ofdm is not None else OfdmConfig()
    const = constellation(spec.scheme)
    num_ofdm_symbols = math.ceil(spec.payload_samples / cfg.symbol_len)
    mask = cfg.data_carrier_mask
    X = np.zeros((num_ofdm_symbols, cfg.num_subcarriers), dtype=np.complex128)
    num_data = num_ofdm_symbols * cfg.num_data_carriers
    bits = rng.integers(0, 2, num_data * const.bits_per_symbol)
    data = map_symbols(bits, spec.scheme).reshape(num_ofdm_symbols, cfg.num_data_carriers)
    X[:, mask] = data
    payload = ofdm_modulate(X, cfg).samples
    samples = np.concatenate([preamble, payload])
    return IqFrame(
        samples,
        spec.sample_rate,
        payload_range=(len(preamble), len(samples)),
        label=spec.scheme,
    )


def _analog_payload_frame(spec: FrameSpec, rng: np.random.Generator) -> IqFrame:
    from .modems import modulate_analog

    message = analog_message(spec.payload_samples, spec.sample_rate, rng)
    frame = modulate_analog(message, spec.scheme, spec.sample_rate)
    return replace(frame, payload_range=(0, len(frame)), label=spec.scheme)


def build_frame(spec: FrameSpec) -> IqFrame:
    """Assemble, power-normalize, cloak, and channel-impair one frame.

    The preamble (when present) is never cloaked; the payload region is mixed
    with the obfuscating waveform whose clock starts at the first payload
    sample. The channel acts on the cloaked waveform and noise is added last,
    calibrated against payload power.
    """
    data_rng = _frame_rng(spec.seed, 0)
    if spec.scheme.is_analog:
        frame = _analog_payload_frame(spec, data_rng)
    elif spec.scheme is ModulationScheme.GFSK:
        frame = _gfsk_payload_frame(spec, data_rng)
    elif spec.ofdm is not None:
        frame = _ofdm_payload_frame(spec, data_rng)
    else:
        frame = _linear_payload_frame(spec, data_rng)
    frame = normalize_power(frame)
    if spec.obf is not None:
        frame = apply_obfuscation(frame, spec.obf)
    channel = spec.channel if spec.channel is not None else ChannelSpec("awgn")
    channel = replace(channel, snr_db=spec.snr_db, seed=_noise_seed(spec.seed))
    return apply_channel(frame, channel)


def export_record(frame: IqFrame, samples_per_frame: int) -> np.ndarray:
    """The dataset record of a frame: its leading payload window."""
    payload = frame.payload()
    if len(payload) < samples_per_frame:
        raise InvalidParameterError(
            f"payload has {len(payload)} samples, need {samples_per_frame}"
        )
    return payload[:samples_per_frame]


def window_frames(stream: IqFrame, window_len: int) -> List[IqFrame]:
    """Chop a stream into non-overlapping windows; the remainder is dropped.

    Windows inherit the sample rate and label and are treated as all-payload.
    """
    if window_len < 1:
        raise InvalidParameterError("window_len must be >= 1")
    num = len(stream) // window_len
    return [
        IqFrame(
            stream.samples[i * window_len : (i + 1) * window_len],
            stream.sample_rate,
            payload_range=(0, window_len),
            label=stream.label,
        )
        for i in range(num)
    ]


DATASET1_SCHEMES = tuple(ModulationScheme)
DATASET2_SCHEMES = OFDM_SCHEMES
DEFAULT_SNR_GRID = (-10.0, 0.0, 10.0, 20.0, 30.0)
TABLE1_TOTAL = 160000
TABLE2_TOTAL = 50000


@dataclass(frozen=True)
class DatasetConfig:
    """Declarative description of one exported dataset."""

    profile: str
    schemes: Tuple[ModulationScheme, ...]
    snr_grid_db: Tuple[float, ...]
    total_frames: int
    master_seed: int = 0
    obf_pairs: Tuple[Tuple[float, float], ...] = ()
    ofdm: Optional[OfdmConfig] = None
    channel: str = "awgn"
    channel_taps: int = 2
    channel_decay_db: float = 3.0
    split_fractions: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    sample_rate: float = DEFAULT_SAMPLE_RATE
    samples_per_symbol: int = DEFAULT_SPS
    samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME

    def __post_init__(self):
        if not self.schemes:
            raise InvalidConfigError("at least one scheme is required")
        if not self.snr_grid_db:
            raise InvalidConfigError("snr_grid_db must be non-empty")
        if self.total_frames < 1:
            raise InvalidConfigError("total_frames must be >= 1")
        if self.channel not in ("awgn", "flat", "multipath"):
            raise InvalidConfigError(f"unknown channel {self.channel!r}")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise InvalidConfigError("split_fractions must sum to 1")


def dataset1_config(
    scale: int = 100,
    master_seed: int = 0,
    obf_pairs: Sequence[Tuple[float, float]] = (),
    snr_grid_db: Sequence[float] = DEFAULT_SNR_GRID,
    channel: str = "awgn",
) -> DatasetConfig:
    """Single-carrier profile; scale divides the full 160k frame count."""
    return DatasetConfig(
        profile="dataset1",
        schemes=DATASET1_SCHEMES,
        snr_grid_db=tuple(snr_grid_db),
        total_frames=TABLE1_TOTAL // scale,
        master_seed=master_seed,
        obf_pairs=tuple(tuple(p) for p in obf_pairs),
        channel=channel,
    )


def dataset2_config(
    scale: int = 100,
    master_seed: int = 0,
    obf_pairs: Sequence[Tuple[float, float]] = (),
    snr_grid_db: Sequence[float] = DEFAULT_SNR_GRID,
    channel: str = "awgn",
) -> DatasetConfig:
    """OFDM profile: PSK/QAM over 64 subcarriers with a 16-sample CP."""
    return DatasetConfig(
        profile="dataset2",
        schemes=DATASET2_SCHEMES,
        snr_grid_db=tuple(snr_grid_db),
        total_frames=TABLE2_TOTAL // scale,
        master_seed=master_seed,
        obf_pairs=tuple(tuple(p) for p in obf_pairs),
        ofdm=OfdmConfig(),
        channel=channel,
    )


def _frame_plan(config: DatasetConfig) -> List[Tuple[ModulationScheme, float, Optional[Tuple[float, float]]]]:
    """Cell-balanced frame list: per (scheme, SNR) counts differ by <= 1."""
    cells = [(s, snr) for s in config.schemes for snr in config.snr_grid_db]
    base, rem = divmod(config.total_frames, len(cells))
    plan = []
    rep_counts = [base + (1 if c < rem else 0) for c in range(len(cells))]
    max_reps = max(rep_counts)
    pairs = config.obf_pairs
    for rep in range(max_reps):
        for c, cell in enumerate(cells):
            if rep < rep_counts[c]:
                pair = pairs[rep % len(pairs)] if pairs else None
                plan.append((cell[0], cell[1], pair))
    return plan


def _splits(config: DatasetConfig, n: int) -> List[str]:
    f_train, f_val, _ = config.split_fractions
    n_train = int(n * f_train)
    n_val = int(n * f_val)
    rng = np.random.default_rng(np.random.SeedSequence((config.master_seed, 1)))
    perm = rng.permutation(n)
    names = np.empty(n, dtype=object)
    names[perm[:n_train]] = "train"
    names[perm[n_train : n_train + n_val]] = "val"
    names[perm[n_train + n_val :]] = "test"
    return list(names)


def frame_spec_for(config: DatasetConfig, index: int) -> FrameSpec:
    """The FrameSpec of frame `index` of a dataset, fully deterministic."""
    plan = _frame_plan(config)
    scheme, snr_db, pair = plan[index]
    return _spec_from_plan(config, index, scheme, snr_db, pair)


def _spec_from_plan(
    config: DatasetConfig,
    index: int,
    scheme: ModulationScheme,
    snr_db: float,
    pair: Optional[Tuple[float, float]],
) -> FrameSpec:
    seed = int(np.random.SeedSequence((config.master_seed, 2, index)).generate_state(1, np.uint64)[0])
    obf = ObfuscationParams(pair[0], pair[1]) if pair else None
    channel = None
    if config.channel == "flat":
        rng = _frame_rng(seed, 7)
        h = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
        channel = ChannelSpec("flat", h=complex(h))
    elif config.channel == "multipath":
        taps = rayleigh_taps(
            config.channel_taps,
            config.channel_decay_db,
            int(np.random.SeedSequence((seed, 8)).generate_state(1, np.uint64)[0]),
        )
        channel = ChannelSpec("multipath", taps=taps)
    return FrameSpec(
        scheme=scheme,
        snr_db=snr_db,
        seed=seed,
        obf=obf,
        ofdm=config.ofdm if scheme in OFDM_SCHEMES else None,
        channel=channel,
        sample_rate=config.sample_rate,
        samples_per_symbol=config.samples_per_symbol,
        payload_samples=(
            # OFDM payloads round up to whole symbols before windowing.
            config.samples_per_frame
            if config.ofdm is None
            else math.ceil(config.samples_per_frame / config.ofdm.symbol_len)
            * config.ofdm.symbol_len
        ),
    )


def generate_dataset(config: DatasetConfig, out_dir: str) -> dataset_io.DatasetManifest:
    """Build every frame of a dataset and export records plus manifest.

    Byte-identical across runs for the same config (master seed included).
    """
    plan = _frame_plan(config)
    splits = _splits(config, len(plan))
    records = []
    specs = []
    for i, (scheme, snr_db, pair) in enumerate(plan):
        spec = _spec_from_plan(config, i, scheme, snr_db, pair)
        specs.append(spec)
        records.append(
            dataset_io.FrameRecord(
                offset=0,
                label=scheme.value,
                snr_db=snr_db,
                delta_f=pair[0] if pair else 0.0,
                f_m=pair[1] if pair else 0.0,
                split=splits[i],
                seed=spec.seed,
            )
        )
    manifest = dataset_io.DatasetManifest(
        sample_rate=config.sample_rate,
        samples_per_frame=config.samples_per_frame,
        samples_per_symbol=config.samples_per_symbol,
        master_seed=config.master_seed,
        profile=config.profile,
        channel=config.channel,
        classes=[s.value for s in config.schemes],
        split_fractions=config.split_fractions,
        frames=records,
    )
    frame_iter = (
        export_record(build_frame(spec), config.samples_per_frame) for spec in specs
    )
    dataset_io.write_dataset(out_dir, manifest, frame_iter)
    return manifest
