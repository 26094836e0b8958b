"""Waveform-obfuscation modem toolkit.

Synthesizes modulated baseband signals, cloaks payloads with a unit-modulus
FM waveform, runs them through channel models, demonstrates lossless recovery
at a receiver that knows the cloaking parameters, and exports datasets for
training modulation classifiers against the cloaked waveforms.
"""

from .frames import IqFrame, normalize_power, occupied_bandwidth, spectrogram
from .modems import (
    ANALOG_SCHEMES,
    DIGITAL_SCHEMES,
    LINEAR_SCHEMES,
    Constellation,
    ModulationScheme,
    constellation,
    demod_gfsk,
    demod_hard,
    map_symbols,
    modulate_analog,
    modulate_digital,
)
from .obfuscate import ObfuscationParams, apply, obf_waveform, remove
from .ofdm import OfdmConfig, ofdm_demodulate, ofdm_equalize, ofdm_modulate
from .channel import (
    ChannelSpec,
    awgn,
    flat_fade,
    mlsd_equalize,
    mmse_equalize,
    multipath,
    rayleigh_taps,
)
from .pulses import PulseShape, design_pulse, filter_and_resample
from .framegen import (
    DatasetConfig,
    FrameSpec,
    build_frame,
    dataset1_config,
    dataset2_config,
    generate_dataset,
    window_frames,
)
from .baseline import BaselineModel, FeatureVector, classify, extract_features, train_baseline

__version__ = "0.1.0"

__all__ = [
    "IqFrame",
    "ModulationScheme",
    "Constellation",
    "ObfuscationParams",
    "OfdmConfig",
    "ChannelSpec",
    "PulseShape",
    "FrameSpec",
    "DatasetConfig",
    "BaselineModel",
    "FeatureVector",
    "normalize_power",
    "spectrogram",
    "occupied_bandwidth",
    "constellation",
    "map_symbols",
    "modulate_digital",
    "modulate_analog",
    "demod_hard",
    "demod_gfsk",
    "obf_waveform",
    "apply",
    "remove",
    "ofdm_modulate",
    "ofdm_demodulate",
    "ofdm_equalize",
    "awgn",
    "flat_fade",
    "multipath",
    "rayleigh_taps",
    "mlsd_equalize",
    "mmse_equalize",
    "design_pulse",
    "filter_and_resample",
    "build_frame",
    "generate_dataset",
    "dataset1_config",
    "dataset2_config",
    "window_frames",
    "extract_features",
    "train_baseline",
    "classify",
    "DIGITAL_SCHEMES",
    "ANALOG_SCHEMES",
    "LINEAR_SCHEMES",
]
