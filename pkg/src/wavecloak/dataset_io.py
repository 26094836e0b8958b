"""Bit-exact dataset files: interleaved float32 I/Q records plus a manifest.

One record is samples_per_frame complex samples stored as 2*samples_per_frame
little-endian float32 values (I0, Q0, I1, Q1, ...), records concatenated in
manifest order. The manifest is JSON and fully describes every record:

    format_version   must be 1
    data_file        record file name, relative to the manifest
    sample_rate      Hz
    samples_per_frame, samples_per_symbol
    master_seed, profile, channel, classes, split_fractions
    obf_time_origin  "payload-start": the cloaking clock starts at each
                     record's first sample (t0 = 0)
    frames           list of per-record entries:
        offset   byte offset of the record in data_file (strictly increasing)
        label    modulation tag (see classes)
        snr_db   requested payload SNR
        delta_f, f_m   cloaking parameters in Hz; 0.0 means no cloaking
        split    train | val | test
        seed     integer entropy the record was generated from
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .errors import FormatMismatchError, IoFailureError, MissingManifestError

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
DATA_NAME = "frames.iq32"

_RECORD_DTYPE = np.dtype("<c8")  # interleaved little-endian float32 pairs


@dataclass
class FrameRecord:
    offset: int
    label: str
    snr_db: float
    delta_f: float
    f_m: float
    split: str
    seed: int

    def to_json(self) -> dict:
        return {
            "offset": self.offset,
            "label": self.label,
            "snr_db": self.snr_db,
            "delta_f": self.delta_f,
            "f_m": self.f_m,
            "split": self.split,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "FrameRecord":
        return cls(
            offset=int(d["offset"]),
            label=str(d["label"]),
            snr_db=float(d["snr_db"]),
            delta_f=float(d["delta_f"]),
            f_m=float(d["f_m"]),
            split=str(d["split"]),
            seed=int(d["seed"]),
        )


@dataclass
class DatasetManifest:
    sample_rate: float
    samples_per_frame: int
    samples_per_symbol: int
    master_seed: int
    profile: str
    channel: str
    classes: List[str]
    split_fractions: Tuple[float, float, float]
    frames: List[FrameRecord] = field(default_factory=list)
    data_file: str = DATA_NAME
    format_version: int = FORMAT_VERSION

    def split_indices(self, split: Optional[str]) -> np.ndarray:
        if split is None:
            return np.arange(len(self.frames))
        return np.array([i for i, r in enumerate(self.frames) if r.split == split], dtype=int)

    def to_json(self) -> dict:
        return {
            "format_version": self.format_version,
            "data_file": self.data_file,
            "sample_rate": self.sample_rate,
            "samples_per_frame": self.samples_per_frame,
            "samples_per_symbol": self.samples_per_symbol,
            "master_seed": self.master_seed,
            "profile": self.profile,
            "channel": self.channel,
            "classes": self.classes,
            "split_fractions": list(self.split_fractions),
            "obf_time_origin": "payload-start",
            "frames": [r.to_json() for r in self.frames],
        }


def record_nbytes(samples_per_frame: int) -> int:
    return samples_per_frame * _RECORD_DTYPE.itemsize


def write_dataset(out_dir: str, manifest: DatasetManifest, frames: Iterator[np.ndarray]) -> str:
    """Write records (in manifest order) and the manifest; returns the dir.

    Frame offsets are filled in as records are written. Raises IoFailureError
    on filesystem problems.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
        data_path = os.path.join(out_dir, manifest.data_file)
        offset = 0
        with open(data_path, "wb") as fh:
            for record, samples in zip(manifest.frames, frames):
                raw = np.ascontiguousarray(samples, dtype=_RECORD_DTYPE)
                if len(raw) != manifest.samples_per_frame:
                    raise FormatMismatchError(
                        f"record has {len(raw)} samples, manifest says "
                        f"{manifest.samples_per_frame}"
                    )
                record.offset = offset
                fh.write(raw.tobytes())
                offset += raw.nbytes
        with open(os.path.join(out_dir, MANIFEST_NAME), "w") as fh:
            json.dump(manifest.to_json(), fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise IoFailureError(f"failed writing dataset to {out_dir}: {exc}") from exc
    return out_dir


def load_manifest(dataset_dir: str) -> DatasetManifest:
    path = os.path.join(dataset_dir, MANIFEST_NAME)
    if not os.path.exists(path):
        raise MissingManifestError(f"no {MANIFEST_NAME} in {dataset_dir}")
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MissingManifestError(f"unreadable manifest {path}: {exc}") from exc
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatMismatchError(f"unsupported format_version {version!r}")
    manifest = DatasetManifest(
        sample_rate=float(d["sample_rate"]),
        samples_per_frame=int(d["samples_per_frame"]),
        samples_per_symbol=int(d["samples_per_symbol"]),
        master_seed=int(d["master_seed"]),
        profile=str(d["profile"]),
        channel=str(d["channel"]),
        classes=[str(c) for c in d["classes"]],
        split_fractions=tuple(float(f) for f in d["split_fractions"]),
        frames=[FrameRecord.from_json(r) for r in d["frames"]],
        data_file=str(d["data_file"]),
    )
    offsets = [r.offset for r in manifest.frames]
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise FormatMismatchError("frame offsets are not strictly increasing")
    return manifest


def load_record(dataset_dir: str, manifest: DatasetManifest, index: int) -> np.ndarray:
    """Read one record back as complex64 samples, bit-exact."""
    record = manifest.frames[index]
    nbytes = record_nbytes(manifest.samples_per_frame)
    path = os.path.join(dataset_dir, manifest.data_file)
    try:
        size = os.path.getsize(path)
        if record.offset + nbytes > size:
            raise FormatMismatchError(
                f"record {index} at offset {record.offset} overruns data file ({size} bytes)"
            )
        with open(path, "rb") as fh:
            fh.seek(record.offset)
            raw = fh.read(nbytes)
    except OSError as exc:
        raise IoFailureError(f"failed reading {path}: {exc}") from exc
    if len(raw) != nbytes:
        raise FormatMismatchError(f"short read for record {index}")
    return np.frombuffer(raw, dtype=_RECORD_DTYPE)


def load_split(
    dataset_dir: str, manifest: DatasetManifest, split: Optional[str] = None
) -> Tuple[np.ndarray, List[FrameRecord]]:
    """Load all records of a split as an (n, samples_per_frame) complex64 array."""
    idx = manifest.split_indices(split)
    records = [manifest.frames[i] for i in idx]
    out = np.empty((len(idx), manifest.samples_per_frame), dtype=np.complex64)
    for row, i in enumerate(idx):
        out[row] = load_record(dataset_dir, manifest, int(i))
    return out, records
