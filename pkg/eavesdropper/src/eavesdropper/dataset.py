"""Loader for wavecloak frame datasets.

Reads the published format directly (JSON manifest + concatenated
little-endian float32 I/Q records) so this package depends only on the files
the generator exports, never on its code. Frames come back as 2x1024 float32
tensors with the real and imaginary parts split across the first axis.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

SUPPORTED_FORMAT_VERSION = 1


class FormatMismatchError(RuntimeError):
    """Dataset files disagree with their manifest (version, offsets, sizes)."""


@dataclass(frozen=True)
class FrameMeta:
    index: int
    offset: int
    label: str
    snr_db: float
    delta_f: float
    f_m: float
    split: str
    seed: int


@dataclass
class FrameDataset:
    """All frames of one dataset directory, decoded once."""

    sample_rate: float
    samples_per_frame: int
    classes: List[str]
    frames: np.ndarray  # (n, 2, samples_per_frame) float32, rows I then Q
    meta: List[FrameMeta]

    def __len__(self) -> int:
        return len(self.meta)

    @property
    def class_to_index(self) -> Dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}

    def labels(self) -> np.ndarray:
        lookup = self.class_to_index
        return np.array([lookup[m.label] for m in self.meta], dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "FrameDataset":
        indices = np.asarray(indices, dtype=int)
        return FrameDataset(
            sample_rate=self.sample_rate,
            samples_per_frame=self.samples_per_frame,
            classes=self.classes,
            frames=self.frames[indices],
            meta=[self.meta[i] for i in indices],
        )

    def split(self, name: str) -> "FrameDataset":
        return self.subset([i for i, m in enumerate(self.meta) if m.split == name])

    def where(
        self,
        snr_db: Optional[float] = None,
        labels: Optional[Sequence[str]] = None,
    ) -> "FrameDataset":
        keep = []
        allowed = set(labels) if labels is not None else None
        for i, m in enumerate(self.meta):
            if snr_db is not None and m.snr_db != snr_db:
                continue
            if allowed is not None and m.label not in allowed:
                continue
            keep.append(i)
        return self.subset(keep)

    def complex_frames(self) -> np.ndarray:
        return self.frames[:, 0, :] + 1j * self.frames[:, 1, :]


def _read_manifest(dataset_dir: str) -> dict:
    path = os.path.join(dataset_dir, "manifest.json")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no manifest.json in {dataset_dir}")
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != SUPPORTED_FORMAT_VERSION:
        raise FormatMismatchError(
            f"format_version {version!r} unsupported (expected {SUPPORTED_FORMAT_VERSION})"
        )
    return doc


def read_record(data_path: str, offset: int, samples_per_frame: int) -> np.ndarray:
    """One record as a (2, samples_per_frame) float32 array, bit-exact."""
    nbytes = 8 * samples_per_frame
    size = os.path.getsize(data_path)
    if offset < 0 or offset + nbytes > size:
        raise FormatMismatchError(
            f"record at offset {offset} overruns data file of {size} bytes"
        )
    with open(data_path, "rb") as fh:
        fh.seek(offset)
        raw = fh.read(nbytes)
    if len(raw) != nbytes:
        raise FormatMismatchError(f"short read at offset {offset}")
    flat = np.frombuffer(raw, dtype="<f4")
    return np.stack([flat[0::2], flat[1::2]])


def load_dataset(dataset_dir: str, split: Optional[str] = None) -> FrameDataset:
    """Decode a dataset directory (optionally one split) into memory.

    Raises FormatMismatchError on version or offset problems rather than
    silently misreading records.
    """
    doc = _read_manifest(dataset_dir)
    data_path = os.path.join(dataset_dir, doc["data_file"])
    samples_per_frame = int(doc["samples_per_frame"])
    entries = doc["frames"]
    offsets = [int(e["offset"]) for e in entries]
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise FormatMismatchError("frame offsets are not strictly increasing")
    meta_all = [
        FrameMeta(
            index=i,
            offset=int(e["offset"]),
            label=str(e["label"]),
            snr_db=float(e["snr_db"]),
            delta_f=float(e["delta_f"]),
            f_m=float(e["f_m"]),
            split=str(e["split"]),
            seed=int(e["seed"]),
        )
        for i, e in enumerate(entries)
    ]
    if split is not None:
        meta_all = [m for m in meta_all if m.split == split]
    frames = np.empty((len(meta_all), 2, samples_per_frame), dtype=np.float32)
    for row, m in enumerate(meta_all):
        frames[row] = read_record(data_path, m.offset, samples_per_frame)
    return FrameDataset(
        sample_rate=float(doc["sample_rate"]),
        samples_per_frame=samples_per_frame,
        classes=[str(c) for c in doc["classes"]],
        frames=frames,
        meta=meta_all,
    )


def split_sizes(dataset: FrameDataset) -> Tuple[int, int, int]:
    counts = {"train": 0, "val": 0, "test": 0}
    for m in dataset.meta:
        counts[m.split] += 1
    return counts["train"], counts["val"], counts["test"]
