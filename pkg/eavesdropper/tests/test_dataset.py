import json
import os
import struct

import numpy as np
import pytest

from eavesdropper.dataset import (
    FormatMismatchError,
    load_dataset,
    read_record,
    split_sizes,
)


def test_scaled_counts(ds1_clean):
    ds = load_dataset(ds1_clean)
    assert split_sizes(ds) == (1280, 160, 160)
    assert len(ds.classes) == 10
    assert ds.frames.shape == (1600, 2, 1024)
    assert ds.frames.dtype == np.float32


def test_first_frames_match_generators_parser(ds1_clean):
    """The generator package reads its own files; both parsers must agree on
    the first ten frames bit for bit."""
    wavecloak = pytest.importorskip("wavecloak.dataset_io")
    ds = load_dataset(ds1_clean)
    manifest = wavecloak.load_manifest(ds1_clean)
    for i in range(10):
        theirs = wavecloak.load_record(ds1_clean, manifest, i)
        ours = ds.frames[i, 0] + 1j * ds.frames[i, 1]
        assert np.array_equal(
            ours.astype(np.complex64).view(np.float32), theirs.view(np.float32)
        )


def test_record_read_is_bit_exact_against_struct(ds1_clean):
    ds = load_dataset(ds1_clean)
    data_path = os.path.join(ds1_clean, "frames.iq32")
    meta = ds.meta[3]
    with open(data_path, "rb") as fh:
        fh.seek(meta.offset)
        raw = fh.read(8 * 1024)
    floats = np.array(struct.unpack("<2048f", raw), dtype=np.float32)
    got = read_record(data_path, meta.offset, 1024)
    assert np.array_equal(got[0], floats[0::2])
    assert np.array_equal(got[1], floats[1::2])


def test_corrupted_offset_raises(ds1_clean, tmp_path):
    manifest_path = os.path.join(ds1_clean, "manifest.json")
    with open(manifest_path) as fh:
        doc = json.load(fh)
    doc["frames"][-1]["offset"] = 10**9
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "manifest.json").write_text(json.dumps(doc))
    os.symlink(os.path.join(ds1_clean, "frames.iq32"), broken / "frames.iq32")
    with pytest.raises(FormatMismatchError):
        load_dataset(str(broken))


def test_unsupported_version_raises(ds1_clean, tmp_path):
    with open(os.path.join(ds1_clean, "manifest.json")) as fh:
        doc = json.load(fh)
    doc["format_version"] = 99
    broken = tmp_path / "versioned"
    broken.mkdir()
    (broken / "manifest.json").write_text(json.dumps(doc))
    with pytest.raises(FormatMismatchError):
        load_dataset(str(broken))


def test_split_and_filters(ds1_clean):
    ds = load_dataset(ds1_clean)
    test = ds.split("test")
    assert len(test) == 160
    at30 = ds.where(snr_db=30.0)
    assert all(m.snr_db == 30.0 for m in at30.meta)
    digital = ds.where(labels=["bpsk", "qpsk"])
    assert set(m.label for m in digital.meta) == {"bpsk", "qpsk"}
    assert np.array_equal(ds.labels()[:3], [ds.class_to_index[m.label] for m in ds.meta[:3]])
