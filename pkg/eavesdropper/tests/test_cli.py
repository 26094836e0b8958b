import json
import subprocess
import sys

import numpy as np
import pytest

from eavesdropper.cli import main


def test_train_and_evaluate_roundtrip(tmp_path, ds1_clean, capsys):
    model_path = str(tmp_path / "cnn.pt")
    out_csv = tmp_path / "acc.csv"
    confusion_csv = tmp_path / "confusion.csv"
    assert main([
        "--seed", "0", "train", "--dataset", ds1_clean, "--model", model_path,
        "--epochs", "1", "--base-filters", "4",
    ]) == 0
    assert "final val accuracy" in capsys.readouterr().out
    assert main([
        "evaluate", "--dataset", ds1_clean, "--model", model_path,
        "--split", "test", "--out", str(out_csv),
        "--confusion-out", str(confusion_csv),
    ]) == 0
    lines = out_csv.read_text().splitlines()
    assert lines[2] == "snr_db,delta_f,f_m,mode,accuracy,n"
    rows = [l.split(",") for l in lines[3:]]
    assert sum(int(r[5]) for r in rows) == 160
    matrix = confusion_csv.read_text().splitlines()
    assert matrix[0].startswith("true\\predicted,")
    assert len(matrix) == 11


def test_train_adv_requires_ranges(ds1_clean, tmp_path):
    assert main([
        "train-adv", "--dataset", ds1_clean, "--model", str(tmp_path / "m.pt"),
        "--epochs", "1",
    ]) == 2


def test_config_file_supplies_defaults(tmp_path, ds1_clean, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 1, "base-filters": 4}))
    model_path = str(tmp_path / "cnn.pt")
    assert main([
        "--config", str(cfg), "train", "--dataset", ds1_clean, "--model", model_path,
    ]) == 0
    assert "for 1 epochs" in capsys.readouterr().out


def test_missing_dataset_exit_code(tmp_path):
    assert main([
        "train", "--dataset", str(tmp_path / "nope"), "--model", str(tmp_path / "m.pt"),
        "--epochs", "1",
    ]) == 4
