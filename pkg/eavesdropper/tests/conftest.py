import shutil
import subprocess
import sys

import pytest

STRONG_PAIR = "4.6875e5:1.5625e5"  # delta_f:f_m, the generator's strong default
WEAK_PAIR = "1.5e5:4.8125e5"


def generate(args, out_dir):
    """Produce a dataset through the generator toolkit's public CLI."""
    cmd = [sys.executable, "-m", "wavecloak.cli"] + args + ["--out", str(out_dir)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        pytest.skip(f"dataset generator unavailable: {proc.stderr.strip()[:200]}")
    return str(out_dir)


@pytest.fixture(scope="session")
def ds1_clean(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds1_clean")
    return generate(
        ["--seed", "1", "gen-dataset", "--profile", "dataset1", "--scale", "100"], out
    )


@pytest.fixture(scope="session")
def eval30(tmp_path_factory):
    """Independent 30 dB evaluation sets: clean and strongly cloaked."""
    clean = tmp_path_factory.mktemp("eval30_clean")
    strong = tmp_path_factory.mktemp("eval30_strong")
    generate(
        ["--seed", "2", "gen-dataset", "--profile", "dataset1", "--scale", "400",
         "--snr-grid", "30"], clean,
    )
    generate(
        ["--seed", "2", "gen-dataset", "--profile", "dataset1", "--scale", "400",
         "--snr-grid", "30", "--obf", STRONG_PAIR], strong,
    )
    return str(clean), str(strong)
