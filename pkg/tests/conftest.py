import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wavecloak.framegen import dataset1_config, generate_dataset


@pytest.fixture(scope="session")
def ds1_clean(tmp_path_factory):
    """Clean dataset1 at 1/100 scale, shared across the session."""
    out = tmp_path_factory.mktemp("ds1_clean")
    config = dataset1_config(scale=100, master_seed=77)
    manifest = generate_dataset(config, str(out))
    return str(out), config, manifest
