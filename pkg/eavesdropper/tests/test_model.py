import numpy as np
import pytest
import torch
from torch import nn

from eavesdropper.model import NUM_CONV_BLOCKS, CnnSpec, build_model, check_architecture
from eavesdropper.train import predict_probabilities


def test_block_structure_conforms():
    model = build_model(CnnSpec(num_classes=10), seed=0)
    assert len(model.blocks) == NUM_CONV_BLOCKS
    for b, block in enumerate(model.blocks):
        kinds = [type(m) for m in block]
        assert kinds[:3] == [nn.Conv2d, nn.BatchNorm2d, nn.ReLU]
        if b == NUM_CONV_BLOCKS - 1:
            assert kinds[3] is nn.AvgPool2d
        else:
            assert kinds[3] is nn.MaxPool2d
    check_architecture(model)


def test_filter_doubling_every_other_block():
    spec = CnnSpec(num_classes=5, base_filters=16)
    assert spec.filters == (16, 16, 32, 32, 64, 64)


def test_output_width_matches_classes():
    for n in (2, 5, 10):
        model = build_model(CnnSpec(num_classes=n), seed=0)
        x = torch.zeros(3, 2, 1024)
        assert model(x).shape == (3, n)


def test_softmax_sums_to_one():
    model = build_model(CnnSpec(num_classes=10), seed=0)
    frames = np.random.default_rng(0).standard_normal((8, 2, 1024)).astype(np.float32)
    probs = predict_probabilities(model, frames)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-5)


def test_build_deterministic():
    a = build_model(CnnSpec(num_classes=4), seed=7)
    b = build_model(CnnSpec(num_classes=4), seed=7)
    for pa, pb in zip(a.parameters(), b.parameters()):
        assert torch.equal(pa, pb)


def test_architecture_check_catches_tampering():
    model = build_model(CnnSpec(num_classes=4), seed=0)
    model.blocks[2] = nn.Sequential(nn.Conv2d(16, 32, (1, 8)), nn.ReLU())
    with pytest.raises(AssertionError):
        check_architecture(model)
