"""The 7-layer CNN: six convolution blocks plus one fully-connected output.

Every convolution block is conv -> batch-norm -> ReLU -> max-pool except the
last, which swaps the max-pool for an average-pool; the output layer is a
softmax over the dataset's classes. Filter counts start at 16 and double
every other block by default; all of that is configuration so any variant is
reproducible from its config alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import torch
from torch import nn

NUM_CONV_BLOCKS = 6


@dataclass(frozen=True)
class CnnSpec:
    num_classes: int
    input_width: int = 1024
    base_filters: int = 16
    kernel_width: int = 8
    pool_width: int = 2

    @property
    def filters(self) -> Tuple[int, ...]:
        # 16, 16, 32, 32, 64, 64 for the default base of 16.
        return tuple(self.base_filters * 2 ** (b // 2) for b in range(NUM_CONV_BLOCKS))


class ModulationCnn(nn.Module):
    def __init__(self, spec: CnnSpec):
        super().__init__()
        self.spec = spec
        blocks: List[nn.Module] = []
        in_ch = 1
        for b, out_ch in enumerate(spec.filters):
            last = b == NUM_CONV_BLOCKS - 1
            pool: nn.Module = (
                nn.AvgPool2d((1, spec.pool_width)) if last else nn.MaxPool2d((1, spec.pool_width))
            )
            blocks.append(
                nn.Sequential(
                    nn.Conv2d(
                        in_ch,
                        out_ch,
                        kernel_size=(1, spec.kernel_width),
                        padding=(0, spec.kernel_width // 2),
                        bias=False,
                    ),
                    nn.BatchNorm2d(out_ch),
                    nn.ReLU(),
                    pool,
                )
            )
            in_ch = out_ch
        self.blocks = nn.ModuleList(blocks)
        width_after = spec.input_width
        for _ in range(NUM_CONV_BLOCKS):
            # 'same'-ish padding leaves width + 1 for even kernels; pooling floors.
            width_after = (width_after + 1) // spec.pool_width
        self.classifier = nn.Linear(2 * spec.filters[-1] * width_after, spec.num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (batch, 2, input_width) I/Q planes -> one-channel 2D image.
        h = x.unsqueeze(1)
        for block in self.blocks:
            h = block(h)
        logits = self.classifier(h.flatten(1))
        return logits

    def probabilities(self, x: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.forward(x), dim=1)


def build_model(spec: CnnSpec, seed: int = 0) -> ModulationCnn:
    """Construct the network deterministically and check its structure."""
    torch.manual_seed(seed)
    model = ModulationCnn(spec)
    check_architecture(model)
    return model


def check_architecture(model: ModulationCnn) -> None:
    """Assert the block count and ordering the classifier is defined by."""
    if len(model.blocks) != NUM_CONV_BLOCKS:
        raise AssertionError(f"expected {NUM_CONV_BLOCKS} convolution blocks")
    for b, block in enumerate(model.blocks):
        kinds = [type(m) for m in block]
        expected_pool = nn.AvgPool2d if b == NUM_CONV_BLOCKS - 1 else nn.MaxPool2d
        if kinds != [nn.Conv2d, nn.BatchNorm2d, nn.ReLU, expected_pool]:
            raise AssertionError(f"block {b} is {kinds}, not conv/BN/ReLU/pool")
    if not isinstance(model.classifier, nn.Linear):
        raise AssertionError("output layer must be fully connected")
    out_features = model.classifier.out_features
    if out_features != model.spec.num_classes:
        raise AssertionError(
            f"output width {out_features} != number of classes {model.spec.num_classes}"
        )
