"""Training loops: plain SGD on clean frames, and the cloak-augmented variant.

Defaults follow the attack setup the datasets were built for: SGD with a
mini-batch of 256 at learning rate 0.02, dropped to a tenth after the 9th
epoch. The adversarially trained variant mixes every training frame, on the
fly each epoch, with a cloaking waveform drawn from the configured parameter
ranges (the attacker knows the waveform family, not the parameters).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import List, Optional, Tuple

import numpy as np
import torch
from torch import nn

from .cloak import mix_batch_random
from .dataset import FrameDataset
from .model import CnnSpec, ModulationCnn, build_model


class InsufficientDataError(ValueError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 256
    initial_lr: float = 0.02
    lr_drop_factor: float = 0.1
    lr_drop_after_epoch: int = 9  # epochs 10+ run at initial_lr * factor
    epochs: int = 15
    seed: int = 0
    normalize_frames: bool = True
    base_filters: int = 16
    augment_delta_f: Optional[Tuple[float, float]] = None  # Hz, log-uniform
    augment_f_m: Optional[Tuple[float, float]] = None

    @property
    def augmented(self) -> bool:
        return self.augment_delta_f is not None and self.augment_f_m is not None


@dataclass
class TrainLog:
    epochs: List[int] = field(default_factory=list)
    learning_rates: List[float] = field(default_factory=list)
    train_losses: List[float] = field(default_factory=list)
    val_accuracies: List[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _normalize(frames: np.ndarray) -> np.ndarray:
    rms = np.sqrt(np.mean(frames**2, axis=(1, 2), keepdims=True))
    rms[rms == 0] = 1.0
    return frames / rms


def frames_to_tensor(frames: np.ndarray, normalize: bool) -> torch.Tensor:
    if normalize:
        frames = _normalize(frames)
    return torch.from_numpy(np.ascontiguousarray(frames, dtype=np.float32))


@torch.no_grad()
def predict(model: ModulationCnn, frames: np.ndarray, normalize: bool = True,
            batch_size: int = 512) -> np.ndarray:
    model.eval()
    out = []
    x = frames_to_tensor(frames, normalize)
    for start in range(0, len(x), batch_size):
        logits = model(x[start : start + batch_size])
        out.append(torch.argmax(logits, dim=1).numpy())
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


@torch.no_grad()
def predict_probabilities(model: ModulationCnn, frames: np.ndarray,
                          normalize: bool = True, batch_size: int = 512) -> np.ndarray:
    model.eval()
    out = []
    x = frames_to_tensor(frames, normalize)
    for start in range(0, len(x), batch_size):
        out.append(model.probabilities(x[start : start + batch_size]).numpy())
    return np.concatenate(out)


def _epoch_lr(config: TrainConfig, epoch: int) -> float:
    if epoch > config.lr_drop_after_epoch:
        return config.initial_lr * config.lr_drop_factor
    return config.initial_lr


def train(
    train_set: FrameDataset,
    val_set: FrameDataset,
    config: TrainConfig,
) -> Tuple[ModulationCnn, TrainLog]:
    """Fit the CNN; deterministic given config.seed (single-threaded CPU).

    Raises InsufficientDataError when fewer than two classes are present.
    """
    labels = train_set.labels()
    if len(np.unique(labels)) < 2:
        raise InsufficientDataError("training needs at least two classes")
    spec = CnnSpec(
        num_classes=len(train_set.classes),
        input_width=train_set.samples_per_frame,
        base_filters=config.base_filters,
    )
    model = build_model(spec, seed=config.seed)
    loss_fn = nn.CrossEntropyLoss()
    log = TrainLog()
    shuffle_rng = np.random.default_rng(np.random.SeedSequence((config.seed, 1)))
    aug_rng = np.random.default_rng(np.random.SeedSequence((config.seed, 2)))
    torch.manual_seed(config.seed + 1)

    frames = train_set.frames
    val_frames = val_set.frames
    val_labels = val_set.labels()
    y_all = torch.from_numpy(labels)

    for epoch in range(1, config.epochs + 1):
        lr = _epoch_lr(config, epoch)
        optimizer = torch.optim.SGD(model.parameters(), lr=lr)
        model.train()
        order = shuffle_rng.permutation(len(frames))
        epoch_loss, batches = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            batch = frames[idx]
            if config.augmented:
                batch = mix_batch_random(
                    batch, aug_rng, config.augment_delta_f, config.augment_f_m,
                    train_set.sample_rate,
                )
            x = frames_to_tensor(batch, config.normalize_frames)
            y = y_all[idx]
            optimizer.zero_grad()
            loss = loss_fn(model(x), y)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            batches += 1
        val_pred = predict(model, val_frames, config.normalize_frames)
        val_acc = float(np.mean(val_pred == val_labels)) if len(val_labels) else float("nan")
        log.epochs.append(epoch)
        log.learning_rates.append(lr)
        log.train_losses.append(epoch_loss / max(batches, 1))
        log.val_accuracies.append(val_acc)
    return model, log


def train_adversarial(
    train_set: FrameDataset,
    val_set: FrameDataset,
    config: TrainConfig,
) -> Tuple[ModulationCnn, TrainLog]:
    """Cloak-augmented training; requires the augmentation ranges to be set."""
    if not config.augmented:
        raise ValueError("adversarial training needs augment_delta_f and augment_f_m ranges")
    return train(train_set, val_set, config)


def save_model(model: ModulationCnn, config: TrainConfig, classes: List[str],
               log: TrainLog, path: str) -> None:
    torch.save(
        {
            "state_dict": model.state_dict(),
            "spec": asdict(model.spec),
            "config": asdict(config),
            "classes": classes,
            "log": log.to_json(),
        },
        path,
    )


def load_model(path: str) -> Tuple[ModulationCnn, List[str], dict]:
    doc = torch.load(path, map_location="cpu", weights_only=False)
    spec = CnnSpec(**doc["spec"])
    model = ModulationCnn(spec)
    model.load_state_dict(doc["state_dict"])
    model.eval()
    return model, list(doc["classes"]), doc
