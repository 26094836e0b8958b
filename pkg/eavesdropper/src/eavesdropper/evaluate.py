"""Evaluation tables: per-condition accuracy and the full confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .dataset import FrameDataset
from .model import ModulationCnn
from .train import predict


class ClassMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class AccuracyCell:
    snr_db: float
    delta_f: float
    f_m: float
    accuracy: float
    n: int


def evaluate(
    model: ModulationCnn,
    dataset: FrameDataset,
    model_classes: List[str],
    normalize: bool = True,
) -> Tuple[List[AccuracyCell], np.ndarray]:
    """Per-(SNR, cloaking-pair) accuracy plus a confusion matrix.

    The confusion matrix is indexed [true, predicted] over the model's class
    order. Raises ClassMismatchError when the dataset holds labels the model
    was not trained on.
    """
    if any(c not in model_classes for c in {m.label for m in dataset.meta}):
        raise ClassMismatchError(
            f"dataset labels {sorted({m.label for m in dataset.meta})} not all in "
            f"model classes {model_classes}"
        )
    class_index = {c: i for i, c in enumerate(model_classes)}
    predicted = predict(model, dataset.frames, normalize)
    true = np.array([class_index[m.label] for m in dataset.meta])
    num = len(model_classes)
    confusion = np.zeros((num, num), dtype=np.int64)
    for t, p in zip(true, predicted):
        confusion[t, p] += 1
    groups: Dict[Tuple[float, float, float], List[int]] = {}
    for i, m in enumerate(dataset.meta):
        groups.setdefault((m.snr_db, m.delta_f, m.f_m), []).append(i)
    cells = []
    for (snr_db, delta_f, f_m), idx in sorted(groups.items()):
        idx = np.array(idx)
        cells.append(
            AccuracyCell(
                snr_db=snr_db,
                delta_f=delta_f,
                f_m=f_m,
                accuracy=float(np.mean(predicted[idx] == true[idx])),
                n=len(idx),
            )
        )
    return cells, confusion


def accuracy_csv(cells: List[AccuracyCell], seed: int, mode: str = "eve") -> str:
    """Rows in the same shape the toolkit's accuracy sweeps emit."""
    lines = [
        "# cnn-eavesdropper evaluate",
        f"# seed={seed}",
        "snr_db,delta_f,f_m,mode,accuracy,n",
    ]
    for c in cells:
        lines.append(f"{c.snr_db},{c.delta_f},{c.f_m},{mode},{c.accuracy},{c.n}")
    return "\n".join(lines) + "\n"


def confusion_csv(confusion: np.ndarray, classes: List[str]) -> str:
    lines = ["true\\predicted," + ",".join(classes)]
    for i, c in enumerate(classes):
        lines.append(c + "," + ",".join(str(v) for v in confusion[i]))
    return "\n".join(lines) + "\n"


def modal_prediction_share(confusion: np.ndarray, classes: List[str], target: str) -> int:
    """How many non-target true classes have `target` as their modal prediction."""
    t = classes.index(target)
    count = 0
    for i in range(len(classes)):
        if i == t or confusion[i].sum() == 0:
            continue
        if int(np.argmax(confusion[i])) == t:
            count += 1
    return count
