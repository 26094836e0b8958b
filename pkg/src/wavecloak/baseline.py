"""Feature-based modulation classifier used as the desk-scale eavesdropper.

Features are classical modulation-classification statistics: fourth-order
cumulants normalized by powers of the centered signal power (so c40 of unit
BPSK symbols is 2 in magnitude, QPSK is 1), envelope kurtosis, spectral
symmetry, and peak PSD concentration. All features are invariant to complex
scaling of the input: cumulants enter by magnitude after power normalization,
so a flat channel gain never moves a frame in feature space.

The classifier is a regularized per-class Gaussian discriminant over the
standardized feature vectors. Training is deterministic.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateInputError,
    FrameTooShortError,
    InsufficientDataError,
    IoFailureError,
    FormatMismatchError,
)
from .frames import IqFrame
from .modems import ModulationScheme

MODEL_FORMAT_VERSION = 1
MIN_FRAME_SAMPLES = 256
MIN_FRAMES_PER_CLASS = 20
FEATURE_NAMES = (
    "c20",
    "c40",
    "c41",
    "c42",
    "envelope_kurtosis",
    "spectral_symmetry",
    "max_psd_concentration",
)


@dataclass(frozen=True)
class FeatureVector:
    """Scale-invariant statistics of one frame (cumulants as magnitudes)."""

    c20: float
    c40: float
    c41: float
    c42: float
    envelope_kurtosis: float
    spectral_symmetry: float
    max_psd_concentration: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])


def extract_features(frame: IqFrame) -> FeatureVector:
    """Compute the feature vector of a frame (>= 256 samples).

    The frame is power-normalized and mean-centered internally; cumulants are
    normalized by powers of the centered power c21 and reported as
    magnitudes.
    """
    x = np.asarray(frame.samples, dtype=np.complex128)
    if len(x) < MIN_FRAME_SAMPLES:
        raise FrameTooShortError(f"need >= {MIN_FRAME_SAMPLES} samples, got {len(x)}")
    power = np.mean(np.abs(x) ** 2)
    if power == 0.0:
        raise DegenerateInputError("all-zero frame has no features")
    x = x / np.sqrt(power)

    xc = x - np.mean(x)
    c21 = np.mean(np.abs(xc) ** 2)
    if c21 == 0.0:
        raise DegenerateInputError("constant frame has no modulation features")
    c20 = np.mean(xc**2)
    m40 = np.mean(xc**4)
    m41 = np.mean(xc**3 * np.conj(xc))
    m42 = np.mean(np.abs(xc) ** 4)
    cum40 = m40 - 3.0 * c20**2
    cum41 = m41 - 3.0 * c20 * c21
    cum42 = m42 - np.abs(c20) ** 2 - 2.0 * c21**2

    envelope = np.abs(x)
    dev = envelope - np.mean(envelope)
    m2 = np.mean(dev**2)
    m4 = np.mean(dev**4)
    kurt = m4 / (m2**2 + 1e-12)

    spec = np.abs(np.fft.fft(x)) ** 2
    half = len(spec) // 2
    upper = np.sum(spec[1:half])
    lower = np.sum(spec[half + 1 :])
    symmetry = (upper - lower) / (upper + lower + 1e-300)

    seg_len = max(64, len(x) // 8)
    num_segs = len(x) // seg_len
    psd = np.mean(
        np.abs(np.fft.fft(x[: num_segs * seg_len].reshape(num_segs, seg_len), axis=1)) ** 2,
        axis=0,
    )
    concentration = float(np.max(psd) / np.sum(psd))

    return FeatureVector(
        c20=float(np.abs(c20) / c21),
        c40=float(np.abs(cum40) / c21**2),
        c41=float(np.abs(cum41) / c21**2),
        c42=float(np.abs(cum42) / c21**2),
        envelope_kurtosis=float(kurt),
        spectral_symmetry=float(symmetry),
        max_psd_concentration=concentration,
    )


@dataclass
class BaselineModel:
    """Per-class Gaussian discriminant over standardized features."""

    classes: List[str]
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    class_means: np.ndarray  # (num_classes, dim)
    class_precisions: np.ndarray  # (num_classes, dim, dim)
    class_logdets: np.ndarray

    def log_likelihoods(self, features: np.ndarray) -> np.ndarray:
        z = (features - self.feature_mean) / self.feature_scale
        out = np.empty(len(self.classes))
        for c in range(len(self.classes)):
            d = z - self.class_means[c]
            out[c] = -0.5 * (d @ self.class_precisions[c] @ d) - 0.5 * self.class_logdets[c]
        return out


def train_baseline(
    frames: Sequence[IqFrame],
    labels: Optional[Sequence[str]] = None,
    regularization: float = 1e-3,
) -> BaselineModel:
    """Fit the Gaussian discriminant on labeled frames.

    Labels default to each frame's own label. Requires at least
    MIN_FRAMES_PER_CLASS frames for every class present.
    """
    if labels is None:
        labels = [
            f.label.value if isinstance(f.label, ModulationScheme) else str(f.label)
            for f in frames
        ]
    labels = [str(l) for l in labels]
    if len(labels) != len(frames):
        raise InsufficientDataError("labels and frames must align")
    feats = np.stack([extract_features(f).as_array() for f in frames])
    classes = sorted(set(labels))
    for c in classes:
        count = sum(1 for l in labels if l == c)
        if count < MIN_FRAMES_PER_CLASS:
            raise InsufficientDataError(
                f"class {c!r} has {count} frames, need >= {MIN_FRAMES_PER_CLASS}"
            )
    mean = feats.mean(axis=0)
    scale = feats.std(axis=0)
    scale[scale == 0] = 1.0
    z = (feats - mean) / scale
    dim = z.shape[1]
    means, precisions, logdets = [], [], []
    for c in classes:
        zc = z[np.array([l == c for l in labels])]
        mu = zc.mean(axis=0)
        cov = np.cov(zc, rowvar=False, bias=False)
        cov = np.atleast_2d(cov) + regularization * np.eye(dim)
        means.append(mu)
        precisions.append(np.linalg.inv(cov))
        logdets.append(np.linalg.slogdet(cov)[1])
    return BaselineModel(
        classes=classes,
        feature_mean=mean,
        feature_scale=scale,
        class_means=np.stack(means),
        class_precisions=np.stack(precisions),
        class_logdets=np.array(logdets),
    )


def classify(frame: IqFrame, model: BaselineModel) -> Tuple[ModulationScheme, Dict[str, float]]:
    """Most likely scheme and the per-class log-likelihood scores."""
    feats = extract_features(frame).as_array()
    scores = model.log_likelihoods(feats)
    best = model.classes[int(np.argmax(scores))]
    return ModulationScheme(best), dict(zip(model.classes, scores.tolist()))


def classify_batch(frames: Sequence[IqFrame], model: BaselineModel) -> List[str]:
    return [classify(f, model)[0].value for f in frames]


def accuracy(frames: Sequence[IqFrame], labels: Sequence[str], model: BaselineModel) -> float:
    predicted = classify_batch(frames, model)
    return float(np.mean([p == l for p, l in zip(predicted, labels)]))


def save_model(model: BaselineModel, path: str) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "classes": model.classes,
        "feature_names": list(FEATURE_NAMES),
        "feature_mean": model.feature_mean.tolist(),
        "feature_scale": model.feature_scale.tolist(),
        "class_means": model.class_means.tolist(),
        "class_precisions": model.class_precisions.tolist(),
        "class_logdets": model.class_logdets.tolist(),
    }
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise IoFailureError(f"failed writing model to {path}: {exc}") from exc


def load_model(path: str) -> BaselineModel:
    if not os.path.exists(path):
        raise IoFailureError(f"no model file at {path}")
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise FormatMismatchError(f"unsupported model version {doc.get('format_version')!r}")
    return BaselineModel(
        classes=[str(c) for c in doc["classes"]],
        feature_mean=np.array(doc["feature_mean"]),
        feature_scale=np.array(doc["feature_scale"]),
        class_means=np.array(doc["class_means"]),
        class_precisions=np.array(doc["class_precisions"]),
        class_logdets=np.array(doc["class_logdets"]),
    )
