"""CNN modulation classifier attacking cloaked I/Q frame datasets."""

from .dataset import FrameDataset, FormatMismatchError, load_dataset, read_record
from .cloak import cloak_waveform, mix_batch_random, mix_frames, random_pairs
from .model import CnnSpec, ModulationCnn, build_model, check_architecture
from .train import (
    InsufficientDataError,
    TrainConfig,
    TrainLog,
    load_model,
    predict,
    predict_probabilities,
    save_model,
    train,
    train_adversarial,
)
from .evaluate import (
    AccuracyCell,
    ClassMismatchError,
    accuracy_csv,
    confusion_csv,
    evaluate,
    modal_prediction_share,
)

__version__ = "0.1.0"
