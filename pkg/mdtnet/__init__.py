from .fen import FenConfig, load_fen
from .loss import LossWeights
from .metrics import MetricsReport, evaluate_direction
from .model import Generator, ModelConfig, build_model, load_checkpoint
from .train import TrainConfig, train

__all__ = [
    "FenConfig",
    "Generator",
    "LossWeights",
    "MetricsReport",
    "ModelConfig",
    "TrainConfig",
    "build_model",
    "evaluate_direction",
    "load_checkpoint",
    "load_fen",
    "train",
]
