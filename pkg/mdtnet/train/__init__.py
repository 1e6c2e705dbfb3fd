from .config import TrainConfig
from .schedule import ADAM_BETAS, ADAM_EPS, IterationBudget, balance_iterations, lr_at
from .trainer import (
    CHECKPOINT_DIR,
    FINAL_CHECKPOINT,
    LogEntry,
    Trainer,
    TrainLog,
    make_optimizer,
    train,
    training_step,
)

__all__ = [
    "ADAM_BETAS",
    "ADAM_EPS",
    "CHECKPOINT_DIR",
    "FINAL_CHECKPOINT",
    "IterationBudget",
    "LogEntry",
    "TrainConfig",
    "TrainLog",
    "Trainer",
    "balance_iterations",
    "lr_at",
    "make_optimizer",
    "train",
    "training_step",
]
