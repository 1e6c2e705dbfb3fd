from .blocks import ConvNormRelu, DenseTransfer, SingleConvTransfer
from .checkpoint import (
    CHECKPOINT_FORMAT,
    Checkpoint,
    load_checkpoint,
    restore_optimizer,
    save_checkpoint,
)
from .config import ModelConfig, TransferVariant
from .generator import (
    Generator,
    MultiScaleFeatures,
    apply_transfer,
    build_model,
    decode,
    encode,
    parameter_count,
    reconstruct,
    translate,
    translate_all,
)

__all__ = [
    "CHECKPOINT_FORMAT",
    "Checkpoint",
    "ConvNormRelu",
    "DenseTransfer",
    "Generator",
    "ModelConfig",
    "MultiScaleFeatures",
    "SingleConvTransfer",
    "TransferVariant",
    "apply_transfer",
    "build_model",
    "decode",
    "encode",
    "load_checkpoint",
    "parameter_count",
    "reconstruct",
    "restore_optimizer",
    "save_checkpoint",
    "translate",
    "translate_all",
]
