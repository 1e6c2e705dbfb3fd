from .config import DEFAULT_ALPHA, LossWeights
from .perceptual import (
    DomainTransfer,
    LossReport,
    TransferOutputs,
    content_loss,
    domain_loss,
    total_loss,
)

__all__ = [
    "DEFAULT_ALPHA",
    "DomainTransfer",
    "LossReport",
    "LossWeights",
    "TransferOutputs",
    "content_loss",
    "domain_loss",
    "total_loss",
]
