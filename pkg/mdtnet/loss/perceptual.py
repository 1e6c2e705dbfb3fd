import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import torch
import torch.nn.functional as F

from mdtnet.core.exceptions import NonFiniteLossError, ShapeError
from mdtnet.fen.gram import gram_matrix
from mdtnet.types import FeatureExtractorProtocol, ImageBatch

from .config import LossWeights


def content_loss(
    fen: FeatureExtractorProtocol,
    images: ImageBatch,
    generated: ImageBatch,
    layers: Sequence[str],
) -> torch.Tensor:
    """Mean over `layers` of the mean squared difference between FEN features."""
    if images.shape != generated.shape:
        raise ShapeError(
            f"content loss needs equal shapes, got {tuple(images.shape)} "
            f"and {tuple(generated.shape)}"
        )
    reference = fen.extract(images, layers)
    produced = fen.extract(generated, layers)
    terms = [F.mse_loss(p.values, r.values) for p, r in zip(produced, reference, strict=True)]
    return torch.stack(terms).mean()


def domain_loss(
    fen: FeatureExtractorProtocol,
    generated: ImageBatch,
    reference: ImageBatch,
    layers: Sequence[str],
) -> torch.Tensor:
    """
    Mean over `layers` of the mean squared difference between Gram matrices.

    Equal batch sizes are compared pairwise; otherwise every generated Gram is
    compared with the batch-mean reference Gram.
    """
    produced = fen.extract(generated, layers)
    target = fen.extract(reference, layers)
    terms = []
    for p, t in zip(produced, target, strict=True):
        gram_p = gram_matrix(p.values)
        gram_t = gram_matrix(t.values)
        if gram_t.shape[0] != gram_p.shape[0]:
            gram_t = gram_t.mean(dim=0, keepdim=True).expand_as(gram_p)
        terms.append(F.mse_loss(gram_p, gram_t))
    return torch.stack(terms).mean()


@dataclass(frozen=True)
class DomainTransfer:
    domain_id: int
    reference: ImageBatch  # real samples of the target domain
    generated: ImageBatch  # source images translated into it


@dataclass(frozen=True)
class TransferOutputs:
    source: ImageBatch
    reconstruction: ImageBatch
    transfers: Sequence[DomainTransfer] = ()


@dataclass
class LossReport:
    content: float
    domain_per_target: dict[int, float]
    total: float
    transfer_content: float = 0.0
    alpha: dict[int, float] = field(default_factory=dict)
    # differentiable total; None once detached for logging
    objective: torch.Tensor | None = field(default=None, repr=False, compare=False)

    def to_json(self, iteration: int, lr: float) -> dict[str, Any]:
        return {
            "iter": iteration,
            "content": self.content,
            "domain": {str(k): v for k, v in self.domain_per_target.items()},
            "transfer_content": self.transfer_content,
            "total": self.total,
            "lr": lr,
        }


def _finite(component: str, value: torch.Tensor) -> float:
    number = float(value.detach())
    if not math.isfinite(number):
        raise NonFiniteLossError(component, number)
    return number


def total_loss(
    fen: FeatureExtractorProtocol,
    outputs: TransferOutputs,
    weights: LossWeights,
    content_layers: Sequence[str],
    domain_layers: Sequence[str],
) -> LossReport:
    """
    Combined objective: content loss on the reconstruction plus alpha-weighted
    domain losses for every target, plus the optional transfer content term.

    Raises:
        NonFiniteLossError: A component evaluated to NaN or infinity; the error
            names the component.
    """
    content = content_loss(fen, outputs.source, outputs.reconstruction, content_layers)
    content_value = _finite("content", content)
    objective = content

    per_target: dict[int, float] = {}
    alphas: dict[int, float] = {}
    transfer_terms = []
    for transfer in outputs.transfers:
        d_loss = domain_loss(fen, transfer.generated, transfer.reference, domain_layers)
        per_target[transfer.domain_id] = _finite(f"domain[{transfer.domain_id}]", d_loss)
        alphas[transfer.domain_id] = weights.alpha_for(transfer.domain_id)
        objective = objective + alphas[transfer.domain_id] * d_loss
        if weights.lambda_content_on_transfer > 0:
            transfer_terms.append(
                content_loss(fen, outputs.source, transfer.generated, content_layers)
            )

    transfer_value = 0.0
    if transfer_terms:
        transfer_sum = torch.stack(transfer_terms).sum()
        transfer_value = _finite("transfer_content", transfer_sum)
        objective = objective + weights.lambda_content_on_transfer * transfer_sum

    _finite("total", objective)
    total = (
        content_value
        + sum(alphas[d] * v for d, v in per_target.items())
        + weights.lambda_content_on_transfer * transfer_value
    )
    return LossReport(
        content=content_value,
        domain_per_target=per_target,
        total=total,
        transfer_content=transfer_value,
        alpha=alphas,
        objective=objective,
    )
