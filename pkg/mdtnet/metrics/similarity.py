from collections.abc import Sequence

import torch

from mdtnet.core.exceptions import ShapeError
from mdtnet.types import FeatureExtractorProtocol, ImageBatch

_EPS = 1e-10


def _unit_channels(features: torch.Tensor) -> torch.Tensor:
    # unit length across channels at every spatial position
    return features / (features.pow(2).sum(dim=1, keepdim=True).sqrt() + _EPS)


@torch.no_grad()
def perceptual_distances(
    sources: ImageBatch,
    transferred: ImageBatch,
    fen: FeatureExtractorProtocol,
    layers: Sequence[str],
) -> torch.Tensor:
    """Per-pair perceptual distance in [0, 1); zero for identical images."""
    if sources.shape != transferred.shape:
        raise ShapeError(
            f"similarity needs aligned batches, got {tuple(sources.shape)} "
            f"and {tuple(transferred.shape)}"
        )
    per_layer = [
        (_unit_channels(a.values) - _unit_channels(b.values)).pow(2).mean(dim=(1, 2, 3))
        for a, b in zip(
            fen.extract(sources, layers), fen.extract(transferred, layers), strict=True
        )
    ]
    distance = torch.stack(per_layer).mean(dim=0)
    return distance / (1 + distance)


def content_similarity(
    sources: ImageBatch,
    transferred: ImageBatch,
    fen: FeatureExtractorProtocol,
    layers: Sequence[str],
) -> float:
    """Percentage in [0, 100]; 100 means the transferred images keep the sources' content exactly."""
    distances = perceptual_distances(sources, transferred, fen, layers)
    return float((1 - distances.double().mean()) * 100)


def dpd(fid: float, content_similarity_pct: float, lam: float = 1.0) -> float:
    """Distribution-and-perception distance: fid + lam * (1 - similarity / 100) * 100."""
    return fid + lam * (1 - content_similarity_pct / 100) * 100
