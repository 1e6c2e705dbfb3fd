from collections.abc import Sequence
from typing import TYPE_CHECKING, Protocol, TypeAlias, runtime_checkable

import numpy as np
import torch

if TYPE_CHECKING:
    from mdtnet.fen.gram import FeatureMap

# batch x channels x height x width, values in [0, 1]
ImageBatch: TypeAlias = torch.Tensor


@runtime_checkable
class FeatureExtractorProtocol(Protocol):
    """Protocol for anything that can serve as the perceptual feature extractor."""

    def extract(
        self, images: ImageBatch, layers: Sequence[str]
    ) -> list["FeatureMap"]:
        """Return one feature map per requested layer, in request order."""
        ...


@runtime_checkable
class EmbedderProtocol(Protocol):
    """Protocol for image embedders used by the Fréchet distance."""

    embedder_id: str

    def embed_batch(self, images: ImageBatch) -> np.ndarray:
        """Map a batch of images to an (N, D) float64 matrix."""
        ...
