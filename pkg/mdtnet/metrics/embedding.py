import logging
import os
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn
from torchvision.models import inception_v3

from mdtnet.core.exceptions import ConfigurationError, ValidationError
from mdtnet.fen import IMAGENET_MEAN, IMAGENET_STD, FeatureExtractor, FenConfig, load_fen
from mdtnet.types import EmbedderProtocol, ImageBatch

logger = logging.getLogger(__name__)

INCEPTION_SIZE = 299


@dataclass(frozen=True)
class EmbeddingSet:
    vectors: np.ndarray  # N x D, float64
    embedder_id: str

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise ValidationError(f"embeddings must be N x D, got shape {self.vectors.shape}")
        if not np.isfinite(self.vectors).all():
            raise ValidationError(f"embedding set from {self.embedder_id} has non-finite values")

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


class FenLayerEmbedder:
    """Global-average-pooled activations of one FEN layer; needs no extra weights."""

    def __init__(self, fen: FeatureExtractor, layer: str):
        if layer not in fen.available_layers:
            raise ConfigurationError(
                f"layer {layer} not available; extractor provides {', '.join(fen.available_layers)}"
            )
        self.fen = fen
        self.layer = layer
        self.embedder_id = f"fen:{layer}"

    @torch.no_grad()
    def embed_batch(self, images: ImageBatch) -> np.ndarray:
        feature = self.fen.extract(images, [self.layer])[0].values
        return feature.mean(dim=(2, 3)).double().cpu().numpy()


class InceptionEmbedder:
    """
    Pool features of an Inception-v3 classifier loaded from a local weight file.

    The file is a torchvision state dict; auxiliary-classifier entries are
    ignored and the final fully connected layer is replaced by the identity,
    so each image maps to the 2048-d pooled feature.
    """

    def __init__(self, weights_path: str | os.PathLike[str]):
        path = Path(weights_path)
        if not path.is_file():
            raise ConfigurationError(f"inception weight file not found: {path}")
        network = inception_v3(weights=None, aux_logits=False, init_weights=False)
        state = torch.load(path, map_location="cpu", weights_only=True)
        state = {k: v for k, v in state.items() if not k.startswith("AuxLogits.")}
        try:
            network.load_state_dict(state)
        except RuntimeError as exc:
            raise ConfigurationError(f"{path} is not an Inception-v3 state dict: {exc}") from exc
        network.fc = nn.Identity()
        self.network = network.eval().requires_grad_(False)
        self.embedder_id = f"inception:{path.name}"
        self.mean = torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1)
        self.std = torch.tensor(IMAGENET_STD).view(1, 3, 1, 1)
        logger.info(f"Loaded Inception-v3 embedder from {path}")

    @torch.no_grad()
    def embed_batch(self, images: ImageBatch) -> np.ndarray:
        x = images.float()
        if x.shape[1] == 1:
            x = x.expand(-1, 3, -1, -1)
        x = F.interpolate(
            x, size=(INCEPTION_SIZE, INCEPTION_SIZE), mode="bilinear", align_corners=False
        )
        x = (x - self.mean) / self.std
        return self.network(x).double().cpu().numpy()


def embed(images: Iterable[ImageBatch], embedder: EmbedderProtocol) -> EmbeddingSet:
    """Embed a stream of image batches; rows follow the stream order."""
    chunks = [embedder.embed_batch(batch) for batch in images]
    if not chunks:
        raise ValidationError("no images to embed")
    return EmbeddingSet(vectors=np.concatenate(chunks, axis=0), embedder_id=embedder.embedder_id)


def parse_embedder(
    spec: str, fen_config: FenConfig, fen: FeatureExtractor | None = None
) -> EmbedderProtocol:
    """
    Build an embedder from `fen:<layer>` or `inception:<weight file>`.

    A given `fen` is reused when it already reaches the layer; otherwise a
    fresh extractor is loaded from `fen_config` with the layer added.
    """
    kind, _, value = spec.partition(":")
    if not value:
        raise ConfigurationError(f"embedder must look like fen:LAYER or inception:FILE, got '{spec}'")
    if kind == "fen":
        if fen is None or value not in fen.available_layers:
            fen = load_fen(fen_config, extra_layers=[value])
        return FenLayerEmbedder(fen, value)
    if kind == "inception":
        return InceptionEmbedder(value)
    raise ConfigurationError(f"unknown embedder kind '{kind}' (expected fen or inception)")
