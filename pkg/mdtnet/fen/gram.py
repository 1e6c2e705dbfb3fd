from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class FeatureMap:
    values: torch.Tensor  # batch x C x H x W
    layer: str


@dataclass(frozen=True)
class GramMatrix:
    values: torch.Tensor  # batch x C x C
    layer: str


def gram_matrix(features: torch.Tensor) -> torch.Tensor:
    """
    Channel Gram matrices of a batch of feature maps.

    With F the C x (H*W) flattening of one element, returns F @ F.T / (C*H*W).
    """
    batch, channels, height, width = features.shape
    flat = features.reshape(batch, channels, height * width)
    return torch.bmm(flat, flat.transpose(1, 2)) / (channels * height * width)


def gram(feature: FeatureMap) -> GramMatrix:
    return GramMatrix(values=gram_matrix(feature.values), layer=feature.layer)
