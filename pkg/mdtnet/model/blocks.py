import torch
from torch import nn


class ConvNormRelu(nn.Sequential):
    """Reflect-padded convolution, instance normalization, ReLU."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 3, stride: int = 1):
        super().__init__(
            nn.Conv2d(
                in_channels,
                out_channels,
                kernel_size,
                stride=stride,
                padding=kernel_size // 2,
                padding_mode="reflect",
            ),
            nn.InstanceNorm2d(out_channels, affine=True),
            nn.ReLU(),
        )


class DenseTransfer(nn.Module):
    """
    Densely connected transfer module for one (domain, scale).

    Layer k sees the concatenation of the module input and every earlier layer's
    output; a 1x1 projection maps the full concatenation back to `channels`.
    """

    def __init__(self, channels: int, depth: int, growth: int):
        super().__init__()
        self.layers = nn.ModuleList(
            ConvNormRelu(channels + k * growth, growth) for k in range(depth)
        )
        self.project = nn.Conv2d(channels + depth * growth, channels, kernel_size=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        features = [x]
        for layer in self.layers:
            features.append(layer(torch.cat(features, dim=1)))
        return self.project(torch.cat(features, dim=1))


class SingleConvTransfer(nn.Sequential):
    """One 3x3 convolution plus instance normalization (a per-style filter bank entry)."""

    def __init__(self, channels: int):
        super().__init__(
            nn.Conv2d(channels, channels, 3, padding=1, padding_mode="reflect"),
            nn.InstanceNorm2d(channels, affine=True),
        )
