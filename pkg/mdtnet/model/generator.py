import logging
from collections.abc import Iterable
from typing import TypeAlias

import torch
import torch.nn.functional as F
from torch import nn

from mdtnet.core.exceptions import ShapeError, UnknownDomainError
from mdtnet.core.seeding import seeded_torch
from mdtnet.data.images import check_image_batch
from mdtnet.types import ImageBatch

from .blocks import ConvNormRelu, DenseTransfer, SingleConvTransfer
from .config import ModelConfig

logger = logging.getLogger(__name__)

# one tensor per encoder scale, full resolution first
MultiScaleFeatures: TypeAlias = list[torch.Tensor]

HEAD_INIT_SCALE = 0.1


class Generator(nn.Module):
    """
    Encoder, per-domain transfer modules and decoder.

    The encoder maps an image to features at every scale. Each domain owns one
    transfer module per scale (`transfers[domain][scale]`), and the decoder
    rebuilds an image from the deepest transferred features, adding the
    shallower transferred features back as skips on the way up.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        plan = config.channel_plan()

        self.encoder = nn.ModuleList([ConvNormRelu(1, plan[0], kernel_size=7)])
        for s in range(1, config.scales):
            self.encoder.append(ConvNormRelu(plan[s - 1], plan[s], stride=2))

        self.transfers = nn.ModuleList(
            nn.ModuleList(self._transfer_module(channels) for channels in plan)
            for _ in range(config.n_domains)
        )

        # ups[i] takes scale (S-1-i) up to scale (S-2-i)
        self.ups = nn.ModuleList(
            ConvNormRelu(plan[s], plan[s - 1]) for s in range(config.scales - 1, 0, -1)
        )
        self.head = nn.Conv2d(plan[0], 1, kernel_size=7, padding=3, padding_mode="reflect")

    def _transfer_module(self, channels: int) -> nn.Module:
        if self.config.transfer_variant == "single_conv":
            return SingleConvTransfer(channels)
        return DenseTransfer(channels, self.config.transfer_depth, self.config.transfer_growth)

    def reset_head(self) -> None:
        # small head weights keep the initial residual near zero
        nn.init.kaiming_normal_(self.head.weight, mode="fan_in", nonlinearity="relu")
        with torch.no_grad():
            self.head.weight.mul_(HEAD_INIT_SCALE)
        nn.init.zeros_(self.head.bias)

    def check_domain(self, domain_id: int) -> None:
        if not 0 <= domain_id < self.config.n_domains:
            raise UnknownDomainError(
                f"unknown domain {domain_id} (model has {self.config.n_domains} domains)"
            )

    def encode(self, images: ImageBatch) -> MultiScaleFeatures:
        height, width = images.shape[-2:]
        divisor = self.config.size_divisor
        if height % divisor or width % divisor:
            raise ShapeError(
                f"image size {height}x{width} is not divisible by {divisor} "
                f"(required for {self.config.scales} scales)"
            )
        feats = []
        x = images
        for block in self.encoder:
            x = block(x)
            feats.append(x)
        return feats

    def apply_transfer(self, feats: MultiScaleFeatures, domain_id: int) -> MultiScaleFeatures:
        self.check_domain(domain_id)
        if len(feats) != self.config.scales:
            raise ShapeError(f"expected {self.config.scales} feature scales, got {len(feats)}")
        modules = self.transfers[domain_id]
        return [module(f) for module, f in zip(modules, feats, strict=True)]

    def decode(self, feats: MultiScaleFeatures, source: ImageBatch) -> ImageBatch:
        if len(feats) != self.config.scales:
            raise ShapeError(f"expected {self.config.scales} feature scales, got {len(feats)}")
        top = feats[0]
        if source.shape[0] != top.shape[0] or source.shape[-2:] != top.shape[-2:]:
            raise ShapeError(
                f"source shape {tuple(source.shape)} does not match features "
                f"{tuple(top.shape)} at full resolution"
            )

        x = feats[-1]
        for up, skip in zip(self.ups, reversed(feats[:-1]), strict=True):
            x = up(F.interpolate(x, scale_factor=2, mode="nearest")) + skip
        raw = self.head(x)

        if self.config.residual_output:
            return torch.clamp(source + raw, 0.0, 1.0)
        return torch.clamp(raw, 0.0, 1.0)

    def reconstruct(self, images: ImageBatch) -> ImageBatch:
        return self.decode(self.encode(images), images)

    def translate(self, images: ImageBatch, domain_id: int) -> ImageBatch:
        """Render `images` in domain `domain_id`; inputs must be a valid ImageBatch."""
        check_image_batch(images)
        return self.decode(self.apply_transfer(self.encode(images), domain_id), images)

    def translate_all(
        self, images: ImageBatch, domain_ids: Iterable[int] | None = None
    ) -> dict[int, ImageBatch]:
        """Encode once, then transfer and decode for every requested domain."""
        ids = list(range(self.config.n_domains)) if domain_ids is None else list(domain_ids)
        for domain_id in ids:
            self.check_domain(domain_id)
        check_image_batch(images)
        feats = self.encode(images)
        return {d: self.decode(self.apply_transfer(feats, d), images) for d in ids}

    def forward(self, images: ImageBatch, domain_id: int | None = None) -> ImageBatch:
        if domain_id is None:
            return self.reconstruct(images)
        return self.translate(images, domain_id)

    def shared_parameters(self) -> list[nn.Parameter]:
        return [
            p
            for name, p in self.named_parameters()
            if not name.startswith("transfers.")
        ]

    def domain_parameters(self, domain_id: int) -> list[nn.Parameter]:
        self.check_domain(domain_id)
        return list(self.transfers[domain_id].parameters())


def build_model(config: ModelConfig, init_seed: int) -> Generator:
    """
    Build a generator with deterministic initial weights.

    Initialization runs under a private RNG seeded with `init_seed`, so the
    same (config, seed) pair always gives bitwise-identical parameters and the
    caller's global RNG is left untouched.
    """
    with seeded_torch(init_seed):
        model = Generator(config)
        model.reset_head()
    logger.debug(
        f"Built generator: {config.scales} scales, {config.n_domains} domains, "
        f"{sum(p.numel() for p in model.parameters())} parameters"
    )
    return model


def encode(state: Generator, images: ImageBatch) -> MultiScaleFeatures:
    return state.encode(images)


def apply_transfer(state: Generator, feats: MultiScaleFeatures, domain_id: int) -> MultiScaleFeatures:
    return state.apply_transfer(feats, domain_id)


def decode(state: Generator, feats: MultiScaleFeatures, source: ImageBatch) -> ImageBatch:
    return state.decode(feats, source)


def reconstruct(state: Generator, images: ImageBatch) -> ImageBatch:
    return state.reconstruct(images)


def translate(state: Generator, images: ImageBatch, domain_id: int) -> ImageBatch:
    return state.translate(images, domain_id)


def translate_all(
    state: Generator, images: ImageBatch, domain_ids: Iterable[int] | None = None
) -> dict[int, ImageBatch]:
    return state.translate_all(images, domain_ids)


def parameter_count(config: ModelConfig) -> tuple[int, int, int]:
    """
    (shared, per_domain, total) parameter counts for a configuration.

    The network is instantiated on the meta device, so no memory is allocated.
    """
    with torch.device("meta"):
        model = Generator(config)
    shared = sum(p.numel() for p in model.shared_parameters())
    per_domain = sum(p.numel() for p in model.transfers[0].parameters())
    return shared, per_domain, shared + config.n_domains * per_domain
