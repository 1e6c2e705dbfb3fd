import logging
import os
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

import torch
from torch import nn
from torchvision.models.vgg import cfgs, make_layers

from mdtnet.core.exceptions import ConfigurationError, ManifestMismatchError, ShapeError
from mdtnet.core.seeding import seeded_torch
from mdtnet.io import read_archive, write_archive
from mdtnet.types import ImageBatch

from .config import FenConfig, PretrainedWeights, RandomWeights
from .gram import FeatureMap
from .layers import PLAN_KEYS, LayerSite, layer_table, parameter_shapes

logger = logging.getLogger(__name__)

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


class FeatureExtractor(nn.Module):
    """
    Frozen VGG feature stack exposing named intermediate activations.

    The stack is truncated after the deepest layer it was built for; its
    parameters never require gradients, so it cannot leak into an optimizer,
    while gradients still flow through it to the input images.
    """

    def __init__(self, variant: str, layers: Iterable[str]):
        super().__init__()
        table = layer_table(variant)
        requested = set(layers)
        unknown = sorted(requested - table.keys())
        if unknown:
            raise ConfigurationError(f"unknown {variant} layer(s): {', '.join(unknown)}")
        if not requested:
            raise ConfigurationError("a feature extractor needs at least one layer")

        self.variant = variant
        deepest = max(table[name].index for name in requested)
        self.sites: dict[str, LayerSite] = {
            name: site for name, site in table.items() if site.index <= deepest
        }
        self.features = make_layers(cfgs[PLAN_KEYS[variant]])[: deepest + 1]
        for module in self.features:
            if isinstance(module, nn.ReLU):
                module.inplace = False

        self.register_buffer("mean", torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(IMAGENET_STD).view(1, 3, 1, 1))

    @property
    def available_layers(self) -> list[str]:
        return list(self.sites)

    def freeze(self) -> "FeatureExtractor":
        self.eval()
        self.requires_grad_(False)
        return self

    def train(self, mode: bool = True) -> "FeatureExtractor":
        # the extractor has no train-mode behaviour; keep it in eval mode
        return super().train(False)

    def extract(self, images: ImageBatch, layers: Sequence[str]) -> list[FeatureMap]:
        """
        Run the stack and return one FeatureMap per requested layer, in request order.

        One-channel inputs are replicated to three channels, then every input is
        normalized with the ImageNet channel statistics.

        Raises:
            ConfigurationError: A layer is unknown or beyond this extractor's depth.
            ShapeError: The input is too small to reach a requested layer.
        """
        missing = [name for name in layers if name not in self.sites]
        if missing:
            raise ConfigurationError(
                f"layer(s) {', '.join(missing)} not available; "
                f"extractor provides {', '.join(self.sites)}"
            )
        height, width = images.shape[-2:]
        for name in layers:
            pools = self.sites[name].pools_before
            if min(height, width) >> pools < 1:
                raise ShapeError(f"input too small for layer {name}")

        x = images
        if x.shape[1] == 1:
            x = x.expand(-1, 3, -1, -1)
        x = (x - self.mean.to(x.dtype)) / self.std.to(x.dtype)

        wanted = {self.sites[name].index: name for name in layers}
        deepest = max(wanted)
        outputs: dict[str, torch.Tensor] = {}
        for index, module in enumerate(self.features):
            x = module(x)
            if index in wanted:
                outputs[wanted[index]] = x
            if index == deepest:
                break
        return [FeatureMap(values=outputs[name], layer=name) for name in layers]

    def forward(self, images: ImageBatch) -> list[FeatureMap]:
        return self.extract(images, self.available_layers)


def _init_random(extractor: FeatureExtractor) -> None:
    for module in extractor.features:
        if isinstance(module, nn.Conv2d):
            nn.init.kaiming_normal_(module.weight, mode="fan_in", nonlinearity="relu")
            nn.init.zeros_(module.bias)


def _load_pretrained(extractor: FeatureExtractor, path: Path) -> None:
    if not path.is_file():
        raise ConfigurationError(f"FEN weight file not found: {path}")
    archive = read_archive(path)
    stored_variant = archive.metadata.get("variant")
    if stored_variant is not None and stored_variant != extractor.variant:
        raise ManifestMismatchError(
            f"FEN manifest mismatch: file holds {stored_variant}, config asks for {extractor.variant}"
        )

    expected = parameter_shapes(extractor.variant)
    for name, tensor in archive.tensors.items():
        if name not in expected:
            raise ManifestMismatchError(
                f"FEN manifest mismatch: '{name}' is not part of {extractor.variant}"
            )
        if tuple(tensor.shape) != expected[name]:
            raise ManifestMismatchError(
                f"FEN manifest mismatch: '{name}' has shape {tuple(tensor.shape)}, "
                f"{extractor.variant} expects {expected[name]}"
            )

    state = extractor.state_dict()
    needed = [key for key in state if key.startswith("features.")]
    absent = [key for key in needed if key not in archive.tensors]
    if absent:
        raise ManifestMismatchError(
            f"FEN manifest mismatch: file lacks {', '.join(absent[:4])}"
            + (" ..." if len(absent) > 4 else "")
        )
    extractor.load_state_dict(
        {key: archive.tensors[key].to(state[key].dtype) for key in needed}, strict=False
    )


def load_fen(config: FenConfig, extra_layers: Iterable[str] = ()) -> FeatureExtractor:
    """
    Build the frozen feature extractor described by `config`.

    The stack reaches the deepest of the configured content/domain layers and
    any `extra_layers` (for example an embedding layer). Random-seeded weights
    use He-normal initialization under a private, fixed-seed RNG.

    Raises:
        ConfigurationError: Unknown layer name or missing weight file.
        ManifestMismatchError: Weight file does not match the variant's architecture.
    """
    layers = [*config.content_layers, *config.domain_layers, *extra_layers]
    weights = config.weights
    if isinstance(weights, RandomWeights):
        with seeded_torch(weights.seed):
            extractor = FeatureExtractor(config.variant, layers)
            _init_random(extractor)
        logger.info(f"Loaded {config.variant} FEN with random weights (seed {weights.seed})")
    elif isinstance(weights, PretrainedWeights):
        extractor = FeatureExtractor(config.variant, layers)
        _load_pretrained(extractor, Path(weights.path))
        logger.info(f"Loaded {config.variant} FEN weights from {weights.path}")
    else:  # pragma: no cover
        raise ConfigurationError(f"unsupported FEN weights source {weights!r}")
    return extractor.freeze()


def save_fen_weights(extractor: FeatureExtractor, path: str | os.PathLike[str]) -> Path:
    """Write the extractor's convolution weights as a portable archive."""
    tensors = {
        key: value
        for key, value in extractor.state_dict().items()
        if key.startswith("features.")
    }
    return write_archive(path, tensors, {"variant": extractor.variant})


def import_torchvision_weights(
    state_dict: Mapping[str, torch.Tensor],
    variant: str,
    path: str | os.PathLike[str],
) -> Path:
    """
    Convert a torchvision VGG state dict (already on disk locally) to the archive format.

    Only the `features.*` convolution tensors are kept; the classifier is dropped.
    """
    expected = parameter_shapes(variant)
    tensors = {}
    for key, shape in expected.items():
        if key not in state_dict:
            raise ManifestMismatchError(f"FEN manifest mismatch: state dict lacks '{key}'")
        if tuple(state_dict[key].shape) != shape:
            raise ManifestMismatchError(
                f"FEN manifest mismatch: '{key}' has shape {tuple(state_dict[key].shape)}, "
                f"{variant} expects {shape}"
            )
        tensors[key] = state_dict[key].to(torch.float32)
    return write_archive(path, tensors, {"variant": variant, "source": "torchvision"})


def extract(
    handle: FeatureExtractor, images: ImageBatch, layers: Sequence[str]
) -> list[FeatureMap]:
    """Functional form of FeatureExtractor.extract."""
    return handle.extract(images, layers)
