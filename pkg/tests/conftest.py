import os
from collections.abc import Sequence
from pathlib import Path

import pytest
import torch

from mdtnet.data import DomainDataset, default_styles, export_synthetic, scan_dataset
from mdtnet.fen import FeatureExtractor, FeatureMap, FenConfig, load_fen
from mdtnet.model import ModelConfig

SLOW_ENV = "MDT_RUN_SLOW"


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if os.environ.get(SLOW_ENV) == "1":
        return
    skip_slow = pytest.mark.skip(reason=f"desk-scale run; set {SLOW_ENV}=1 to enable")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


class StubFen:
    """Feature extractor whose every layer is the input itself, optionally scaled."""

    def __init__(self, scale: float = 1.0):
        self.scale = scale
        self.calls: list[tuple[str, ...]] = []

    def extract(self, images: torch.Tensor, layers: Sequence[str]) -> list[FeatureMap]:
        self.calls.append(tuple(layers))
        return [FeatureMap(values=images * self.scale, layer=name) for name in layers]


@pytest.fixture
def stub_fen() -> StubFen:
    return StubFen()


@pytest.fixture(scope="session")
def fen() -> FeatureExtractor:
    """Random-seeded VGG-16 extractor reaching the default loss layers."""
    return load_fen(FenConfig())


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(base_channels=4, scales=2, transfer_depth=2, transfer_growth=4, n_domains=3)


@pytest.fixture(scope="session")
def synthetic_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Three synthetic domains of eight 32x32 images each, with masks."""
    root = tmp_path_factory.mktemp("corpus")
    export_synthetic(root, default_styles(3), per_domain=8, size=(32, 32), seed=7)
    return root


@pytest.fixture(scope="session")
def synthetic_datasets(synthetic_root: Path) -> list[DomainDataset]:
    return scan_dataset(synthetic_root)
