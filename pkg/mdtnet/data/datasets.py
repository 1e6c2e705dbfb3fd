import logging
import os
from collections.abc import Iterator, Sequence
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator
from torch.utils.data import DataLoader, Dataset, Sampler

from mdtnet.core.exceptions import (
    DatasetError,
    ImageDecodeError,
    UnknownDomainError,
    ValidationError,
)
from mdtnet.core.seeding import philox, stream_seed
from mdtnet.types import ImageBatch

from .images import IMG_EXTS, load_image

logger = logging.getLogger(__name__)

MASKS_DIR = "masks"
FLUID_SUFFIX = "_fluid"


class DomainDataset(BaseModel):
    """One domain of a corpus: an ordered list of image files."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    domain_id: int = Field(ge=0)
    name: str
    image_paths: tuple[Path, ...]

    @field_validator("image_paths")
    @classmethod
    def _non_empty(cls, value: tuple[Path, ...]) -> tuple[Path, ...]:
        if not value:
            raise ValueError("a domain needs at least one image")
        return value

    @computed_field  # type: ignore[prop-decorator]
    @property
    def count(self) -> int:
        return len(self.image_paths)


def _is_image(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in IMG_EXTS


def scan_dataset(root: str | os.PathLike[str]) -> list[DomainDataset]:
    """
    Discover one domain per immediate subdirectory of `root`.

    Domain ids follow lexicographic subdirectory order and image paths are
    sorted lexicographically, so the result depends only on directory contents.
    Mask subdirectories inside a domain are not scanned.

    Raises:
        DatasetError: "dataset root not found", "empty domain <name>", or no domains at all.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root not found: {root}")

    subdirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not subdirs:
        raise DatasetError(f"no domain subdirectories under {root}")

    datasets = []
    for domain_id, subdir in enumerate(subdirs):
        paths = sorted((p for p in subdir.iterdir() if _is_image(p)), key=lambda p: p.name)
        if not paths:
            raise DatasetError(f"empty domain {subdir.name}")
        datasets.append(
            DomainDataset(domain_id=domain_id, name=subdir.name, image_paths=tuple(paths))
        )
    logger.debug(f"Scanned {root}: {[(d.name, d.count) for d in datasets]}")
    return datasets


def find_domain(datasets: Sequence[DomainDataset], name: str) -> DomainDataset:
    """Look a domain up by name; the error lists what is available."""
    for dataset in datasets:
        if dataset.name == name:
            return dataset
    available = ", ".join(d.name for d in datasets)
    raise UnknownDomainError(f"unknown domain '{name}' (available: {available})")


def sample_indices(count: int, batch: int, rng_seed: int) -> np.ndarray:
    """Uniform indices with replacement from a counter-based stream keyed by rng_seed."""
    if batch < 1:
        raise ValidationError(f"batch must be >= 1, got {batch}")
    return philox(rng_seed).integers(0, count, size=batch)


class DomainImages(Dataset[torch.Tensor]):
    """Image files decoded on access, each item shaped (C, H, W)."""

    def __init__(self, paths: Sequence[Path], size: tuple[int, int] | None):
        self.paths = list(paths)
        self.size = size

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, index: int) -> torch.Tensor:
        return load_image(self.paths[index], self.size)[0]


class SeededBatchSampler(Sampler[list[int]]):
    """
    One batch of indices per training iteration.

    The batch for iteration k is drawn with replacement from the stream keyed by
    (seed, domain id, k), so starting at any k reproduces the uninterrupted
    sequence from that point on.
    """

    def __init__(self, count: int, batch: int, seed: int, domain_id: int, start: int, stop: int):
        if batch < 1:
            raise ValidationError(f"batch must be >= 1, got {batch}")
        self.count = count
        self.batch = batch
        self.seed = seed
        self.domain_id = domain_id
        self.start = start
        self.stop = stop

    def __iter__(self) -> Iterator[list[int]]:
        for iteration in range(self.start, self.stop):
            rng_seed = stream_seed(self.seed, self.domain_id, iteration)
            yield sample_indices(self.count, self.batch, rng_seed).tolist()

    def __len__(self) -> int:
        return max(0, self.stop - self.start)


def load_images(
    paths: Sequence[Path],
    size: tuple[int, int] | None,
    num_workers: int = 0,
) -> ImageBatch:
    """Load several images into one batch, preserving order."""
    if not paths:
        raise ValidationError("no images to load")
    loader = DataLoader(
        DomainImages(paths, size), batch_size=len(paths), shuffle=False, num_workers=num_workers
    )
    return next(iter(loader))


def sample_batch(
    dataset: DomainDataset,
    batch: int,
    rng_seed: int,
    size: tuple[int, int],
    num_workers: int = 0,
) -> ImageBatch:
    """
    Draw `batch` images uniformly with replacement from a domain.

    Deterministic per (dataset, batch, rng_seed) and independent of the
    number of loader workers.
    """
    indices = sample_indices(dataset.count, batch, rng_seed)
    return load_images([dataset.image_paths[i] for i in indices], size, num_workers)


def iteration_loader(
    dataset: DomainDataset,
    batch: int,
    seed: int,
    size: tuple[int, int],
    *,
    start: int,
    stop: int,
    num_workers: int = 0,
) -> DataLoader[torch.Tensor]:
    """
    Loader yielding the batches of iterations start..stop-1 for one domain.

    Batch k equals `sample_batch(dataset, batch, stream_seed(seed, domain_id, k), size)`.
    """
    return DataLoader(
        DomainImages(dataset.image_paths, size),
        batch_sampler=SeededBatchSampler(dataset.count, batch, seed, dataset.domain_id, start, stop),
        num_workers=num_workers,
        persistent_workers=num_workers > 0,
    )


def split_holdout(
    dataset: DomainDataset, n_holdout: int, seed: int
) -> tuple[DomainDataset, DomainDataset | None]:
    """
    Hold out `n_holdout` images of a domain for evaluation.

    Returns:
        (training part, held-out part); the held-out part is None when n_holdout is 0.
    """
    if n_holdout < 0:
        raise ValidationError(f"n_holdout must be >= 0, got {n_holdout}")
    if n_holdout == 0:
        return dataset, None
    if n_holdout >= dataset.count:
        raise ValidationError(
            f"cannot hold out {n_holdout} of {dataset.count} images in domain {dataset.name}"
        )
    chosen = set(philox(seed, dataset.domain_id).permutation(dataset.count)[:n_holdout].tolist())
    train = [p for i, p in enumerate(dataset.image_paths) if i not in chosen]
    held = [p for i, p in enumerate(dataset.image_paths) if i in chosen]
    return (
        dataset.model_copy(update={"image_paths": tuple(train)}),
        dataset.model_copy(update={"image_paths": tuple(held)}),
    )


def mask_paths(image_path: str | os.PathLike[str]) -> tuple[Path, Path]:
    """(structure mask path, fluid mask path) belonging to an image."""
    image_path = Path(image_path)
    masks = image_path.parent / MASKS_DIR
    return masks / f"{image_path.stem}.png", masks / f"{image_path.stem}{FLUID_SUFFIX}.png"


def _read_mask(path: Path, size: tuple[int, int] | None) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img = img.convert("L")
            if size is not None and (img.height, img.width) != tuple(size):
                img = img.resize((size[1], size[0]), resample=Image.Resampling.NEAREST)
            return np.asarray(img, dtype=np.int64)
    except (OSError, UnidentifiedImageError) as exc:
        raise ImageDecodeError(path, str(exc)) from exc


def load_masks(
    image_path: str | os.PathLike[str], size: tuple[int, int] | None = None
) -> tuple[np.ndarray, np.ndarray | None] | None:
    """
    Read the structure (and, if present, fluid) mask stored next to an image.

    Returns:
        (structure labels, fluid bool mask or None), or None when the image has no masks.
    """
    structure_path, fluid_path = mask_paths(image_path)
    if not structure_path.is_file():
        return None
    structure = _read_mask(structure_path, size)
    fluid = _read_mask(fluid_path, size) > 0 if fluid_path.is_file() else None
    return structure, fluid
