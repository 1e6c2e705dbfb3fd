"""
Deterministic synthetic multi-domain corpus.

Each sample is drawn in two independent stages: a geometry stage (retina-like
horizontal bands and dark fluid blobs, keyed by ``(geometry_seed, i)``) and an
appearance stage (the domain's style, with speckle keyed by
``(geometry_seed, i, style hash)``). Two domains rendered from the same
geometry seed therefore share masks exactly and differ only in appearance.
"""

import logging
import math
import os
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field
from scipy.ndimage import gaussian_filter

from mdtnet.async_patterns import ParallelExecutor
from mdtnet.core.exceptions import ValidationError
from mdtnet.core.seeding import philox, stable_hash, stream_seed

from .datasets import DomainDataset, mask_paths
from .images import check_size, save_image

logger = logging.getLogger(__name__)

BACKGROUND_INTENSITY = 0.04
FLUID_INTENSITY = 0.06


class DomainStyle(BaseModel):
    """Appearance parameters of one synthetic domain."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    speckle_sigma: float = Field(default=0.0, ge=0.0)
    contrast_gamma: float = Field(default=1.0, gt=0.0)
    brightness_offset: float = Field(default=0.0, ge=-0.3, le=0.3)
    blur_radius: float = Field(default=0.0, ge=0.0)
    band_intensity_scale: float = Field(default=1.0, gt=0.0)

    def style_hash(self) -> int:
        return stable_hash(self.model_dump())


NEUTRAL_STYLE = DomainStyle()

DEFAULT_STYLES: tuple[DomainStyle, ...] = (
    DomainStyle(speckle_sigma=0.05, contrast_gamma=1.0),
    DomainStyle(speckle_sigma=0.20, contrast_gamma=0.7, blur_radius=1.0),
    DomainStyle(speckle_sigma=0.10, contrast_gamma=1.4, brightness_offset=0.1),
)

VENDOR_NAMES = ("cirrus", "spectralis", "topcon")


@dataclass(frozen=True)
class SyntheticSample:
    image: torch.Tensor  # 1 x H x W, float32 in [0, 1]
    structure_mask: np.ndarray  # H x W int64, 0 = background, k = k-th band
    fluid_mask: np.ndarray  # H x W bool


@dataclass(frozen=True)
class _Geometry:
    labels: np.ndarray
    fluid: np.ndarray
    band_intensity: np.ndarray


def default_domain_names(n_domains: int) -> list[str]:
    """Vendor-like names for up to three domains, zero-padded ids beyond that."""
    if n_domains <= len(VENDOR_NAMES):
        return list(VENDOR_NAMES[:n_domains])
    return [f"domain{k:02d}" for k in range(n_domains)]


def default_styles(n_domains: int, seed: int = 0) -> list[DomainStyle]:
    """The three stock styles, extended with seeded random styles for extra domains."""
    styles = list(DEFAULT_STYLES[:n_domains])
    for k in range(len(styles), n_domains):
        rng = philox(seed, k, 0x57)
        styles.append(
            DomainStyle(
                speckle_sigma=float(rng.uniform(0.02, 0.25)),
                contrast_gamma=float(rng.uniform(0.6, 1.6)),
                brightness_offset=float(rng.uniform(-0.1, 0.1)),
                blur_radius=float(rng.uniform(0.0, 1.5)),
                band_intensity_scale=float(rng.uniform(0.8, 1.2)),
            )
        )
    return styles


def _draw_geometry(rng: np.random.Generator, height: int, width: int) -> _Geometry:
    n_bands = int(rng.integers(4, 8))
    top = rng.uniform(0.18, 0.30) * height
    bottom = rng.uniform(0.70, 0.85) * height
    weights = rng.uniform(0.6, 1.4, size=n_bands)
    thickness = (bottom - top) * weights / weights.sum()
    base = top + np.concatenate([[0.0], np.cumsum(thickness)])

    x = np.arange(width) + 0.5
    curve = rng.uniform(0.02, 0.06) * height * np.sin(
        2 * math.pi * rng.uniform(0.5, 1.5) * x / width + rng.uniform(0, 2 * math.pi)
    )
    boundaries = np.empty((n_bands + 1, width))
    for k in range(n_bands + 1):
        ripple = rng.uniform(0.0, 0.25) * thickness.min() * np.sin(
            2 * math.pi * rng.uniform(1.0, 3.0) * x / width
            + rng.uniform(0, 2 * math.pi)
        )
        boundaries[k] = base[k] + curve + ripple
    for k in range(1, n_bands + 1):
        boundaries[k] = np.maximum(boundaries[k], boundaries[k - 1] + 1.0)
    boundaries = np.clip(boundaries, 0.0, float(height))

    rows = np.arange(height)[:, None] + 0.5
    labels = (rows[None, :, :] >= boundaries[:, None, :]).sum(axis=0).astype(np.int64)
    labels[labels == n_bands + 1] = 0

    # alternate bright and dark layers so neighbours always differ in intensity
    band_intensity = np.empty(n_bands + 1)
    band_intensity[0] = BACKGROUND_INTENSITY
    for k in range(1, n_bands + 1):
        band_intensity[k] = rng.uniform(0.55, 0.9) if k % 2 else rng.uniform(0.2, 0.42)

    fluid = np.zeros((height, width), dtype=bool)
    yy, xx = np.mgrid[0:height, 0:width] + 0.5
    for _ in range(int(rng.integers(0, 4))):
        band = int(rng.integers(1, n_bands + 1))
        cx = rng.uniform(0.15, 0.85) * width
        col = min(int(cx), width - 1)
        upper, lower = boundaries[band - 1, col], boundaries[band, col]
        cy = 0.5 * (upper + lower)
        b = rng.uniform(0.30, 0.45) * (lower - upper)
        a = rng.uniform(width / 24, width / 10)
        if b < 1.0:
            continue
        ellipse = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0
        fluid |= ellipse & (labels == band)

    return _Geometry(labels=labels, fluid=fluid, band_intensity=band_intensity)


def _render(
    geometry: _Geometry, style: DomainStyle, noise_rng: np.random.Generator
) -> np.ndarray:
    labels = geometry.labels
    image = geometry.band_intensity[labels] * np.where(
        labels > 0, style.band_intensity_scale, 1.0
    )
    image[geometry.fluid] = FLUID_INTENSITY
    image = np.clip(image, 0.0, 1.0) ** style.contrast_gamma
    if style.blur_radius > 0:
        image = gaussian_filter(image, sigma=style.blur_radius, mode="nearest")
    image = image + style.brightness_offset
    if style.speckle_sigma > 0:
        image = image * noise_rng.normal(1.0, style.speckle_sigma, size=image.shape)
    return np.clip(image, 0.0, 1.0)


def generate_synthetic(
    geometry_seed: int,
    style: DomainStyle,
    count: int,
    size: tuple[int, int],
) -> list[SyntheticSample]:
    """
    Generate `count` synthetic OCT-like samples rendered in `style`.

    Sample i uses the geometry stream keyed by (geometry_seed, i) and the noise
    stream keyed by (geometry_seed, i, style hash); results do not depend on
    call order or on any global RNG.

    Raises:
        ValidationError: count < 1, or size not divisible by 4 / below 32 px.
    """
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    if geometry_seed < 0:
        raise ValidationError(f"geometry_seed must be non-negative, got {geometry_seed}")
    height, width = check_size(size)
    style_key = style.style_hash()

    samples = []
    for i in range(count):
        geometry = _draw_geometry(philox(geometry_seed, i), height, width)
        pixels = _render(geometry, style, philox(geometry_seed, i, style_key))
        samples.append(
            SyntheticSample(
                image=torch.from_numpy(pixels).to(torch.float32).unsqueeze(0),
                structure_mask=geometry.labels,
                fluid_mask=geometry.fluid,
            )
        )
    return samples


def domain_geometry_seed(seed: int, domain_id: int) -> int:
    """Geometry seed of one domain in an exported corpus (domains are unpaired)."""
    return stream_seed(seed, domain_id) & 0x7FFFFFFF


def _write_sample(job: tuple[SyntheticSample, Path, Path, Path]) -> None:
    sample, image_path, structure_path, fluid_path = job
    save_image(sample.image, image_path)
    save_image(torch.from_numpy(sample.structure_mask.astype(np.float32) / 255.0), structure_path)
    save_image(torch.from_numpy(sample.fluid_mask.astype(np.float32)), fluid_path)


def export_synthetic(
    out_root: str | os.PathLike[str],
    styles: Sequence[DomainStyle],
    per_domain: int,
    size: tuple[int, int],
    seed: int,
    names: Sequence[str] | None = None,
    executor: ParallelExecutor | None = None,
) -> list[DomainDataset]:
    """
    Write a synthetic corpus in the dataset layout.

    Layout::

        <out_root>/<name>/<00000>.png
        <out_root>/<name>/masks/<00000>.png          structure labels (8-bit)
        <out_root>/<name>/masks/<00000>_fluid.png    fluid mask (0 / 255)

    Returns:
        One DomainDataset per written domain, ids in name order.
    """
    names = list(names) if names is not None else default_domain_names(len(styles))
    if len(names) != len(styles):
        raise ValidationError(f"{len(names)} names given for {len(styles)} styles")
    if sorted(names) != names:
        raise ValidationError("domain names must be in lexicographic order to keep ids stable")
    executor = executor or ParallelExecutor(limit=1)
    out_root = Path(out_root)

    datasets = []
    for domain_id, (name, style) in enumerate(zip(names, styles, strict=True)):
        samples = generate_synthetic(
            domain_geometry_seed(seed, domain_id), style, per_domain, size
        )
        domain_dir = out_root / name
        jobs = []
        for i, sample in enumerate(samples):
            image_path = domain_dir / f"{i:05d}.png"
            structure_path, fluid_path = mask_paths(image_path)
            jobs.append((sample, image_path, structure_path, fluid_path))
        executor.map_ordered(_write_sample, jobs)
        logger.info(f"Wrote {len(samples)} synthetic images for domain '{name}'")
        datasets.append(
            DomainDataset(
                domain_id=domain_id,
                name=name,
                image_paths=tuple(job[1] for job in jobs),
            )
        )
    return datasets
