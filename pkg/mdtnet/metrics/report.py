import csv
import json
import logging
import math
import os
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, model_validator
from torch.utils.data import DataLoader

from mdtnet.core.exceptions import DatasetError, ValidationError
from mdtnet.data import DomainDataset, DomainImages, load_masks
from mdtnet.fen import DEFAULT_CONTENT_LAYERS
from mdtnet.model import Generator
from mdtnet.types import EmbedderProtocol, FeatureExtractorProtocol

from .embedding import EmbeddingSet
from .frechet import frechet_distance
from .similarity import dpd, perceptual_distances
from .structure import boundary_f1, boundary_map, edge_map

logger = logging.getLogger(__name__)

AVERAGE = "average"
CSV_NAME = "metrics.csv"
CSV_COLUMNS = ("source", "target", "fid", "lpips_pct", "dpd", "n_images", "structural_consistency")


class MetricsReport(BaseModel):
    """Scores of one transfer direction (or the average over several)."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    source: str
    target: str
    fid: float = Field(ge=0)
    lpips_pct: float = Field(ge=0, le=100)
    dpd: float
    lam: float = 1.0
    n_images: int = Field(ge=0)
    structural_consistency: float | None = Field(default=None, ge=0, le=1)
    embedder_id: str = ""

    @model_validator(mode="after")
    def _dpd_identity(self) -> "MetricsReport":
        expected = dpd(self.fid, self.lpips_pct, self.lam)
        if not math.isclose(self.dpd, expected, rel_tol=1e-6, abs_tol=1e-6):
            raise ValueError(f"dpd {self.dpd} does not equal fid + lam*(100 - lpips) = {expected}")
        return self

    @property
    def content_similarity_pct(self) -> float:
        return self.lpips_pct

    @classmethod
    def create(
        cls,
        source: str,
        target: str,
        fid: float,
        lpips_pct: float,
        *,
        lam: float = 1.0,
        n_images: int,
        structural_consistency: float | None = None,
        embedder_id: str = "",
    ) -> "MetricsReport":
        return cls(
            source=source,
            target=target,
            fid=fid,
            lpips_pct=lpips_pct,
            dpd=dpd(fid, lpips_pct, lam),
            lam=lam,
            n_images=n_images,
            structural_consistency=structural_consistency,
            embedder_id=embedder_id,
        )


def _chunks(items: Sequence[Path], size: int) -> list[Sequence[Path]]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def _loader(
    paths: Sequence[Path], size: tuple[int, int], batch: int, num_workers: int
) -> DataLoader[torch.Tensor]:
    return DataLoader(DomainImages(paths, size), batch_size=batch, num_workers=num_workers)


@torch.no_grad()
def evaluate_direction(
    model: Generator,
    source_dataset: DomainDataset,
    target_dataset: DomainDataset,
    fen: FeatureExtractorProtocol,
    embedder: EmbedderProtocol,
    *,
    target_domain: int | None = None,
    size: tuple[int, int],
    layers: Sequence[str] = DEFAULT_CONTENT_LAYERS,
    lam: float = 1.0,
    batch: int = 8,
    num_workers: int = 0,
) -> MetricsReport:
    """
    Translate every source image into the target domain and score the result.

    fid compares the transferred set with the target domain's images;
    similarity compares every transferred image with its source. When source
    masks exist the structural consistency of the transferred images is
    reported too.
    """
    if not source_dataset.image_paths or not target_dataset.image_paths:
        raise DatasetError(
            f"cannot evaluate {source_dataset.name} -> {target_dataset.name}: empty dataset"
        )
    if batch < 1:
        raise ValidationError(f"batch must be >= 1, got {batch}")
    domain = target_dataset.domain_id if target_domain is None else target_domain
    model.eval()

    transferred_vectors = []
    distances = []
    structure_scores = []
    sources = _loader(source_dataset.image_paths, size, batch, num_workers)
    for chunk, images in zip(_chunks(source_dataset.image_paths, batch), sources, strict=True):
        transferred = model.translate(images, domain)
        transferred_vectors.append(embedder.embed_batch(transferred))
        distances.append(perceptual_distances(images, transferred, fen, layers).double())
        for path, image in zip(chunk, transferred, strict=True):
            masks = load_masks(path, size)
            if masks is not None:
                structure, fluid = masks
                edges = edge_map(image[0].double().cpu().numpy())
                structure_scores.append(boundary_f1(edges, boundary_map(structure, fluid)))

    target_vectors = [
        embedder.embed_batch(images)
        for images in _loader(target_dataset.image_paths, size, batch, num_workers)
    ]

    fid = frechet_distance(
        EmbeddingSet(np.concatenate(transferred_vectors), embedder.embedder_id),
        EmbeddingSet(np.concatenate(target_vectors), embedder.embedder_id),
    )
    similarity = float((1 - torch.cat(distances).mean()) * 100)
    report = MetricsReport.create(
        source_dataset.name,
        target_dataset.name,
        fid,
        similarity,
        lam=lam,
        n_images=source_dataset.count,
        structural_consistency=float(np.mean(structure_scores)) if structure_scores else None,
        embedder_id=embedder.embedder_id,
    )
    logger.info(
        f"{report.source} -> {report.target}: fid {report.fid:.2f}, "
        f"lpips {report.lpips_pct:.2f}%, dpd {report.dpd:.2f}"
    )
    return report


def summarize(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Average several direction reports into one summary row."""
    if not reports:
        raise ValidationError("nothing to summarize")
    lams = {r.lam for r in reports}
    if len(lams) != 1:
        raise ValidationError(f"reports use different lambda values: {sorted(lams)}")
    structure = [r.structural_consistency for r in reports if r.structural_consistency is not None]
    return MetricsReport.create(
        AVERAGE,
        AVERAGE,
        float(np.mean([r.fid for r in reports])),
        float(np.mean([r.lpips_pct for r in reports])),
        lam=lams.pop(),
        n_images=sum(r.n_images for r in reports),
        structural_consistency=float(np.mean(structure)) if structure else None,
        embedder_id=reports[0].embedder_id,
    )


def write_reports(
    reports: Sequence[MetricsReport], out_dir: str | os.PathLike[str]
) -> tuple[list[Path], Path]:
    """
    Write one JSON file per direction and `metrics.csv` with an averaged last row.

    Returns:
        (JSON paths in report order, CSV path)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_paths = []
    for report in reports:
        path = out_dir / f"{report.source}_to_{report.target}.json"
        path.write_text(json.dumps(report.model_dump(mode="json"), indent=2) + "\n")
        json_paths.append(path)

    csv_path = out_dir / CSV_NAME
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in [*reports, summarize(reports)]:
            values = row.model_dump()
            if values["structural_consistency"] is None:
                values["structural_consistency"] = ""
            writer.writerow(values)
    return json_paths, csv_path


def read_reports_csv(path: str | os.PathLike[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
