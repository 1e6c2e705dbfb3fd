from .embedding import (
    EmbeddingSet,
    FenLayerEmbedder,
    InceptionEmbedder,
    embed,
    parse_embedder,
)
from .frechet import frechet_distance
from .report import (
    AVERAGE,
    CSV_NAME,
    MetricsReport,
    evaluate_direction,
    read_reports_csv,
    summarize,
    write_reports,
)
from .similarity import content_similarity, dpd, perceptual_distances
from .structure import boundary_f1, boundary_map, edge_map, structural_consistency

__all__ = [
    "AVERAGE",
    "CSV_NAME",
    "EmbeddingSet",
    "FenLayerEmbedder",
    "InceptionEmbedder",
    "MetricsReport",
    "boundary_f1",
    "boundary_map",
    "content_similarity",
    "dpd",
    "edge_map",
    "embed",
    "evaluate_direction",
    "frechet_distance",
    "parse_embedder",
    "perceptual_distances",
    "read_reports_csv",
    "structural_consistency",
    "summarize",
    "write_reports",
]
