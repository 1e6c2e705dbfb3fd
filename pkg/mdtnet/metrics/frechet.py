import logging

import numpy as np
import scipy.linalg

from mdtnet.core.exceptions import (
    EmbedderMismatchError,
    InsufficientSamplesError,
    NumericalError,
)

from .embedding import EmbeddingSet

logger = logging.getLogger(__name__)

EIGEN_TOLERANCE = 1e-6


def _psd_sqrt_eigenvalues(matrix: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric PSD matrix with small negative eigenvalues clipped."""
    symmetric = (matrix + matrix.T) / 2
    try:
        values, vectors = scipy.linalg.eigh(symmetric)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigendecomposition of {what} failed: {exc}") from exc
    if not np.isfinite(values).all():
        raise NumericalError(f"eigendecomposition of {what} produced non-finite values")
    floor = -EIGEN_TOLERANCE * max(1.0, float(values.max(initial=0.0)))
    if values.min(initial=0.0) < floor:
        raise NumericalError(
            f"{what} has eigenvalue {values.min():.3e}, below the tolerance {floor:.3e}"
        )
    return np.clip(values, 0.0, None), vectors


def _trace_sqrt_product(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    # tr((A B)^1/2) == tr((A^1/2 B A^1/2)^1/2), and the latter is symmetric PSD
    values_a, vectors_a = _psd_sqrt_eigenvalues(cov_a, "covariance")
    sqrt_a = (vectors_a * np.sqrt(values_a)) @ vectors_a.T
    values, _ = _psd_sqrt_eigenvalues(sqrt_a @ cov_b @ sqrt_a, "covariance product")
    return float(np.sqrt(values).sum())


def _check(a: EmbeddingSet, b: EmbeddingSet) -> None:
    if a.embedder_id != b.embedder_id:
        raise EmbedderMismatchError(f"embedder mismatch: {a.embedder_id} vs {b.embedder_id}")
    if a.dim != b.dim:
        raise EmbedderMismatchError(f"embedder mismatch: dimension {a.dim} vs {b.dim}")
    for s in (a, b):
        if s.n < 2:
            raise InsufficientSamplesError(
                f"insufficient samples: {s.n} embedding(s), at least 2 are needed"
            )
        if s.n < s.dim + 1:
            logger.warning(
                f"{s.n} embeddings of dimension {s.dim}: covariance from "
                f"{s.embedder_id} is rank deficient"
            )


def frechet_distance(a: EmbeddingSet, b: EmbeddingSet) -> float:
    """
    Fréchet distance between Gaussians fitted to two embedding sets.

    ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^1/2) with unbiased
    covariances; the result is floored at zero.

    Raises:
        EmbedderMismatchError: The sets come from different embedders.
        InsufficientSamplesError: A set has fewer than two vectors.
        NumericalError: The covariance square root is not usable.
    """
    _check(a, b)
    mu_a = a.vectors.mean(axis=0)
    mu_b = b.vectors.mean(axis=0)
    cov_a = np.atleast_2d(np.cov(a.vectors, rowvar=False))
    cov_b = np.atleast_2d(np.cov(b.vectors, rowvar=False))

    value = (
        float(np.sum((mu_a - mu_b) ** 2))
        + float(np.trace(cov_a) + np.trace(cov_b))
        - 2.0 * _trace_sqrt_product(cov_a, cov_b)
    )
    if not np.isfinite(value):
        raise NumericalError("Fréchet distance is not finite")
    return max(value, 0.0)
