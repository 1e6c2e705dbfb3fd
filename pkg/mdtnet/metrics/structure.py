from collections.abc import Sequence

import numpy as np
import torch
from scipy import ndimage

from mdtnet.core.exceptions import ShapeError, ValidationError

EDGE_PERCENTILE = 90
_NEIGHBOURHOOD = np.ones((3, 3), dtype=bool)

# (row, col) step along each quantized gradient direction: 0, 45, 90, 135 degrees
_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1))


def _thin(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Non-maximum suppression along the gradient direction."""
    height, width = magnitude.shape
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180
    sector = (((angle + 22.5) // 45) % 4).astype(int)
    padded = np.pad(magnitude, 1)

    def shifted(dy: int, dx: int) -> np.ndarray:
        return padded[1 + dy : 1 + dy + height, 1 + dx : 1 + dx + width]

    keep = np.zeros_like(magnitude, dtype=bool)
    for index, (dy, dx) in enumerate(_STEPS):
        # ties go to the pixel on the negative side so plateaus keep one pixel
        local = (magnitude >= shifted(dy, dx)) & (magnitude > shifted(-dy, -dx))
        keep |= (sector == index) & local
    return np.where(keep & (magnitude > 0), magnitude, 0.0)


def edge_map(image: np.ndarray) -> np.ndarray:
    """Thinned Sobel edges binarized at the 90th percentile of the thinned magnitude."""
    image = np.asarray(image, dtype=np.float64)
    gx = ndimage.sobel(image, axis=1)
    gy = ndimage.sobel(image, axis=0)
    thinned = _thin(np.hypot(gx, gy), gx, gy)
    threshold = max(float(np.percentile(thinned, EDGE_PERCENTILE)), 0.0)
    return thinned > threshold


def boundary_map(structure: np.ndarray, fluid: np.ndarray | None = None) -> np.ndarray:
    """Pixels whose label differs from the pixel below or to the right."""
    labels = np.asarray(structure).astype(np.int64)
    if fluid is not None:
        labels = np.where(np.asarray(fluid, dtype=bool), labels.max() + 1, labels)
    boundary = np.zeros(labels.shape, dtype=bool)
    boundary[:-1, :] |= labels[:-1, :] != labels[1:, :]
    boundary[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    return boundary


def boundary_f1(edges: np.ndarray, boundary: np.ndarray) -> float:
    """F1 of predicted edges against reference boundaries with a 1-pixel tolerance."""
    if not boundary.any():
        return 1.0 if not edges.any() else 0.0
    if not edges.any():
        return 0.0
    precision = (edges & ndimage.binary_dilation(boundary, _NEIGHBOURHOOD)).sum() / edges.sum()
    recall = (boundary & ndimage.binary_dilation(edges, _NEIGHBOURHOOD)).sum() / boundary.sum()
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))


def _as_images(images: torch.Tensor | np.ndarray | Sequence[np.ndarray]) -> list[np.ndarray]:
    if isinstance(images, torch.Tensor):
        array = images.detach().cpu().double().numpy()
        if array.ndim == 4:
            if array.shape[1] != 1:
                raise ShapeError(f"expected one-channel images, got {array.shape[1]} channels")
            array = array[:, 0]
        return list(array)
    return [np.asarray(image, dtype=np.float64) for image in images]


def structural_consistency(
    source_masks: Sequence[np.ndarray],
    transferred_images: torch.Tensor | Sequence[np.ndarray],
    fluid_masks: Sequence[np.ndarray | None] | None = None,
) -> float:
    """
    Mean boundary F1 between each transferred image's edges and its source
    structure mask, in [0, 1].

    Raises:
        ValidationError: Empty input or unequal numbers of masks and images.
        ShapeError: A mask and its image differ in size.
    """
    images = _as_images(transferred_images)
    if not images:
        raise ValidationError("structural consistency needs at least one image")
    if len(source_masks) != len(images):
        raise ValidationError(f"{len(source_masks)} masks for {len(images)} images")
    fluids = list(fluid_masks) if fluid_masks is not None else [None] * len(images)

    scores = []
    for mask, fluid, image in zip(source_masks, fluids, images, strict=True):
        if np.shape(mask) != image.shape:
            raise ShapeError(f"mask shape {np.shape(mask)} does not match image {image.shape}")
        scores.append(boundary_f1(edge_map(image), boundary_map(mask, fluid)))
    return float(np.mean(scores))
