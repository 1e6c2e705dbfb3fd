import logging
import os
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image, UnidentifiedImageError

from mdtnet.core.exceptions import ImageDecodeError, ShapeError, ValidationError
from mdtnet.types import ImageBatch

logger = logging.getLogger(__name__)

IMG_EXTS = (".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


def _decode(img: Image.Image) -> tuple[np.ndarray, float]:
    """Return (H x W x C float64 array, format max value) for a PIL image."""
    mode = img.mode
    if mode in ("I;16", "I;16B", "I;16L", "I;16N"):
        return np.asarray(img, dtype=np.float64)[..., None], 65535.0
    if mode == "I":
        # 16-bit PNGs decode to mode "I" on some Pillow versions
        return np.asarray(img, dtype=np.float64)[..., None], 65535.0
    if mode in ("1", "P", "L"):
        return np.asarray(img.convert("L"), dtype=np.float64)[..., None], 255.0
    if mode in ("LA", "RGBA", "CMYK", "YCbCr", "RGB"):
        return np.asarray(img.convert("RGB"), dtype=np.float64), 255.0
    raise ValueError(f"unsupported image mode {mode}")


def load_image(
    path: str | os.PathLike[str],
    size: tuple[int, int] | None = None,
    grayscale: bool = True,
) -> ImageBatch:
    """
    Load an 8- or 16-bit raster image as a batch of one.

    Intensities are divided by the format's maximum value, so an 8-bit 255 maps
    to 1.0 and a 16-bit 65535 maps to 1.0. Color images are reduced to one
    luma channel unless `grayscale` is False.

    Parameters:
        path: Image file.
        size: Target (height, width); bilinear resize when it differs from the file.
        grayscale: Collapse color images to one channel.

    Returns:
        Tensor of shape (1, C, H, W), float32, values in [0, 1].

    Raises:
        ImageDecodeError: The file is missing, unreadable or corrupt.
    """
    try:
        with Image.open(path) as img:
            img.load()
            array, max_value = _decode(img)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise ImageDecodeError(path, str(exc)) from exc

    if array.shape[-1] == 3 and grayscale:
        array = (array @ _LUMA)[..., None]

    pixels = torch.from_numpy(array / max_value).permute(2, 0, 1).unsqueeze(0)
    pixels = pixels.to(torch.float32)
    if size is not None and tuple(pixels.shape[-2:]) != tuple(size):
        pixels = F.interpolate(
            pixels, size=tuple(size), mode="bilinear", align_corners=False
        )
    return pixels.clamp_(0.0, 1.0)


def save_image(image: torch.Tensor, path: str | os.PathLike[str]) -> Path:
    """
    Write one image as an 8-bit PNG (value * 255, rounded to nearest).

    Accepts (H, W), (C, H, W) or (1, C, H, W) tensors with C in {1, 3}.
    """
    pixels = image.detach().cpu()
    while pixels.dim() > 3:
        if pixels.shape[0] != 1:
            raise ShapeError(f"save_image expects a single image, got shape {tuple(image.shape)}")
        pixels = pixels[0]
    if pixels.dim() == 2:
        pixels = pixels.unsqueeze(0)

    array = (pixels.clamp(0.0, 1.0) * 255.0).round().to(torch.uint8).numpy()
    if array.shape[0] == 1:
        out = Image.fromarray(array[0])
    elif array.shape[0] == 3:
        out = Image.fromarray(np.ascontiguousarray(np.transpose(array, (1, 2, 0))))
    else:
        raise ShapeError(f"cannot save an image with {array.shape[0]} channels")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out.save(path, format="PNG")
    return path


def image_size(path: str | os.PathLike[str]) -> tuple[int, int]:
    """Return the (height, width) of an image file without decoding pixels."""
    try:
        with Image.open(path) as img:
            width, height = img.size
    except (OSError, UnidentifiedImageError) as exc:
        raise ImageDecodeError(path, str(exc)) from exc
    return height, width


def check_size(size: tuple[int, int], multiple: int = 4, minimum: int = 32) -> tuple[int, int]:
    """Validate an image size for the generator's stride plan."""
    height, width = (int(v) for v in size)
    if height < minimum or width < minimum:
        raise ValidationError(f"image size {height}x{width} is below the minimum {minimum}x{minimum}")
    if height % multiple or width % multiple:
        raise ValidationError(f"image size {height}x{width} must be divisible by {multiple}")
    return height, width


def check_image_batch(images: torch.Tensor) -> ImageBatch:
    """Check the ImageBatch invariants: 4-D, 1 or 3 channels, finite, within [0, 1]."""
    if images.dim() != 4:
        raise ShapeError(f"expected a 4-D image batch, got shape {tuple(images.shape)}")
    if images.shape[1] not in (1, 3):
        raise ShapeError(f"expected 1 or 3 channels, got {images.shape[1]}")
    if not torch.isfinite(images).all():
        raise ValidationError("image batch contains non-finite values")
    if images.min() < 0.0 or images.max() > 1.0:
        raise ValidationError("image batch values must lie within [0, 1]")
    return images
