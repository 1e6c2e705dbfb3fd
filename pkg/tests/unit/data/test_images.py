import numpy as np
import pytest
import torch
from PIL import Image

from mdtnet.core import ImageDecodeError, ShapeError, ValidationError
from mdtnet.data import check_image_batch, check_size, image_size, load_image, save_image


@pytest.fixture
def gray_png(tmp_path):
    path = tmp_path / "gray.png"
    pixels = np.zeros((32, 36), dtype=np.uint8)
    pixels[0, 0] = 255
    pixels[0, 1] = 128
    Image.fromarray(pixels).save(path)
    return path


def test_load_image_normalizes_8_bit(gray_png):
    image = load_image(gray_png)
    assert image.shape == (1, 1, 32, 36)
    assert image.dtype == torch.float32
    assert image[0, 0, 0, 0].item() == 1.0
    assert image[0, 0, 0, 1].item() == pytest.approx(128 / 255, abs=1e-6)
    assert image[0, 0, 1, 1].item() == 0.0


def test_load_image_normalizes_16_bit(tmp_path):
    path = tmp_path / "deep.png"
    pixels = np.full((32, 32), 65535, dtype=np.uint16)
    pixels[1, 1] = 0
    Image.fromarray(pixels).save(path)
    image = load_image(path)
    assert image[0, 0, 0, 0].item() == 1.0
    assert image[0, 0, 1, 1].item() == 0.0


def test_load_image_collapses_rgb(tmp_path):
    path = tmp_path / "rgb.png"
    Image.fromarray(np.full((32, 32, 3), 255, dtype=np.uint8)).save(path)
    assert load_image(path).shape == (1, 1, 32, 32)
    assert load_image(path, grayscale=False).shape == (1, 3, 32, 32)


def test_load_image_resizes(gray_png):
    assert load_image(gray_png, size=(64, 48)).shape == (1, 1, 64, 48)


def test_corrupt_file_names_the_path(tmp_path):
    path = tmp_path / "broken.png"
    path.write_bytes(b"not a png")
    with pytest.raises(ImageDecodeError, match="broken.png"):
        load_image(path)


def test_save_then_load_is_within_quantization(tmp_path):
    image = torch.rand(1, 1, 32, 32, generator=torch.Generator().manual_seed(0))
    path = save_image(image, tmp_path / "out" / "img.png")
    assert image_size(path) == (32, 32)
    assert (load_image(path) - image).abs().max().item() <= 0.5 / 255 + 1e-6


def test_save_image_rejects_batches(tmp_path):
    with pytest.raises(ShapeError):
        save_image(torch.zeros(2, 1, 32, 32), tmp_path / "x.png")


@pytest.mark.parametrize("size", [(63, 64), (28, 28)])
def test_check_size_rejects(size):
    with pytest.raises(ValidationError):
        check_size(size)


def test_check_image_batch():
    assert check_image_batch(torch.zeros(2, 1, 32, 32)).shape == (2, 1, 32, 32)
    with pytest.raises(ValidationError):
        check_image_batch(torch.full((1, 1, 4, 4), 1.5))
    with pytest.raises(ShapeError):
        check_image_batch(torch.zeros(1, 2, 4, 4))
