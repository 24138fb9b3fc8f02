"""
Array conventions shared by every app.

Color images are ``uint8`` arrays of shape (H, W, 3), gray images ``uint8``
(H, W), binary masks ``uint8`` (H, W) holding {0, 1}. On disk masks are
single-channel PNGs holding {0, 255}.
"""
import io
from pathlib import Path

import numpy as np
import numpy.typing as npt
from PIL import Image

from .exceptions import DimensionMismatch, InvalidImage

ColorImage = npt.NDArray[np.uint8]
GrayImage = npt.NDArray[np.uint8]
BinaryMask = npt.NDArray[np.uint8]


def frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def color_image(values) -> ColorImage:
    array = np.asarray(values)
    if array.ndim != 3 or array.shape[2] != 3 or array.shape[0] == 0 or array.shape[1] == 0:
        raise InvalidImage(f'expected a non-empty HxWx3 image, got shape {array.shape}')
    if array.dtype != np.uint8:
        if array.min() < 0 or array.max() > 255:
            raise InvalidImage('color values must lie in [0, 255]')
        array = array.astype(np.uint8)
    return array


def gray_image(values) -> GrayImage:
    array = np.asarray(values)
    if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] == 0:
        raise InvalidImage(f'expected a non-empty HxW image, got shape {array.shape}')
    if array.dtype != np.uint8:
        if array.min() < 0 or array.max() > 255:
            raise InvalidImage('intensity values must lie in [0, 255]')
        array = array.astype(np.uint8)
    return array


def binary_mask(values) -> BinaryMask:
    array = np.asarray(values)
    if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] == 0:
        raise InvalidImage(f'expected a non-empty HxW mask, got shape {array.shape}')
    if not np.isin(array, (0, 1)).all():
        raise InvalidImage('mask values must be 0 or 1')
    return array.astype(np.uint8)


def check_same_size(a: np.ndarray, b: np.ndarray, what: str = 'image and mask') -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(f'{what} differ: {a.shape[:2]} vs {b.shape[:2]}')


def encode_png(array: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(array)).save(buffer, format='PNG')
    return buffer.getvalue()


def decode_png(data: bytes, mode: str = 'RGB') -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img.convert(mode), dtype=np.uint8).copy()


def read_color(path: Path) -> ColorImage:
    return color_image(decode_png(Path(path).read_bytes(), 'RGB'))


def read_gray(path: Path) -> GrayImage:
    return gray_image(decode_png(Path(path).read_bytes(), 'L'))


def read_mask(path: Path) -> BinaryMask:
    # anything non-zero on disk is foreground
    return (read_gray(path) > 0).astype(np.uint8)


def mask_to_png(mask: BinaryMask) -> bytes:
    return encode_png((mask * 255).astype(np.uint8))


def resize(array: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Bilinear resize to (width, height)."""
    img = Image.fromarray(np.ascontiguousarray(array)).resize(size, Image.Resampling.BILINEAR)
    return np.asarray(img, dtype=np.uint8).copy()
