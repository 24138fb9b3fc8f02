"""
Per-pixel feature maps for prototype matching.

The handcrafted extractor stacks six channels: R, G, B, luma gradient
magnitude, and the mean and variance of luma over a 3x3 window (edges
replicated). Intensities are scaled to [0, 1]; variance by 255**2.
"""
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from conditions.edges import central_gradient, gray_from_color
from diffss.exceptions import InvalidImage
from diffss.imaging import ColorImage, color_image, frozen

CHANNELS = ('red', 'green', 'blue', 'gradient', 'local_mean', 'local_variance')


@dataclass(frozen=True, eq=False)
class FeatureMap:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 3 or 0 in values.shape:
            raise InvalidImage(f'feature map must be HxWxC, got shape {values.shape}')
        if not np.isfinite(values).all():
            raise InvalidImage('feature map holds non-finite values')
        object.__setattr__(self, 'values', frozen(values))

    @property
    def channels(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]


def window_stats(field: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    windows = sliding_window_view(np.pad(field, 1, mode='edge'), (3, 3))
    mean = windows.mean(axis=(-2, -1))
    variance = windows.var(axis=(-2, -1))
    # flat windows must read exactly zero
    variance[np.ptp(windows, axis=(-2, -1)) == 0] = 0.0
    return mean, variance


class HandcraftedExtractor:
    extractor_id = 'handcrafted'
    channels = len(CHANNELS)

    def __call__(self, image: ColorImage) -> FeatureMap:
        image = color_image(image)
        rgb = image.astype(np.float64) / 255.0
        luma = gray_from_color(image)
        gx, gy = central_gradient(luma)
        mean, variance = window_stats(luma)
        stacked = np.concatenate([
            rgb,
            (np.hypot(gx, gy) / 255.0)[..., None],
            (mean / 255.0)[..., None],
            (variance / 255.0 ** 2)[..., None],
        ], axis=2)
        return FeatureMap(stacked)


DEFAULT_EXTRACTOR = HandcraftedExtractor()


def extract_features(image: ColorImage, extractor=None) -> FeatureMap:
    return (extractor or DEFAULT_EXTRACTOR)(image)
