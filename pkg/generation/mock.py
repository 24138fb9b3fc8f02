"""
Deterministic stand-in for a diffusion service.

The object stays where it is, so the source support mask remains valid for
every image. Foreground pixels get a seeded per-channel gain and bias plus
smooth texture noise; the background is replaced by a seeded two-color
gradient.
"""
import logging
import zlib

import numpy as np
from django.conf import settings
from scipy.ndimage import gaussian_filter

from conditions.controls import ControlCondition
from conditions.models import GuidanceKind
from diffss.exceptions import ConfigError, InvalidImage
from diffss.imaging import BinaryMask, ColorImage, binary_mask, check_same_size, color_image
from episodes.samples import SupportSample

from .backends import BaseGenerator
from .images import GenerationRequest

logger = logging.getLogger(__name__)

KIND_CODES = {kind: code for code, kind in enumerate(GuidanceKind)}


def mock_rng(seed: int, k: int, source_id: str, kind: GuidanceKind) -> np.random.Generator:
    return np.random.default_rng([seed, k, zlib.crc32(source_id.encode('utf-8')), KIND_CODES[GuidanceKind(kind)]])


def _background(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    c0, c1 = rng.uniform(0.0, 255.0, size=(2, 3))
    angle = rng.uniform(0.0, 2 * np.pi)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    projection = xs * np.cos(angle) + ys * np.sin(angle)
    span = projection.max() - projection.min()
    t = (projection - projection.min()) / span if span > 0 else np.zeros_like(projection)
    return c0 + t[..., None] * (c1 - c0)


def mock_generate(
    condition: ControlCondition,
    support_image: ColorImage | None,
    mask: BinaryMask,
    seed: int,
    k: int,
    jitter_gain: float | None = None,
    jitter_bias: float | None = None,
    noise_amplitude: float | None = None,
    noise_sigma: float | None = None,
) -> ColorImage:
    """
    Render the k-th auxiliary image for ``condition``. Equal arguments give
    equal bytes.
    """
    conf = settings.DIFFSS
    jitter_gain = conf['MOCK_JITTER_GAIN'] if jitter_gain is None else jitter_gain
    jitter_bias = conf['MOCK_JITTER_BIAS'] if jitter_bias is None else jitter_bias
    noise_amplitude = conf['MOCK_NOISE_AMPLITUDE'] if noise_amplitude is None else noise_amplitude
    noise_sigma = conf['MOCK_NOISE_SIGMA'] if noise_sigma is None else noise_sigma
    if min(jitter_gain, jitter_bias, noise_amplitude, noise_sigma) < 0:
        raise ConfigError('mock amplitudes must be non-negative')
    if support_image is None:
        raise InvalidImage(f'mock generator needs the source image of {condition.source_id}')

    image = color_image(support_image)
    mask = binary_mask(mask)
    check_same_size(image, mask)
    check_same_size(image, condition.condition_image, 'support image and condition')
    height, width = mask.shape

    # draw order is fixed regardless of amplitudes
    rng = mock_rng(seed, k, condition.source_id, condition.kind)
    gain = 1.0 + rng.uniform(-jitter_gain, jitter_gain, size=3)
    bias = rng.uniform(-jitter_bias, jitter_bias, size=3)
    noise = rng.standard_normal((height, width))
    if noise_sigma > 0:
        noise = gaussian_filter(noise, noise_sigma)
    peak = np.abs(noise).max()
    if peak > 0:
        noise = noise / peak

    foreground = image.astype(np.float64) * gain + bias + noise_amplitude * noise[..., None]
    background = _background(rng, height, width)
    out = np.where(mask[..., None].astype(bool), foreground, background)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


class MockGenerator(BaseGenerator):
    backend_id = 'mock'
    needs_support = True

    def __init__(
        self,
        max_count: int | None = None,
        jitter_gain: float | None = None,
        jitter_bias: float | None = None,
        noise_amplitude: float | None = None,
        noise_sigma: float | None = None,
    ):
        super().__init__(max_count)
        conf = settings.DIFFSS
        self.jitter_gain = conf['MOCK_JITTER_GAIN'] if jitter_gain is None else jitter_gain
        self.jitter_bias = conf['MOCK_JITTER_BIAS'] if jitter_bias is None else jitter_bias
        self.noise_amplitude = conf['MOCK_NOISE_AMPLITUDE'] if noise_amplitude is None else noise_amplitude
        self.noise_sigma = conf['MOCK_NOISE_SIGMA'] if noise_sigma is None else noise_sigma

    @property
    def intensity_shift_bound(self) -> float:
        """Largest possible per-pixel foreground change, rounding included."""
        return 255.0 * self.jitter_gain + self.jitter_bias + self.noise_amplitude + 0.5

    def render(self, request: GenerationRequest, support: SupportSample | None = None) -> list[ColorImage]:
        if support is None:
            raise InvalidImage(f'mock generator needs the source image of {request.condition.source_id}')
        return [
            mock_generate(
                request.condition, support.image, support.mask, request.seed, k,
                self.jitter_gain, self.jitter_bias, self.noise_amplitude, self.noise_sigma,
            )
            for k in range(1, request.count + 1)
        ]

    def describe(self) -> dict:
        return {
            **super().describe(),
            'jitter_gain': self.jitter_gain,
            'jitter_bias': self.jitter_bias,
            'noise_amplitude': self.noise_amplitude,
            'noise_sigma': self.noise_sigma,
        }
