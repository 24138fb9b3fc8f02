"""
Edge detectors behind one interface.

``GradientEdgeDetector`` is the in-tree fallback: central differences on the
luma channel, magnitude rounded and clamped to [0, 255]. ``HedServiceDetector``
forwards the image to a neural HED service over HTTP.
"""
import logging

import numpy as np
from django.conf import settings

from diffss.http import ServiceClient, b64_png, png_from_b64
from diffss.imaging import ColorImage, GrayImage, color_image, gray_image, resize

logger = logging.getLogger(__name__)

HED_RESPONSE_SCHEMA = {
    'type': 'object',
    'required': ['edge'],
    'properties': {'edge': {'type': 'string', 'minLength': 1}},
}


def gray_from_color(image: ColorImage) -> np.ndarray:
    """ITU-R 601 luma as float64; integer weights keep white at exactly 255."""
    rgb = image.astype(np.int64)
    return (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]) / 1000.0


def central_gradient(field: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) by central differences over a 3x3 neighbourhood, edges replicated."""
    padded = np.pad(field, 1, mode='edge')
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    return gx, gy


class EdgeDetector:
    detector_id = 'base'

    def __init__(self, resolution: int | None = None):
        # working resolution as the long side in pixels; None keeps native size
        self.resolution = resolution

    def detect(self, image: ColorImage) -> GrayImage:
        image = color_image(image)
        height, width = image.shape[:2]
        work = image
        if self.resolution and max(height, width) != self.resolution:
            scale = self.resolution / max(height, width)
            work = resize(image, (max(1, round(width * scale)), max(1, round(height * scale))))
        edge = gray_image(self._detect(work))
        if edge.shape != (height, width):
            edge = resize(edge, (width, height))
        return edge

    def _detect(self, image: ColorImage) -> GrayImage:
        raise NotImplementedError

    @property
    def provenance_id(self) -> str:
        return f'{self.detector_id}@{self.resolution or "native"}'


class GradientEdgeDetector(EdgeDetector):
    detector_id = 'gradient'

    def _detect(self, image: ColorImage) -> GrayImage:
        gx, gy = central_gradient(gray_from_color(image))
        magnitude = np.clip(np.rint(np.hypot(gx, gy)), 0, 255)
        return magnitude.astype(np.uint8)


class HedServiceDetector(EdgeDetector):
    detector_id = 'hed'

    def __init__(self, url: str | None = None, resolution: int | None = None, timeout: float | None = None):
        super().__init__(resolution)
        conf = settings.DIFFSS
        self.client = ServiceClient(
            url or conf['HED_URL'],
            timeout=timeout or conf['REQUEST_TIMEOUT'],
            attempts=conf['RETRY_ATTEMPTS'],
            response_schema=HED_RESPONSE_SCHEMA,
        )

    def _detect(self, image: ColorImage) -> GrayImage:
        document = self.client.post({'image': b64_png(image)})
        edge = png_from_b64(document['edge'], mode='L')
        if edge.shape != image.shape[:2]:
            logger.info('hed service returned %s for %s, resizing', edge.shape, image.shape[:2])
            edge = resize(edge, (image.shape[1], image.shape[0]))
        return edge


DETECTORS = {
    GradientEdgeDetector.detector_id: GradientEdgeDetector,
    HedServiceDetector.detector_id: HedServiceDetector,
}


def make_detector(name: str, resolution: int | None = None, url: str | None = None) -> EdgeDetector:
    if name == HedServiceDetector.detector_id:
        return HedServiceDetector(url=url, resolution=resolution)
    return DETECTORS[name](resolution=resolution)


def detect_edges(image: ColorImage, detector: EdgeDetector) -> GrayImage:
    edge = detector.detect(image)
    logger.debug('edges detector=%s shape=%s', detector.provenance_id, edge.shape)
    return edge
