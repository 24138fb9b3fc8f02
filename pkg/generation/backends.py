"""
Generator backends. A backend turns one ``GenerationRequest`` into ``count``
images in index order; ``generation.service.generate`` wraps the result with
provenance.
"""
import logging

from django.conf import settings

from diffss.exceptions import MalformedResponse
from diffss.http import ServiceClient, b64_png, png_from_b64
from diffss.imaging import ColorImage, resize
from episodes.samples import SupportSample

from .images import GenerationRequest

logger = logging.getLogger(__name__)


class BaseGenerator:
    backend_id = 'base'
    # images on the mock path need the source support; services do not
    needs_support = False

    def __init__(self, max_count: int | None = None):
        self.max_count = max_count or settings.DIFFSS['GENERATOR_MAX_COUNT']

    def render(self, request: GenerationRequest, support: SupportSample | None = None) -> list[ColorImage]:
        raise NotImplementedError

    def describe(self) -> dict:
        return {'backend': self.backend_id, 'max_count': self.max_count}


RESPONSE_SCHEMA = {
    'type': 'object',
    'required': ['images'],
    'properties': {
        'images': {'type': 'array', 'items': {'type': 'string', 'minLength': 1}},
    },
}


class HttpDiffusionGenerator(BaseGenerator):
    """
    Client for a conditional diffusion service.

    Request document: ``condition`` (base64 PNG), ``kind``, ``prompt``,
    ``count``, ``seed``, ``params``. Response: ``images``, a list of base64
    PNGs in index order.
    """
    backend_id = 'http'

    def __init__(self, url: str | None = None, timeout: float | None = None, max_count: int | None = None):
        super().__init__(max_count)
        conf = settings.DIFFSS
        self.url = url or conf['GENERATOR_URL']
        self.timeout = timeout or conf['REQUEST_TIMEOUT']
        self.client = ServiceClient(self.url, self.timeout, conf['RETRY_ATTEMPTS'], RESPONSE_SCHEMA)

    def render(self, request: GenerationRequest, support: SupportSample | None = None) -> list[ColorImage]:
        condition = request.condition
        document = self.client.post({
            'condition': b64_png(condition.condition_image),
            'kind': condition.kind.value,
            'prompt': request.prompt,
            'count': request.count,
            'seed': request.seed,
            'params': request.params,
        })
        width, height = condition.size
        images = []
        for position, payload in enumerate(document['images'], start=1):
            image = png_from_b64(payload, mode='RGB')
            if image.shape[:2] != (height, width):
                logger.info(
                    'resizing generated image source=%s k=%d from %s to %s',
                    condition.source_id, position, image.shape[:2], (height, width),
                )
                image = resize(image, (width, height))
            images.append(image)
        if len(images) != request.count:
            raise MalformedResponse(f'expected {request.count} images, got {len(images)}')
        return images

    def describe(self) -> dict:
        return {**super().describe(), 'url': self.url, 'timeout': self.timeout}
