import logging

from diffss.exceptions import ConfigError, CountLimitExceeded, DimensionMismatch, MalformedResponse
from episodes.samples import SupportSample

from .backends import BaseGenerator, HttpDiffusionGenerator
from .images import GeneratedImage, GenerationRequest, Provenance
from .mock import MockGenerator

logger = logging.getLogger(__name__)

# sampler settings a diffusion service is commonly driven with; anything
# else is forwarded too, but flagged in the log
KNOWN_PARAMS = frozenset({'guidance_scale', 'steps', 'negative_prompt', 'sampler', 'strength'})


class GeneratorRegistry:
    def __init__(self):
        self._factories = {}

    def register(self, name: str, factory) -> None:
        self._factories[name] = factory

    def names(self) -> list[str]:
        return sorted(self._factories)

    def create(self, name: str, **options) -> BaseGenerator:
        try:
            factory = self._factories[name]
        except KeyError:
            raise ConfigError(f'unknown generator backend {name!r}; choose from {self.names()}')
        return factory(**options)


REGISTRY = GeneratorRegistry()
REGISTRY.register('mock', MockGenerator)
REGISTRY.register('http', HttpDiffusionGenerator)


def make_generator(name: str, **options) -> BaseGenerator:
    return REGISTRY.create(name, **options)


def generate(
    request: GenerationRequest,
    backend: BaseGenerator,
    support: SupportSample | None = None,
) -> list[GeneratedImage]:
    """
    Run one request through ``backend`` and attach provenance. The result
    holds exactly ``request.count`` images with indices 1..count.
    """
    if request.count == 0:
        return []
    if request.count > backend.max_count:
        raise CountLimitExceeded(
            f'{request.count} images requested, backend {backend.backend_id} allows {backend.max_count}'
        )
    unknown = sorted(set(request.params) - KNOWN_PARAMS)
    logger.info(
        'generate backend=%s source=%s kind=%s count=%d seed=%d params=%s',
        backend.describe(), request.condition.source_id, request.condition.kind.value,
        request.count, request.seed, request.params,
    )
    if unknown:
        logger.warning('forwarding uninterpreted sampler settings %s to %s', unknown, backend.backend_id)

    arrays = backend.render(request, support)
    if len(arrays) != request.count:
        raise MalformedResponse(f'backend {backend.backend_id} returned {len(arrays)} of {request.count} images')

    images = []
    for index, array in enumerate(arrays, start=1):
        provenance = Provenance(
            backend=backend.backend_id,
            seed=request.seed,
            kind=request.condition.kind,
            source_id=request.condition.source_id,
            index=index,
            prompt=request.prompt,
            params=dict(request.params),
        )
        image = GeneratedImage(array, provenance)
        try:
            image.check_size(request.condition)
        except DimensionMismatch:
            logger.error('backend %s broke the size contract for %s', backend.backend_id, image.image_id)
            raise
        images.append(image)
    return images
