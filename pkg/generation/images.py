from dataclasses import dataclass, field

import numpy as np

from conditions.controls import ControlCondition
from conditions.models import GuidanceKind
from diffss.exceptions import ConfigError, DimensionMismatch
from diffss.imaging import ColorImage, color_image, frozen

# seeds are non-negative 64-bit integers: the range a signed bigint column
# stores and numpy's SeedSequence accepts
MAX_SEED = 2 ** 63 - 1


@dataclass(frozen=True)
class Provenance:
    backend: str
    seed: int
    kind: GuidanceKind
    source_id: str
    index: int
    prompt: str = ''
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'kind', GuidanceKind(self.kind))

    @property
    def image_id(self) -> str:
        return image_id_for(self.source_id, self.kind, self.index)


def image_id_for(source_id: str, kind: str, index: int) -> str:
    return f'{source_id}-{GuidanceKind(kind).value}-{index}'


@dataclass(frozen=True, eq=False)
class GenerationRequest:
    condition: ControlCondition
    count: int
    seed: int = 0
    prompt: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.count < 0:
            raise ConfigError(f'count must be non-negative, got {self.count}')
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f'seed {self.seed} outside [0, 2**63 - 1]')
        if self.prompt is None:
            object.__setattr__(self, 'prompt', self.condition.prompt)


@dataclass(frozen=True, eq=False)
class GeneratedImage:
    image: ColorImage
    provenance: Provenance

    def __post_init__(self):
        object.__setattr__(self, 'image', frozen(color_image(self.image).copy()))

    @property
    def image_id(self) -> str:
        return self.provenance.image_id

    @property
    def source_id(self) -> str:
        return self.provenance.source_id

    def check_size(self, condition: ControlCondition) -> None:
        if self.image.shape[:2] != condition.condition_image.shape[:2]:
            raise DimensionMismatch(
                f'{self.image_id}: image {self.image.shape[:2]} vs condition {condition.condition_image.shape[:2]}'
            )

    def same_bytes(self, other: 'GeneratedImage') -> bool:
        return self.provenance == other.provenance and np.array_equal(self.image, other.image)
