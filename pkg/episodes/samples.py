from dataclasses import dataclass

from diffss.exceptions import InvalidEpisode
from diffss.imaging import BinaryMask, ColorImage, binary_mask, check_same_size, color_image, frozen


def _freeze_pair(sample, image, mask):
    image = frozen(color_image(image).copy())
    mask = frozen(binary_mask(mask).copy())
    check_same_size(image, mask)
    object.__setattr__(sample, 'image', image)
    object.__setattr__(sample, 'mask', mask)


@dataclass(frozen=True, eq=False)
class SupportSample:
    """Annotated exemplar of the episode's class."""
    image: ColorImage
    mask: BinaryMask
    class_index: int
    class_name: str
    id: str

    def __post_init__(self):
        _freeze_pair(self, self.image, self.mask)
        if self.class_index < 1:
            raise InvalidEpisode(f'support {self.id}: class index must be positive')

    @property
    def size(self) -> tuple[int, int]:
        return self.image.shape[1], self.image.shape[0]


@dataclass(frozen=True, eq=False)
class QuerySample:
    """Image to segment; its mask is only read when scoring."""
    image: ColorImage
    mask: BinaryMask
    class_index: int
    id: str

    def __post_init__(self):
        _freeze_pair(self, self.image, self.mask)


@dataclass(frozen=True, eq=False)
class Episode:
    supports: tuple[SupportSample, ...]
    query: QuerySample
    k_original: int
    n_aux: int = 0
    fold: int = 0
    class_index: int = 0
    id: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'supports', tuple(self.supports))
        if not self.class_index:
            object.__setattr__(self, 'class_index', self.query.class_index)
        if len(self.supports) != self.k_original + self.n_aux:
            raise InvalidEpisode(
                f'episode {self.id}: {len(self.supports)} supports but k_original={self.k_original} n_aux={self.n_aux}'
            )
        if self.k_original < 1:
            raise InvalidEpisode(f'episode {self.id}: needs at least one original support')
        if any(s.class_index != self.class_index for s in self.supports) or self.query.class_index != self.class_index:
            raise InvalidEpisode(f'episode {self.id}: supports and query must share class {self.class_index}')

    @property
    def k(self) -> int:
        return len(self.supports)

    @property
    def originals(self) -> tuple[SupportSample, ...]:
        return self.supports[:self.k_original]

    @property
    def auxiliaries(self) -> tuple[SupportSample, ...]:
        return self.supports[self.k_original:]
