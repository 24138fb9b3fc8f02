"""
Control conditions derived from a support image and its mask.

    hed      = filter_background(detect_edges(image), mask)
    scribble = make_scribble(hed)
    segmap   = make_segmap(mask, class_index, palette)
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.conf import settings

from diffss.exceptions import InvalidImage, PaletteRangeError, TemplateError
from diffss.imaging import BinaryMask, GrayImage, binary_mask, check_same_size, frozen, gray_image
from episodes.samples import SupportSample

from .edges import EdgeDetector, GradientEdgeDetector, detect_edges
from .models import GuidanceKind

logger = logging.getLogger(__name__)

PLACEHOLDER = '{class_name}'
# default segmap palette; large enough for FSS-1000 class indices
SEGMAP_PALETTE_SIZE = 1024


@dataclass(frozen=True)
class ScribbleConfig:
    threshold: int = 128

    def __post_init__(self):
        if not 0 <= self.threshold <= 255:
            raise InvalidImage(f'scribble threshold {self.threshold} outside [0, 255]')


@dataclass(frozen=True)
class Palette:
    colors: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if not self.colors or self.colors[0] != (0, 0, 0):
            raise PaletteRangeError('palette index 0 must be black background')

    def __len__(self) -> int:
        return len(self.colors)

    def __getitem__(self, index: int) -> tuple[int, int, int]:
        if not 0 <= index < len(self.colors):
            raise PaletteRangeError(f'class index {index} outside palette of {len(self.colors)} colors')
        return self.colors[index]


@lru_cache(maxsize=None)
def voc_palette(size: int = 256) -> Palette:
    """PASCAL VOC color map: bits of the index are interleaved into R, G, B from the top bit down."""
    colors = []
    for index in range(size):
        r = g = b = 0
        c = index
        for shift in range(7, -1, -1):
            r |= (c & 1) << shift
            g |= ((c >> 1) & 1) << shift
            b |= ((c >> 2) & 1) << shift
            c >>= 3
        colors.append((r, g, b))
    return Palette(tuple(colors))


@dataclass(frozen=True, eq=False)
class ControlCondition:
    kind: GuidanceKind
    condition_image: np.ndarray
    prompt: str
    source_id: str

    def __post_init__(self):
        if not self.prompt:
            raise TemplateError('condition prompt must not be empty')
        object.__setattr__(self, 'kind', GuidanceKind(self.kind))
        object.__setattr__(self, 'condition_image', frozen(np.array(self.condition_image, dtype=np.uint8)))

    @property
    def size(self) -> tuple[int, int]:
        return self.condition_image.shape[1], self.condition_image.shape[0]


def filter_background(edge: GrayImage, mask: BinaryMask) -> GrayImage:
    edge = gray_image(edge)
    mask = binary_mask(mask)
    check_same_size(edge, mask, 'edge map and mask')
    return np.where(mask == 1, edge, 0).astype(np.uint8)


def make_scribble(boundary: GrayImage, cfg: ScribbleConfig = ScribbleConfig()) -> GrayImage:
    boundary = gray_image(boundary)
    return np.where(boundary >= cfg.threshold, 255, 0).astype(np.uint8)


def make_segmap(mask: BinaryMask, class_index: int, palette: Palette | None = None) -> np.ndarray:
    palette = palette or voc_palette(SEGMAP_PALETTE_SIZE)
    mask = binary_mask(mask)
    if class_index < 1:
        raise PaletteRangeError(f'class index {class_index} must be positive')
    foreground = np.array(palette[class_index], dtype=np.uint8)
    background = np.array(palette[0], dtype=np.uint8)
    return np.where(mask[..., None] == 1, foreground, background).astype(np.uint8)


def make_prompt(class_name: str, template: str | None = None) -> str:
    template = template or settings.DIFFSS['PROMPT_TEMPLATE']
    if template.count(PLACEHOLDER) != 1:
        raise TemplateError(f'template must contain {PLACEHOLDER} exactly once: {template!r}')
    if not class_name or not class_name.strip():
        raise TemplateError('class name must not be empty')
    # multi-word names go in verbatim
    return template.replace(PLACEHOLDER, class_name)


def build_condition(
    support: SupportSample,
    kind: GuidanceKind | str,
    detector: EdgeDetector | None = None,
    cfg: ScribbleConfig = ScribbleConfig(),
    palette: Palette | None = None,
    template: str | None = None,
) -> ControlCondition:
    kind = GuidanceKind(kind)
    check_same_size(support.image, support.mask)
    if kind == GuidanceKind.SEGMAP:
        image = make_segmap(support.mask, support.class_index, palette)
    else:
        boundary = filter_background(detect_edges(support.image, detector or GradientEdgeDetector()), support.mask)
        image = boundary if kind == GuidanceKind.HED else make_scribble(boundary, cfg)
    return ControlCondition(
        kind=kind,
        condition_image=image,
        prompt=make_prompt(support.class_name, template),
        source_id=support.id,
    )
