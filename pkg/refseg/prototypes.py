import logging
from dataclasses import dataclass

import numpy as np
from django.db import models

from diffss.exceptions import DimensionMismatch, EmptyMask, ZeroVector
from diffss.imaging import BinaryMask, binary_mask, frozen

from .features import FeatureMap

logger = logging.getLogger(__name__)


class NormKind(models.TextChoices):
    RAW = 'raw', 'Raw'
    L2 = 'l2', 'L2-normalized'


@dataclass(frozen=True, eq=False)
class Prototype:
    vector: np.ndarray
    norm_kind: NormKind = NormKind.RAW

    def __post_init__(self):
        vector = np.array(self.vector, dtype=np.float64)
        if vector.ndim != 1 or vector.size == 0:
            raise DimensionMismatch(f'prototype must be a non-empty vector, got shape {vector.shape}')
        object.__setattr__(self, 'vector', frozen(vector))
        object.__setattr__(self, 'norm_kind', NormKind(self.norm_kind))

    def __len__(self) -> int:
        return self.vector.size

    def scaled(self, factor: float) -> 'Prototype':
        return Prototype(self.vector * factor, NormKind.RAW)


@dataclass(frozen=True, eq=False)
class PredictedMask:
    mask: BinaryMask
    score: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, 'mask', frozen(binary_mask(self.mask).copy()))
        if self.score is not None:
            object.__setattr__(self, 'score', frozen(np.array(self.score, dtype=np.float64)))


def masked_average_pool(features: FeatureMap, mask: BinaryMask) -> Prototype:
    mask = binary_mask(mask)
    if features.shape != mask.shape:
        raise DimensionMismatch(f'features {features.shape} vs mask {mask.shape}')
    selected = features.values[mask.astype(bool)]
    if selected.shape[0] == 0:
        raise EmptyMask('cannot pool over an empty mask')
    return Prototype(selected.mean(axis=0), NormKind.RAW)


def l2_normalize(prototype: Prototype) -> Prototype:
    norm = np.linalg.norm(prototype.vector)
    if norm == 0:
        raise ZeroVector('cannot normalize a zero prototype')
    return Prototype(prototype.vector / norm, NormKind.L2)


def fuse_prototypes(prototypes: list[Prototype]) -> Prototype:
    """
    Arithmetic mean of prototypes, computed in a canonical (lexicographic)
    order as ``first + mean(p - first)``. The result is independent of input
    order and equals the input exactly when all inputs are equal.
    """
    if not prototypes:
        raise EmptyMask('no prototypes to fuse')
    if len({p.vector.size for p in prototypes}) != 1:
        raise DimensionMismatch('prototypes differ in length')
    stack = np.stack([p.vector for p in prototypes])
    ordered = stack[np.lexsort(stack.T[::-1])]
    reference = ordered[0]
    return Prototype(reference + (ordered - reference).mean(axis=0), NormKind.RAW)


def cosine_map(features: FeatureMap, prototype: Prototype) -> np.ndarray:
    """Per-pixel cosine similarity; zero-norm pixels score 0."""
    norm_p = np.linalg.norm(prototype.vector)
    if norm_p == 0:
        raise ZeroVector('prototype has zero norm')
    values = features.values
    dots = values @ prototype.vector
    norms = np.linalg.norm(values, axis=2) * norm_p
    out = np.zeros(features.shape, dtype=np.float64)
    np.divide(dots, norms, out=out, where=norms > 0)
    return out


def predict(features: FeatureMap, fg: Prototype, bg: Prototype) -> PredictedMask:
    """Foreground where cos(f, fg) > cos(f, bg); ties go to background."""
    if len(fg) != features.channels or len(bg) != features.channels:
        raise DimensionMismatch(
            f'prototype lengths {len(fg)}/{len(bg)} vs {features.channels} feature channels'
        )
    cos_fg = cosine_map(features, fg)
    cos_bg = cosine_map(features, bg)
    mask = (cos_fg > cos_bg).astype(np.uint8)
    score = np.clip((cos_fg - cos_bg + 2.0) / 4.0, 0.0, 1.0)
    return PredictedMask(mask, score)
