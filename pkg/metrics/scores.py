"""
IoU and mIoU. Per-class intersections and unions are summed over every
episode of the class before dividing; mIoU is the unweighted mean over
classes.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from diffss.exceptions import DegenerateInput
from diffss.imaging import BinaryMask, binary_mask, check_same_size

logger = logging.getLogger(__name__)


def counts(pred: BinaryMask, gt: BinaryMask) -> tuple[int, int]:
    pred, gt = binary_mask(pred).astype(bool), binary_mask(gt).astype(bool)
    check_same_size(pred, gt, 'prediction and ground truth')
    return int(np.logical_and(pred, gt).sum()), int(np.logical_or(pred, gt).sum())


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    intersection, union = counts(pred, gt)
    if union == 0:
        logger.info('both masks empty; counting IoU as 1.0')
        return 1.0
    return intersection / union


@dataclass(frozen=True)
class ClassIoU:
    class_index: int
    intersection: int
    union: int

    def __post_init__(self):
        if not 0 <= self.intersection <= self.union:
            raise DegenerateInput(
                f'class {self.class_index}: intersection {self.intersection} exceeds union {self.union}'
            )

    @property
    def iou(self) -> float:
        if self.union == 0:
            logger.info('class %d never predicted nor present; counting IoU as 1.0', self.class_index)
            return 1.0
        return self.intersection / self.union


def miou(per_class: list[ClassIoU]) -> float:
    if not per_class:
        raise DegenerateInput('mIoU needs at least one class')
    return math.fsum(c.iou for c in per_class) / len(per_class)


class IoUAccumulator:
    """
    Streaming per-class counts. Partial accumulators built in parallel
    combine with ``merge``, in any order.
    """

    def __init__(self, totals: dict[int, tuple[int, int]] | None = None):
        self._totals = dict(totals or {})

    def update(self, class_index: int, pred: BinaryMask, gt: BinaryMask) -> None:
        intersection, union = counts(pred, gt)
        i, u = self._totals.get(class_index, (0, 0))
        self._totals[class_index] = (i + intersection, u + union)

    def merge(self, other: 'IoUAccumulator') -> 'IoUAccumulator':
        merged = dict(self._totals)
        for c, (i, u) in other._totals.items():
            mi, mu = merged.get(c, (0, 0))
            merged[c] = (mi + i, mu + u)
        return IoUAccumulator(merged)

    def __bool__(self) -> bool:
        return bool(self._totals)

    def per_class(self) -> list[ClassIoU]:
        return [ClassIoU(c, i, u) for c, (i, u) in sorted(self._totals.items())]

    def miou(self) -> float:
        return miou(self.per_class())
