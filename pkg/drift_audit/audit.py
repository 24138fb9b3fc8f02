"""
Generation drift: how far a generated object strays from the support mask
it inherits. Each generated image is segmented, guided by its source
support, and scored by IoU against that support's mask. The same segmenter
run on the original supports gives the baseline row.
"""
import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from django.conf import settings
from scipy import ndimage

from diffss.exceptions import ConfigError, ProvenanceMismatch, ReportMismatch
from diffss.imaging import BinaryMask
from episodes.samples import SupportSample
from metrics.scores import iou

logger = logging.getLogger(__name__)

ORIGINAL = 'original'

# Published drift mIoU (%) of a large pretrained segmenter; context only.
PUBLISHED_DRIFT = {'segmap': 51.34, 'hed': 56.39, 'scribble': 51.56, ORIGINAL: 71.41}


@dataclass(frozen=True)
class DriftRecord:
    image_id: str
    kind: str
    source_id: str
    iou: float | None
    segmenter: str
    fold: int | None = None
    area_fraction: float = 0.0
    components: int = 0
    quality: str = ''
    error: str = ''

    def __post_init__(self):
        if self.iou is not None and not 0.0 <= self.iou <= 1.0:
            raise ReportMismatch(f'{self.image_id}: IoU {self.iou} outside [0, 1]')

    def to_dict(self) -> dict:
        return {
            'image_id': self.image_id,
            'kind': self.kind,
            'source_id': self.source_id,
            'iou': self.iou,
            'segmenter': self.segmenter,
            'fold': self.fold,
            'area_fraction': self.area_fraction,
            'components': self.components,
            'quality': self.quality,
            'error': self.error,
        }


def support_quality(mask: BinaryMask, small_area: float | None = None) -> tuple[float, int, str]:
    """(foreground fraction, connected components, 'low' or 'high')."""
    small_area = settings.DIFFSS['DRIFT_SMALL_AREA'] if small_area is None else small_area
    fraction = float(mask.sum()) / mask.size
    _, components = ndimage.label(mask)
    bucket = 'low' if fraction < small_area or components > 1 else 'high'
    return fraction, int(components), bucket


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    if not values:
        return None
    return math.fsum(values) / len(values)


def _grouped(records, key) -> dict:
    groups = defaultdict(list)
    for record in records:
        groups[key(record)].append(record.iou)
    return {k: _mean(v) for k, v in sorted(groups.items(), key=lambda kv: str(kv[0]))}


@dataclass
class DriftReport:
    records: list[DriftRecord]
    baseline: list[DriftRecord] = field(default_factory=list)
    by_guidance: dict = field(default_factory=dict)
    baseline_mean: float | None = None
    by_fold: dict = field(default_factory=dict)
    by_quality: dict = field(default_factory=dict)
    failures: int = 0

    @classmethod
    def from_records(cls, records: list[DriftRecord], baseline: list[DriftRecord]) -> 'DriftReport':
        records = sorted(records, key=lambda r: r.image_id)
        baseline = sorted(baseline, key=lambda r: r.image_id)
        by_fold = {}
        for fold, value in _grouped([r for r in records if r.fold is not None], lambda r: (r.fold, r.kind)).items():
            by_fold.setdefault(str(fold[0]), {})[fold[1]] = value
        by_quality = {}
        for (quality, kind), value in _grouped(records, lambda r: (r.quality, r.kind)).items():
            by_quality.setdefault(quality, {})[kind] = value
        return cls(
            records=records,
            baseline=baseline,
            by_guidance=_grouped(records, lambda r: r.kind),
            baseline_mean=_mean(r.iou for r in baseline),
            by_fold=by_fold,
            by_quality=by_quality,
            failures=sum(1 for r in records + baseline if r.iou is None),
        )

    def iou_of(self, image_id: str) -> float | None:
        for record in self.records:
            if record.image_id == image_id:
                return record.iou
        raise ReportMismatch(f'{image_id} is not covered by the drift report')

    def to_dict(self) -> dict:
        return {
            'by_guidance': self.by_guidance,
            'baseline_mean': self.baseline_mean,
            'by_fold': self.by_fold,
            'by_quality': self.by_quality,
            'failures': self.failures,
            'published_reference': PUBLISHED_DRIFT,
            'records': [r.to_dict() for r in self.records],
            'baseline': [r.to_dict() for r in self.baseline],
        }

    def render(self) -> str:
        def cell(value):
            return '-' if value is None else f'{value * 100:.2f}'

        rows = [('Guidance', 'mIoU', 'Published')]
        for kind, value in self.by_guidance.items():
            rows.append((kind, cell(value), f'{PUBLISHED_DRIFT[kind]:.2f}' if kind in PUBLISHED_DRIFT else '-'))
        rows.append((ORIGINAL, cell(self.baseline_mean), f'{PUBLISHED_DRIFT[ORIGINAL]:.2f}'))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        return ''.join(
            f'{r[0].ljust(widths[0])}  {r[1].rjust(widths[1])}  {r[2].rjust(widths[2])}\n' for r in rows
        )


def _score(image_id, kind, image, source: SupportSample, segmenter, fold, quality) -> DriftRecord:
    fraction, components, bucket = quality
    record = DriftRecord(
        image_id=image_id, kind=kind, source_id=source.id, iou=None, segmenter=segmenter.segmenter_id,
        fold=fold, area_fraction=fraction, components=components, quality=bucket,
    )
    try:
        predicted = segmenter.segment_image(image, source)
        return replace(record, iou=iou(np.asarray(predicted), source.mask))
    except Exception as exc:
        logger.warning('segmenter %s failed on %s: %s', segmenter.segmenter_id, image_id, exc)
        return replace(record, error=str(exc))


def audit(
    generated,
    sources: Mapping[str, SupportSample],
    segmenter,
    folds: Mapping[str, int] | None = None,
    workers: int = 1,
) -> DriftReport:
    """
    Score every generated image against its source support. Unknown sources
    are fatal; segmenter failures are recorded with no IoU.
    """
    folds = folds or {}
    for image in generated:
        if image.source_id not in sources:
            raise ProvenanceMismatch(f'{image.image_id}: source {image.source_id} not found')
    used = sorted({image.source_id for image in generated})
    quality = {sid: support_quality(sources[sid].mask) for sid in used}

    jobs = [
        (image.image_id, image.provenance.kind.value, image.image, sources[image.source_id],
         folds.get(image.source_id), quality[image.source_id])
        for image in generated
    ]
    jobs += [
        (sid, ORIGINAL, sources[sid].image, sources[sid], folds.get(sid), quality[sid])
        for sid in used
    ]

    def run(job):
        image_id, kind, image, source, fold, q = job
        return _score(image_id, kind, image, source, segmenter, fold, q)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(run, jobs))
    else:
        scored = [run(job) for job in jobs]

    records = [r for r in scored if r.kind != ORIGINAL]
    baseline = [r for r in scored if r.kind == ORIGINAL]
    report = DriftReport.from_records(records, baseline)
    logger.info('drift audit images=%d sources=%d failures=%d', len(records), len(baseline), report.failures)
    return report


def filter_drifted(generated, report: DriftReport, floor: float = 0.0) -> list:
    """Keep images whose drift IoU is at least ``floor``; floor 0 keeps everything."""
    if not 0.0 <= floor <= 1.0:
        raise ConfigError(f'floor must lie in [0, 1], got {floor}')
    covered = {r.image_id: r.iou for r in report.records}
    missing = [image.image_id for image in generated if image.image_id not in covered]
    if missing:
        raise ReportMismatch(f'{len(missing)} images are not covered by the drift report, e.g. {missing[0]}')
    if floor == 0.0:
        return list(generated)
    return [image for image in generated if covered[image.image_id] is not None and covered[image.image_id] >= floor]
