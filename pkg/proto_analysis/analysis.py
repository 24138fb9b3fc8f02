"""
Prototype distribution of raw supports versus generated auxiliaries.

Every sample is pooled to an L2-normalized foreground prototype with the
same extractor the reference segmenter uses, so the picture is relative to
that feature space. Embeddings are 2D: PCA by default, t-SNE on request.
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from django.db import models
from sklearn.manifold import TSNE

from diffss.exceptions import DegenerateInput, DimensionMismatch, EmptyMask, ProvenanceMismatch
from diffss.imaging import BinaryMask, ColorImage
from refseg.features import extract_features
from refseg.prototypes import NormKind, Prototype, l2_normalize, masked_average_pool

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-6


class Origin(models.TextChoices):
    RAW = 'raw', 'Raw support'
    GENERATED = 'generated', 'Generated auxiliary'


class Reducer(models.TextChoices):
    PCA = 'pca', 'PCA'
    TSNE = 'tsne', 't-SNE'


@dataclass(frozen=True, eq=False)
class ProtoSample:
    image: ColorImage
    mask: BinaryMask
    class_index: int
    origin: Origin
    id: str = ''


@dataclass(frozen=True)
class PrototypeEntry:
    class_index: int
    origin: Origin
    prototype: Prototype
    sample_id: str = ''


@dataclass(frozen=True)
class PrototypeSet:
    entries: tuple[PrototypeEntry, ...]
    skipped: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(self.entries))
        if len({len(e.prototype) for e in self.entries}) > 1:
            raise DimensionMismatch('prototypes differ in length')
        for entry in self.entries:
            if entry.prototype.norm_kind != NormKind.L2:
                raise DegenerateInput(f'{entry.sample_id}: prototype is not L2-normalized')
            if abs(np.linalg.norm(entry.prototype.vector) - 1.0) > UNIT_TOLERANCE:
                raise DegenerateInput(f'{entry.sample_id}: prototype norm is not 1')

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([e.prototype.vector for e in self.entries])

    @property
    def classes(self) -> list[int]:
        return sorted({e.class_index for e in self.entries})


def samples_for(supports, generated) -> list[ProtoSample]:
    """Raw samples for each support plus one generated sample per auxiliary, masked by its source."""
    by_id = {s.id: s for s in supports}
    samples = [ProtoSample(s.image, s.mask, s.class_index, Origin.RAW, s.id) for s in supports]
    for image in generated:
        source = by_id.get(image.source_id)
        if source is None:
            raise ProvenanceMismatch(f'{image.image_id}: source {image.source_id} not among the supports')
        samples.append(ProtoSample(image.image, source.mask, source.class_index, Origin.GENERATED, image.image_id))
    return samples


def prototype_set(samples, extractor=None) -> PrototypeSet:
    entries, skipped = [], 0
    for sample in samples:
        try:
            pooled = masked_average_pool(extract_features(sample.image, extractor), sample.mask)
        except EmptyMask:
            logger.warning('skipping %s: empty mask', sample.id or 'unnamed sample')
            skipped += 1
            continue
        entries.append(PrototypeEntry(sample.class_index, Origin(sample.origin), l2_normalize(pooled), sample.id))
    if skipped:
        logger.info('prototype set built with %d entries, %d skipped', len(entries), skipped)
    return PrototypeSet(tuple(entries), skipped)


@dataclass(frozen=True, eq=False)
class EmbeddingExport:
    points: np.ndarray
    classes: tuple[int, ...]
    origins: tuple[str, ...]
    reducer: str
    seed: int = 0
    ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] != len(self.classes):
            raise DimensionMismatch(f'expected one 2D point per prototype, got {points.shape}')
        if not np.isfinite(points).all():
            raise DegenerateInput('embedding has non-finite coordinates')
        object.__setattr__(self, 'points', points)


def principal_components(matrix: np.ndarray, n: int = 2) -> np.ndarray:
    """
    Top ``n`` principal axes as columns. Each axis is signed so that its
    largest-magnitude coordinate is positive.
    """
    centered = matrix - matrix.mean(axis=0)
    if not np.any(centered):
        raise DegenerateInput('all prototypes are identical; covariance is degenerate')
    covariance = centered.T @ centered / max(len(matrix) - 1, 1)
    _, vectors = np.linalg.eigh(covariance)
    axes = vectors[:, ::-1][:, :n]
    for j in range(axes.shape[1]):
        if axes[np.argmax(np.abs(axes[:, j])), j] < 0:
            axes[:, j] = -axes[:, j]
    return axes


def pca_2d(matrix: np.ndarray) -> np.ndarray:
    axes = principal_components(matrix, 2)
    points = (matrix - matrix.mean(axis=0)) @ axes
    if points.shape[1] < 2:
        points = np.hstack([points, np.zeros((len(points), 2 - points.shape[1]))])
    return points


def tsne_2d(matrix: np.ndarray, seed: int) -> np.ndarray:
    conf = settings.DIFFSS
    perplexity = min(conf['TSNE_PERPLEXITY'], len(matrix) - 1)
    logger.info('t-SNE n=%d perplexity=%s max_iter=%d seed=%d', len(matrix), perplexity, conf['TSNE_MAX_ITER'], seed)
    reducer = TSNE(
        n_components=2, perplexity=perplexity, max_iter=conf['TSNE_MAX_ITER'],
        init='random', random_state=seed,
    )
    return reducer.fit_transform(matrix)


def embed2d(ps: PrototypeSet, reducer: str = Reducer.PCA, seed: int = 0) -> EmbeddingExport:
    if len(ps) < 2:
        raise DegenerateInput(f'embedding needs at least 2 prototypes, got {len(ps)}')
    reducer = Reducer(reducer)
    matrix = ps.matrix
    if reducer == Reducer.PCA:
        points = pca_2d(matrix)
    else:
        if not np.any(matrix - matrix[0]):
            raise DegenerateInput('all prototypes are identical; nothing to embed')
        points = tsne_2d(matrix, seed)
    return EmbeddingExport(
        points=points,
        classes=tuple(e.class_index for e in ps.entries),
        origins=tuple(e.origin.value for e in ps.entries),
        reducer=reducer.value,
        seed=seed,
        ids=tuple(e.sample_id for e in ps.entries),
    )


def consistency_score(ps: PrototypeSet) -> dict[int, float]:
    """
    Per class, the mean cosine between generated prototypes and the
    renormalized centroid of the raw ones.
    """
    grouped = defaultdict(lambda: {Origin.RAW: [], Origin.GENERATED: []})
    for entry in ps.entries:
        grouped[entry.class_index][entry.origin].append(entry.prototype.vector)
    scores = {}
    for class_index in sorted(grouped):
        raw, generated = grouped[class_index][Origin.RAW], grouped[class_index][Origin.GENERATED]
        if not raw or not generated:
            missing = Origin.RAW if not raw else Origin.GENERATED
            raise DegenerateInput(f'class {class_index} has no {missing.value} prototypes')
        centroid = l2_normalize(Prototype(np.mean(raw, axis=0))).vector
        scores[class_index] = math.fsum(float(v @ centroid) for v in generated) / len(generated)
    return scores
