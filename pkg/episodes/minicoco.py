"""
MiniCOCO-20i: a stratified 10% subsample of the COCO-20i training set.

A stratum is a (class, size bucket) pair; an image belongs to every stratum
it holds an instance of, and every stratum keeps round(ratio * n) images,
at least one. Validation is the intersection of the given validation
manifests, topped up so every class can serve 5-shot episodes.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from diffss.exceptions import ConfigError, ManifestError, StratumError

from .manifest import ManifestRecord
from .splits import FOLDS, Dataset, Phase, SplitSpec, make_split

logger = logging.getLogger(__name__)

# the published subset sizes; recorded, never asserted
REFERENCE_SIZES = {'train': 8200, 'val': 4953}

MIN_CLASS_IMAGES = 6  # 5 supports and a query


@dataclass
class MiniCocoSplit:
    train: list[ManifestRecord]
    val: list[ManifestRecord]
    splits: list[SplitSpec]
    strata: dict[str, dict[str, int]] = field(default_factory=dict)
    topped_up: dict[int, str] = field(default_factory=dict)

    def summary(self, ratio: float, seed: int) -> dict:
        return {
            'ratio': ratio,
            'seed': seed,
            'train_images': len(self.train),
            'val_images': len(self.val),
            'strata': self.strata,
            'topped_up': {str(c): image_id for c, image_id in sorted(self.topped_up.items())},
            'reference_sizes': REFERENCE_SIZES,
        }


def record_strata(record: ManifestRecord) -> frozenset[tuple[int, str]]:
    """Every (class, size bucket) pair the record holds; unsized records count as medium."""
    sizes = record.sizes or ('medium',) * len(record.classes)
    return frozenset(zip(record.classes, sizes))


def round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def stratum_target(n: int, ratio: float, strict: bool = False) -> int:
    target = round_half_up(ratio * n)
    if target == 0:
        if strict:
            raise StratumError(f'stratum of {n} images yields no sample at ratio {ratio}')
        target = 1
    return target


def sample_strata(
    records: list[ManifestRecord],
    ratio: float,
    seed: int,
    strict: bool = False,
) -> tuple[list[ManifestRecord], dict[str, dict[str, int]]]:
    """
    Greedy multi-label stratified sampling. The needy stratum with the fewest
    unpicked images is served first; among its images, those that would push
    already-full strata over target lose, then those that serve more needy
    strata win, and the rest is a seeded draw.
    """
    records = sorted(records, key=lambda r: r.id)
    strata_of = [record_strata(r) for r in records]
    remaining = defaultdict(set)
    for i, keys in enumerate(strata_of):
        for key in keys:
            remaining[key].add(i)
    available = {key: len(members) for key, members in remaining.items()}
    need = {key: stratum_target(n, ratio, strict) for key, n in available.items()}

    def score(i):
        overshoot = sum(1 - need[key] for key in strata_of[i] if need[key] <= 0)
        helped = sum(1 for key in strata_of[i] if need[key] > 0)
        return overshoot, -helped

    rng = np.random.default_rng(seed)
    picked = []
    while True:
        needy = [key for key in need if need[key] > 0]
        if not needy:
            break
        stratum = min(needy, key=lambda key: (len(remaining[key]), key))
        candidates = sorted(remaining[stratum])
        scores = [score(i) for i in candidates]
        best = min(scores)
        tied = [i for i, s in zip(candidates, scores) if s == best]
        choice = tied[rng.integers(len(tied))]
        picked.append(choice)
        for key in strata_of[choice]:
            need[key] -= 1
            remaining[key].discard(choice)

    counts = {}
    for key in sorted(available):
        target = stratum_target(available[key], ratio, strict)
        counts[f'{key[0]}/{key[1]}'] = {'available': available[key], 'sampled': target - need[key]}
    chosen = sorted((records[i] for i in picked), key=lambda r: r.id)
    return chosen, counts


def intersect_manifests(manifests: list[list[ManifestRecord]]) -> list[ManifestRecord]:
    if not manifests:
        raise ConfigError('at least one validation manifest is required')
    common = set.intersection(*({r.id for r in m} for m in manifests))
    return sorted((r for r in manifests[0] if r.id in common), key=lambda r: r.id)


def build_minicoco(
    train_manifest: list[ManifestRecord],
    val_manifests: list[list[ManifestRecord]],
    val_pool: list[ManifestRecord] | None = None,
    ratio: float = 0.10,
    seed: int = 0,
    strict: bool = False,
) -> MiniCocoSplit:
    if not 0 < ratio <= 1:
        raise ConfigError(f'ratio must lie in (0, 1], got {ratio}')
    train, strata = sample_strata(train_manifest, ratio, seed, strict)
    val = intersect_manifests(val_manifests)

    per_class = defaultdict(int)
    for record in val:
        for c in set(record.classes):
            per_class[c] += 1
    classes = sorted({c for record in train for c in record.classes})
    missing = [c for c in classes if per_class[c] == 0]
    if missing:
        raise ManifestError(f'classes {missing} have no validation images after intersection')

    taken = {r.id for r in val}
    pool = sorted(val_pool or (), key=lambda r: r.id)
    topped_up = {}
    for c in classes:
        if per_class[c] >= MIN_CLASS_IMAGES:
            continue
        extra = next((r for r in pool if c in r.classes and r.id not in taken), None)
        if extra is None:
            logger.warning('class %d has %d validation images and nothing to top up from', c, per_class[c])
            continue
        val.append(extra)
        taken.add(extra.id)
        topped_up[c] = extra.id
        for other in set(extra.classes):
            per_class[other] += 1
    val.sort(key=lambda r: r.id)

    splits = [
        make_split(Dataset.MINICOCO20I, fold, phase)
        for fold in range(FOLDS)
        for phase in (Phase.TRAIN, Phase.TEST)
    ]
    logger.info('built minicoco train=%d val=%d topped_up=%d', len(train), len(val), len(topped_up))
    return MiniCocoSplit(train=train, val=val, splits=splits, strata=strata, topped_up=topped_up)
