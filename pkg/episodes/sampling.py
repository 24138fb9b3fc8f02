"""
Episode sampling. Each episode draws its own generator from (seed, index),
so any slice of a stream can be rebuilt or computed in parallel.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from rest_framework import serializers

from diffss.exceptions import InsufficientSamples, ManifestError
from diffss.storage import read_jsonl, write_jsonl

from .manifest import ManifestRecord, load_query, load_support
from .samples import Episode
from .splits import Dataset, Phase, SplitSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpisodeSpec:
    """An episode by manifest ids, before any pixels are read."""
    id: str
    dataset: Dataset
    fold: int
    phase: Phase
    class_index: int
    class_name: str
    support_ids: tuple[str, ...]
    query_id: str

    def __post_init__(self):
        object.__setattr__(self, 'support_ids', tuple(self.support_ids))
        object.__setattr__(self, 'dataset', Dataset(self.dataset))
        object.__setattr__(self, 'phase', Phase(self.phase))


class EpisodeSpecSerializer(serializers.Serializer):
    id = serializers.CharField()
    dataset = serializers.ChoiceField(choices=Dataset.choices)
    fold = serializers.IntegerField(min_value=0)
    phase = serializers.ChoiceField(choices=Phase.choices)
    class_index = serializers.IntegerField(min_value=1)
    class_name = serializers.CharField()
    support_ids = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    query_id = serializers.CharField()

    def to_representation(self, instance):
        document = super().to_representation(instance)
        document['support_ids'] = list(instance.support_ids)
        return document

    def create(self, validated_data):
        return EpisodeSpec(**validated_data)


def candidates_by_class(split: SplitSpec, pool: list[ManifestRecord]) -> dict[int, list[ManifestRecord]]:
    by_class = {}
    for c in split.classes:
        by_class[c] = sorted((r for r in pool if r.has_class(c)), key=lambda r: r.id)
    return by_class


def sample_episode_spec(
    split: SplitSpec,
    pool: list[ManifestRecord],
    k: int,
    seed: int,
    index: int = 0,
    by_class: dict[int, list[ManifestRecord]] | None = None,
) -> EpisodeSpec:
    """
    Draw the class uniformly among classes with at least k + 1 images, then
    k supports and one query without replacement.
    """
    if k < 1:
        raise InsufficientSamples(f'k must be positive, got {k}')
    by_class = by_class if by_class is not None else candidates_by_class(split, pool)
    eligible = [c for c in split.classes if len(by_class.get(c, ())) >= k + 1]
    if not eligible:
        raise InsufficientSamples(
            f'no class of {split.dataset} fold {split.fold} {split.phase} has {k + 1} images'
        )
    rng = np.random.default_rng([seed, index])
    class_index = eligible[rng.integers(len(eligible))]
    members = by_class[class_index]
    picks = rng.choice(len(members), size=k + 1, replace=False)
    supports = [members[i] for i in picks[:k]]
    query = members[picks[k]]
    name = supports[0].name_of(class_index) or split.name_of(class_index)
    return EpisodeSpec(
        id=f'{split.dataset.value}-f{split.fold}-{split.phase.value}-s{seed}-{index:05d}',
        dataset=split.dataset,
        fold=split.fold,
        phase=split.phase,
        class_index=class_index,
        class_name=name,
        support_ids=[r.id for r in supports],
        query_id=query.id,
    )


def episode_stream(
    split: SplitSpec,
    pool: list[ManifestRecord],
    k: int,
    seed: int,
    count: int,
) -> Iterator[EpisodeSpec]:
    by_class = candidates_by_class(split, pool)
    for index in range(count):
        yield sample_episode_spec(split, pool, k, seed, index, by_class)


def load_episode(spec: EpisodeSpec, pool: list[ManifestRecord], root: Path) -> Episode:
    records = {r.id: r for r in pool}
    try:
        supports = [records[i] for i in spec.support_ids]
        query = records[spec.query_id]
    except KeyError as exc:
        raise ManifestError(f'episode {spec.id} references unknown id {exc.args[0]}')
    return Episode(
        supports=[load_support(root, r, spec.class_index, spec.class_name) for r in supports],
        query=load_query(root, query, spec.class_index),
        k_original=len(supports),
        fold=spec.fold,
        class_index=spec.class_index,
        id=spec.id,
    )


def sample_episode(
    split: SplitSpec,
    pool: list[ManifestRecord],
    k: int,
    seed: int,
    root: Path,
    index: int = 0,
) -> Episode:
    return load_episode(sample_episode_spec(split, pool, k, seed, index), pool, root)


def write_episode_dump(path: Path, specs: list[EpisodeSpec]) -> Path:
    return write_jsonl(path, [EpisodeSpecSerializer(s).data for s in specs])


def read_episode_dump(path: Path) -> list[EpisodeSpec]:
    specs = []
    for line in read_jsonl(path):
        serializer = EpisodeSpecSerializer(data=line)
        if not serializer.is_valid():
            raise ManifestError(f'bad episode line in {path}: {serializer.errors}')
        specs.append(serializer.save())
    return specs
