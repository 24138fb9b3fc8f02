"""
Dataset manifests: one JSON object per line::

    {"id": "2008_000123", "image": "images/2008_000123.png",
     "mask": "masks/2008_000123.png", "classes": [12, 15],
     "sizes": ["large", "small"], "names": ["dog", "person"]}

``mask`` is a single-channel label map whose pixel values are class indices
(0 background, 255 void). ``sizes`` and ``names`` are optional and parallel
to ``classes``.

Records with ``"binary": true`` carry a per-image foreground mask instead
({0, 255}, any nonzero pixel is foreground) and exactly one class; FSS-1000
records look like this, since its class indices run past what an 8-bit label
map can hold.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from rest_framework import serializers

from diffss.exceptions import EmptyMask, ManifestError
from diffss.imaging import read_color, read_gray
from diffss.storage import read_jsonl, write_jsonl

from .samples import QuerySample, SupportSample

logger = logging.getLogger(__name__)

SIZE_BUCKETS = ('small', 'medium', 'large')
VOID_LABEL = 255
MAX_LABEL = 254
MAX_CLASS_INDEX = 1000


def size_bucket(area: int) -> str:
    """COCO object-size bucket for an instance area in pixels."""
    if area < 32 ** 2:
        return 'small'
    if area < 96 ** 2:
        return 'medium'
    return 'large'


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    image: str
    mask: str
    classes: tuple[int, ...]
    sizes: tuple[str, ...] = ()
    names: tuple[str, ...] = ()
    binary: bool = False

    def __post_init__(self):
        for name in ('classes', 'sizes', 'names'):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def has_class(self, class_index: int) -> bool:
        return class_index in self.classes

    def name_of(self, class_index: int) -> str | None:
        if not self.names:
            return None
        return self.names[self.classes.index(class_index)]

    def to_dict(self) -> dict:
        document = {'id': self.id, 'image': self.image, 'mask': self.mask, 'classes': list(self.classes)}
        if self.sizes:
            document['sizes'] = list(self.sizes)
        if self.names:
            document['names'] = list(self.names)
        if self.binary:
            document['binary'] = True
        return document


class ManifestRecordSerializer(serializers.Serializer):
    id = serializers.CharField()
    image = serializers.CharField()
    mask = serializers.CharField()
    classes = serializers.ListField(child=serializers.IntegerField(min_value=1, max_value=MAX_CLASS_INDEX), allow_empty=False)
    sizes = serializers.ListField(child=serializers.ChoiceField(choices=SIZE_BUCKETS), required=False, default=list)
    names = serializers.ListField(child=serializers.CharField(), required=False, default=list)
    binary = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        for field in ('sizes', 'names'):
            if attrs[field] and len(attrs[field]) != len(attrs['classes']):
                raise serializers.ValidationError({field: 'must be parallel to classes'})
        if attrs['binary'] and len(attrs['classes']) != 1:
            raise serializers.ValidationError({'classes': 'a binary mask holds exactly one class'})
        if not attrs['binary'] and max(attrs['classes']) > MAX_LABEL:
            raise serializers.ValidationError(
                {'classes': f'label maps hold class indices up to {MAX_LABEL}; mark per-image masks binary'}
            )
        return attrs

    def create(self, validated_data):
        return ManifestRecord(**validated_data)


def load_manifest(path: Path) -> list[ManifestRecord]:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f'manifest {path} does not exist')
    records, seen = [], set()
    for number, line in enumerate(read_jsonl(path), start=1):
        serializer = ManifestRecordSerializer(data=line)
        if not serializer.is_valid():
            raise ManifestError(f'{path}:{number}: {serializer.errors}')
        record = serializer.save()
        if record.id in seen:
            raise ManifestError(f'{path}:{number}: duplicate id {record.id}')
        seen.add(record.id)
        records.append(record)
    logger.info('loaded manifest path=%s records=%d', path, len(records))
    return records


def write_manifest(path: Path, records: list[ManifestRecord]) -> Path:
    return write_jsonl(path, [r.to_dict() for r in sorted(records, key=lambda r: r.id)])


def class_mask(root: Path, record: ManifestRecord, class_index: int) -> np.ndarray:
    labels = read_gray(Path(root) / record.mask)
    if record.binary:
        return ((labels > 0) & record.has_class(class_index)).astype(np.uint8)
    return (labels == class_index).astype(np.uint8)


def support_id(record: ManifestRecord, class_index: int) -> str:
    """Record id, suffixed with the class when the record holds several."""
    if len(set(record.classes)) > 1:
        return f'{record.id}@c{class_index}'
    return record.id


def load_support(root: Path, record: ManifestRecord, class_index: int, class_name: str) -> SupportSample:
    mask = class_mask(root, record, class_index)
    if not mask.any():
        raise EmptyMask(f'{record.id} has no pixels of class {class_index}')
    return SupportSample(
        image=read_color(Path(root) / record.image),
        mask=mask,
        class_index=class_index,
        class_name=class_name,
        id=support_id(record, class_index),
    )


def load_query(root: Path, record: ManifestRecord, class_index: int) -> QuerySample:
    return QuerySample(
        image=read_color(Path(root) / record.image),
        mask=class_mask(root, record, class_index),
        class_index=class_index,
        id=record.id,
    )
