"""
Resumable store of generated images::

    <out>/generated/<kind>/<image_id>.png
    <out>/generated/provenance.jsonl

PNGs are written first and the provenance file is rewritten, sorted, on each
flush, so an interrupted run leaves a consistent store behind.
"""
import logging
import threading
from pathlib import Path

from diffss.exceptions import ManifestError
from diffss.imaging import read_color
from diffss.storage import read_jsonl, sha256, write_jsonl, write_png

from .images import GeneratedImage, Provenance
from .models import GeneratedImageRecord
from .serializers import ProvenanceSerializer

logger = logging.getLogger(__name__)

PROVENANCE_FILE = 'provenance.jsonl'


class GeneratedStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._records: dict[str, dict] = {}
        self._load()

    @property
    def provenance_path(self) -> Path:
        return self.root / PROVENANCE_FILE

    def _load(self) -> None:
        if not self.provenance_path.exists():
            return
        for line in read_jsonl(self.provenance_path):
            serializer = ProvenanceSerializer(data=line)
            if not serializer.is_valid():
                raise ManifestError(f'bad provenance line in {self.provenance_path}: {serializer.errors}')
            record = ProvenanceSerializer(serializer.save()).data
            if 'path' not in line or 'sha256' not in line:
                raise ManifestError(f"provenance line for {record['image_id']} lacks path or digest")
            record.update(path=line['path'], sha256=line['sha256'])
            if not (self.root / record['path']).exists():
                logger.warning('dropping %s: image file missing', record['image_id'])
                continue
            self._records[record['image_id']] = dict(record)

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._records

    def add(self, image: GeneratedImage) -> dict:
        relative = Path(image.provenance.kind.value) / f'{image.image_id}.png'
        digest = write_png(self.root / relative, image.image)
        record = dict(ProvenanceSerializer(image.provenance).data)
        record.update(path=relative.as_posix(), sha256=digest)
        with self._lock:
            self._records[image.image_id] = record
        return record

    def flush(self) -> Path:
        with self._lock:
            ordered = [self._records[key] for key in sorted(self._records)]
        return write_jsonl(self.provenance_path, ordered)

    def records(self) -> list[dict]:
        return [self._records[key] for key in sorted(self._records)]

    def load(self, image_id: str) -> GeneratedImage:
        record = self._records[image_id]
        data = (self.root / record['path']).read_bytes()
        if sha256(data) != record['sha256']:
            raise ManifestError(f'{image_id}: image bytes do not match recorded digest')
        return GeneratedImage(read_color(self.root / record['path']), provenance_of(record))

    def images(self, source_id: str | None = None, kind: str | None = None) -> list[GeneratedImage]:
        """Stored images in (source_id, kind, index) order."""
        selected = [
            r for r in self._records.values()
            if (source_id is None or r['source_id'] == source_id) and (kind is None or r['kind'] == kind)
        ]
        selected.sort(key=lambda r: (r['source_id'], r['kind'], r['index']))
        return [self.load(r['image_id']) for r in selected]

    def register(self) -> int:
        run_dir = str(self.root.resolve())
        for record in self.records():
            GeneratedImageRecord.objects.update_or_create(
                run_dir=run_dir,
                image_id=record['image_id'],
                defaults={
                    'source_id': record['source_id'],
                    'kind': record['kind'],
                    'index': record['index'],
                    'backend': record['backend'],
                    'seed': record['seed'],
                    'prompt': record['prompt'],
                    'params': record['params'],
                    'path': record['path'],
                    'sha256': record['sha256'],
                },
            )
        logger.info('registered generated images run=%s count=%d', run_dir, len(self))
        return len(self)


def provenance_of(record: dict) -> Provenance:
    serializer = ProvenanceSerializer(data=record)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
