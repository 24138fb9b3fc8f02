"""
On-disk layout of a conditions run::

    <out>/conditions/<kind>/<source_id>.png
    <out>/conditions/provenance.jsonl
"""
import logging
from pathlib import Path

from diffss.exceptions import ManifestError
from diffss.imaging import read_color, read_gray
from diffss.storage import read_jsonl, write_jsonl, write_png

from .controls import ControlCondition, ScribbleConfig
from .edges import EdgeDetector
from .models import ConditionArtifact, GuidanceKind
from .serializers import ConditionProvenanceSerializer

logger = logging.getLogger(__name__)

PROVENANCE_FILE = 'provenance.jsonl'


def write_condition(
    condition: ControlCondition,
    root: Path,
    detector: EdgeDetector | None,
    cfg: ScribbleConfig,
) -> dict:
    relative = Path(condition.kind.value) / f'{condition.source_id}.png'
    digest = write_png(Path(root) / relative, condition.condition_image)
    uses_edges = condition.kind != GuidanceKind.SEGMAP
    return {
        'source_id': condition.source_id,
        'kind': condition.kind.value,
        'prompt': condition.prompt,
        'threshold': cfg.threshold,
        'detector_id': detector.detector_id if uses_edges and detector else '',
        'resolution': detector.resolution if uses_edges and detector else None,
        'path': relative.as_posix(),
        'sha256': digest,
    }


def write_provenance(root: Path, records: list[dict]) -> Path:
    ordered = sorted(records, key=lambda r: (r['source_id'], r['kind']))
    return write_jsonl(Path(root) / PROVENANCE_FILE, ordered)


def read_provenance(root: Path) -> list[dict]:
    path = Path(root) / PROVENANCE_FILE
    if not path.exists():
        raise ManifestError(f'no condition provenance at {path}')
    records = []
    for line in read_jsonl(path):
        serializer = ConditionProvenanceSerializer(data=line)
        if not serializer.is_valid():
            raise ManifestError(f'bad provenance line in {path}: {serializer.errors}')
        records.append(serializer.validated_data)
    return records


def load_condition(root: Path, record: dict) -> ControlCondition:
    path = Path(root) / record['path']
    image = read_color(path) if record['kind'] == GuidanceKind.SEGMAP else read_gray(path)
    return ControlCondition(
        kind=record['kind'],
        condition_image=image,
        prompt=record['prompt'],
        source_id=record['source_id'],
    )


def register_artifacts(root: Path, records: list[dict]) -> int:
    run_dir = str(Path(root).resolve())
    for record in records:
        ConditionArtifact.objects.update_or_create(
            run_dir=run_dir,
            source_id=record['source_id'],
            kind=record['kind'],
            defaults={
                'prompt': record['prompt'],
                'threshold': record['threshold'],
                'detector_id': record['detector_id'],
                'resolution': record['resolution'],
                'path': record['path'],
                'sha256': record['sha256'],
            },
        )
    logger.info('registered conditions run=%s count=%d', run_dir, len(records))
    return len(records)
