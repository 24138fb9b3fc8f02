import json
from pathlib import Path

from diffss.exceptions import ManifestError
from diffss.storage import dumps, write_json

from .models import EvaluationReport
from .reports import FoldReport
from .serializers import FoldReportSerializer


def report_document(report: FoldReport) -> dict:
    return FoldReportSerializer(report).data


def write_report(path: Path, report: FoldReport) -> Path:
    return write_json(path, report_document(report))


def read_report(path: Path) -> FoldReport:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f'report {path} does not exist')
    serializer = FoldReportSerializer(data=json.loads(path.read_text(encoding='utf-8')))
    if not serializer.is_valid():
        raise ManifestError(f'bad report {path}: {serializer.errors}')
    return serializer.save()


def rerender(path: Path) -> str:
    """The JSON text a stored report would be written as today."""
    return dumps(report_document(read_report(path)))


def register_report(report: FoldReport, path: Path, run_dir: Path) -> EvaluationReport:
    config = report.config
    row, _ = EvaluationReport.objects.update_or_create(
        run_dir=str(Path(run_dir).resolve()),
        label=report.label,
        defaults={
            'dataset': config.get('dataset', ''),
            'phase': config.get('phase', ''),
            'k_original': config.get('k_original', 1),
            'n_aux': config.get('n_aux', 0),
            'guidance': config.get('guidance') or '',
            'segmenter': config.get('segmenter', ''),
            'seed': config.get('seed', 0),
            'folds': {str(f): v for f, v in sorted(report.folds.items())},
            'mean_miou': report.mean,
            'episodes': report.episodes,
            'failures': report.failures,
            'path': str(path),
        },
    )
    return row
