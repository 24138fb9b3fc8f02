import json
from pathlib import Path

from diffss.exceptions import ManifestError
from diffss.storage import atomic_write_text, dumps, write_json

from .audit import DriftRecord, DriftReport
from .models import DriftRecordRow
from .serializers import DriftReportSerializer

REPORT_NAME = 'drift_report.json'
TABLE_NAME = 'drift_table.txt'


def write_drift_report(directory: Path, report: DriftReport) -> Path:
    """Writes the JSON report and its text table side by side."""
    directory = Path(directory)
    path = write_json(directory / REPORT_NAME, report.to_dict())
    atomic_write_text(directory / TABLE_NAME, report.render())
    return path


def read_drift_report(path: Path) -> DriftReport:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f'drift report {path} does not exist')
    serializer = DriftReportSerializer(data=json.loads(path.read_text(encoding='utf-8')))
    if not serializer.is_valid():
        raise ManifestError(f'bad drift report {path}: {serializer.errors}')
    records = [DriftRecord(**r) for r in serializer.validated_data['records']]
    baseline = [DriftRecord(**r) for r in serializer.validated_data['baseline']]
    return DriftReport.from_records(records, baseline)


def rerender(path: Path) -> str:
    return dumps(read_drift_report(path).to_dict())


def register_drift(report: DriftReport, run_dir: Path) -> int:
    run_dir = str(Path(run_dir).resolve())
    for record in report.records + report.baseline:
        values = record.to_dict()
        image_id = values.pop('image_id')
        DriftRecordRow.objects.update_or_create(run_dir=run_dir, image_id=image_id, defaults=values)
    return len(report.records) + len(report.baseline)
