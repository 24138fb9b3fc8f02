from django.db.models import Avg, Count
from rest_framework import permissions
from rest_framework.decorators import api_view, permission_classes
from rest_framework.response import Response

from conditions.models import ConditionArtifact
from drift_audit.models import DriftRecordRow
from generation.models import GeneratedImageRecord
from metrics.models import EvaluationReport

from .permissions import IsStaffUser
from .serializers import RunOverviewSerializer
from drf_yasg.utils import swagger_auto_schema


def _counts_by_kind(queryset):
    return {row['kind']: row['n'] for row in queryset.values('kind').annotate(n=Count('id')).order_by('kind')}


@swagger_auto_schema(method='get', operation_summary="Run overview",
                     operation_description="Staff-only: counts of conditions, generated images, reports and drift records.")
@api_view(['GET'])
@permission_classes([permissions.IsAuthenticated, IsStaffUser])
def run_overview(request):
    best = EvaluationReport.objects.order_by('-mean_miou', 'label').first()
    drift = DriftRecordRow.objects.exclude(iou__isnull=True)
    data = {
        'conditions_total': ConditionArtifact.objects.count(),
        'conditions_by_kind': _counts_by_kind(ConditionArtifact.objects.all()),

        'generated_total': GeneratedImageRecord.objects.count(),
        'generated_by_kind': _counts_by_kind(GeneratedImageRecord.objects.all()),

        'reports_total': EvaluationReport.objects.count(),
        'best_report': {'label': best.label, 'mean_miou': best.mean_miou, 'run_dir': best.run_dir} if best else None,

        'drift_total': DriftRecordRow.objects.count(),
        'drift_failed': DriftRecordRow.objects.filter(iou__isnull=True).count(),
        'drift_mean_iou': {
            row['kind']: row['mean']
            for row in drift.values('kind').annotate(mean=Avg('iou')).order_by('kind')
        },
    }

    serializer = RunOverviewSerializer(data)
    return Response(serializer.data)
