from rest_framework import viewsets, permissions
from drf_yasg.utils import swagger_auto_schema

from .models import EvaluationReport
from .serializers import EvaluationReportSerializer


class EvaluationReportViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = EvaluationReport.objects.all()
    serializer_class = EvaluationReportSerializer
    permission_classes = [permissions.IsAuthenticated]

    @swagger_auto_schema(operation_summary="List evaluation reports",
                         operation_description="Fold reports registered by `manage.py evaluate`. Filter with ?dataset=, ?guidance= and ?n_aux=.")
    def list(self, request, *args, **kwargs):
        return super().list(request, *args, **kwargs)

    @swagger_auto_schema(operation_summary="Retrieve evaluation report")
    def retrieve(self, request, *args, **kwargs):
        return super().retrieve(request, *args, **kwargs)

    def get_queryset(self):
        queryset = self.queryset
        for field in ('dataset', 'guidance', 'n_aux'):
            value = self.request.query_params.get(field)
            if value:
                queryset = queryset.filter(**{field: value})
        return queryset
