from rest_framework import viewsets, permissions
from drf_yasg.utils import swagger_auto_schema

from .models import DriftRecordRow
from .serializers import DriftRecordRowSerializer


class DriftRecordViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = DriftRecordRow.objects.all()
    serializer_class = DriftRecordRowSerializer
    permission_classes = [permissions.IsAuthenticated]

    @swagger_auto_schema(operation_summary="List drift records",
                         operation_description="Per-image drift IoU from `manage.py drift`. Filter with ?kind=, ?quality= and ?source_id=.")
    def list(self, request, *args, **kwargs):
        return super().list(request, *args, **kwargs)

    @swagger_auto_schema(operation_summary="Retrieve drift record")
    def retrieve(self, request, *args, **kwargs):
        return super().retrieve(request, *args, **kwargs)

    def get_queryset(self):
        queryset = self.queryset
        for field in ('kind', 'quality', 'source_id'):
            value = self.request.query_params.get(field)
            if value:
                queryset = queryset.filter(**{field: value})
        return queryset
