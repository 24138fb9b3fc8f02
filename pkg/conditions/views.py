from rest_framework import viewsets, permissions
from drf_yasg.utils import swagger_auto_schema

from .models import ConditionArtifact
from .serializers import ConditionArtifactSerializer


class ConditionArtifactViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = ConditionArtifact.objects.all()
    serializer_class = ConditionArtifactSerializer
    permission_classes = [permissions.IsAuthenticated]

    @swagger_auto_schema(operation_summary="List condition artifacts",
                         operation_description="Control conditions written by `manage.py conditions`. Filter with ?kind= and ?source_id=.")
    def list(self, request, *args, **kwargs):
        return super().list(request, *args, **kwargs)

    @swagger_auto_schema(operation_summary="Retrieve condition artifact")
    def retrieve(self, request, *args, **kwargs):
        return super().retrieve(request, *args, **kwargs)

    def get_queryset(self):
        queryset = self.queryset
        kind = self.request.query_params.get('kind')
        source_id = self.request.query_params.get('source_id')
        if kind:
            queryset = queryset.filter(kind=kind)
        if source_id:
            queryset = queryset.filter(source_id=source_id)
        return queryset
