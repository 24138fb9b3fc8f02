from rest_framework import viewsets, permissions
from drf_yasg.utils import swagger_auto_schema

from .models import GeneratedImageRecord
from .serializers import GeneratedImageRecordSerializer


class GeneratedImageViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = GeneratedImageRecord.objects.all()
    serializer_class = GeneratedImageRecordSerializer
    permission_classes = [permissions.IsAuthenticated]

    @swagger_auto_schema(operation_summary="List generated images",
                         operation_description="Auxiliary images registered by `manage.py generate`. Filter with ?kind=, ?source_id= and ?backend=.")
    def list(self, request, *args, **kwargs):
        return super().list(request, *args, **kwargs)

    @swagger_auto_schema(operation_summary="Retrieve generated image provenance")
    def retrieve(self, request, *args, **kwargs):
        return super().retrieve(request, *args, **kwargs)

    def get_queryset(self):
        queryset = self.queryset
        for field in ('kind', 'source_id', 'backend'):
            value = self.request.query_params.get(field)
            if value:
                queryset = queryset.filter(**{field: value})
        return queryset
