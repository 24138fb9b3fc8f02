from django.contrib import admin
from .models import ConditionArtifact


@admin.register(ConditionArtifact)
class ConditionArtifactAdmin(admin.ModelAdmin):
    list_display = ('id', 'source_id', 'kind', 'threshold', 'detector_id', 'resolution', 'run_dir', 'created_at')
    list_filter = ('kind', 'detector_id', 'created_at')
    search_fields = ('source_id', 'prompt', 'run_dir')
    ordering = ('source_id', 'kind')
