from django.contrib import admin
from .models import GeneratedImageRecord


@admin.register(GeneratedImageRecord)
class GeneratedImageRecordAdmin(admin.ModelAdmin):
    list_display = ('id', 'image_id', 'kind', 'index', 'backend', 'seed', 'run_dir', 'created_at')
    list_filter = ('kind', 'backend', 'created_at')
    search_fields = ('image_id', 'source_id', 'run_dir')
    ordering = ('source_id', 'kind', 'index')
